"""Layered synthetic light fields with analytically known views.

Each layer is a periodic texture plus an opacity mask, both defined at
the central view. View ``(u, v)`` shows every layer translated by
``disparity * (u - center_u)`` pixels down and ``disparity * (v -
center_v)`` pixels right, composited back to front over a solid
background. Translation wraps around the frame, so every pixel of every
view is defined.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional, Sequence

import numpy as np
from scipy import ndimage

from .core import LightField, to_uint8
from .errors import SceneError

TEXTURE_KINDS = ("solid", "checker", "stripes", "sinusoid", "noise")
MASK_KINDS = ("full", "rect", "disk")


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        # 1.5 -> 3/2 rather than the binary expansion
        return Fraction(repr(x))
    return Fraction(x)


@dataclass(frozen=True)
class Layer:
    disparity: Fraction
    texture: dict = field(default_factory=lambda: {"kind": "solid", "color": [128, 128, 128]})
    mask: dict = field(default_factory=lambda: {"kind": "full"})

    def __post_init__(self):
        object.__setattr__(self, "disparity", as_fraction(self.disparity))
        if self.texture.get("kind") not in TEXTURE_KINDS:
            raise SceneError(f"unknown texture kind {self.texture.get('kind')!r}")
        if self.mask.get("kind") not in MASK_KINDS:
            raise SceneError(f"unknown mask kind {self.mask.get('kind')!r}")


@dataclass(frozen=True)
class SyntheticSceneSpec:
    """Layers are ordered back to front."""

    layers: tuple
    background: tuple = (0, 0, 0)
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        object.__setattr__(self, "background", tuple(int(c) for c in self.background))
        if len(self.background) != 3:
            raise SceneError("background must be an RGB triple")

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "SyntheticSceneSpec":
        layers = [Layer(disparity=l["disparity"],
                        texture=dict(l.get("texture", {"kind": "solid", "color": [128] * 3})),
                        mask=dict(l.get("mask", {"kind": "full"})))
                  for l in d.get("layers", [])]
        return cls(layers=layers, background=tuple(d.get("background", (0, 0, 0))),
                   seed=int(d.get("seed", 0)))

    def to_dict(self) -> dict[str, Any]:
        return {
            "background": list(self.background),
            "seed": self.seed,
            "layers": [{"disparity": str(l.disparity), "texture": l.texture, "mask": l.mask}
                       for l in self.layers],
        }


def single_plane_scene(disparity, texture: Optional[dict] = None, seed: int = 0):
    texture = texture or {"kind": "sinusoid"}
    return SyntheticSceneSpec(layers=[Layer(disparity, texture)], seed=seed)


def _color(c, default):
    c = default if c is None else c
    return np.asarray(c, dtype=np.float64).reshape(1, 1, 3)


def make_texture(tex: dict, height: int, width: int, rng: np.random.Generator) -> np.ndarray:
    """Render a texture as a ``(height, width, 3)`` uint8 tile."""
    kind = tex["kind"]
    yy, xx = np.mgrid[0:height, 0:width]
    if kind == "solid":
        out = np.broadcast_to(_color(tex.get("color"), [128] * 3), (height, width, 3))
    elif kind == "checker":
        period = int(tex.get("period", 8))
        sel = ((yy // period + xx // period) % 2).astype(bool)[..., None]
        out = np.where(sel, _color(tex.get("color1"), [230] * 3), _color(tex.get("color0"), [25] * 3))
    elif kind == "stripes":
        period = int(tex.get("period", 8))
        duty = float(tex.get("duty", 0.5))
        coord = xx if tex.get("orientation", "vertical") == "vertical" else yy
        sel = ((coord % period) >= period * duty)[..., None]
        out = np.where(sel, _color(tex.get("color1"), [230] * 3), _color(tex.get("color0"), [25] * 3))
    elif kind == "sinusoid":
        # integer cycles per frame keep the tile seamless under wrap-around
        comps = tex.get("components") or [
            {"fy": 1, "fx": 2, "amplitude": 60, "phase": 0.0},
            {"fy": 2, "fx": 1, "amplitude": 40, "phase": 1.3},
            {"fy": 3, "fx": -2, "amplitude": 20, "phase": 2.1},
        ]
        offset = float(tex.get("offset", 128))
        out = np.empty((height, width, 3))
        for ch in range(3):
            acc = np.full((height, width), offset)
            for comp in comps:
                ph = float(comp.get("phase", 0.0)) + 2.0 * ch
                acc += float(comp["amplitude"]) * np.sin(
                    2 * np.pi * (comp["fy"] * yy / height + comp["fx"] * xx / width) + ph)
            out[..., ch] = acc
    elif kind == "noise":
        amp = float(tex.get("amplitude", 100))
        smooth = int(tex.get("smooth", 0))
        raw = rng.uniform(-1.0, 1.0, size=(height, width, 3))
        if smooth > 0:
            raw = ndimage.uniform_filter(raw, size=(2 * smooth + 1, 2 * smooth + 1, 1), mode="wrap")
            raw /= max(np.abs(raw).max(), 1e-12)
        out = float(tex.get("offset", 128)) + amp * raw
    else:
        raise SceneError(f"unknown texture kind {kind!r}")
    return to_uint8(out)


def make_mask(mask: dict, height: int, width: int) -> np.ndarray:
    kind = mask["kind"]
    if kind == "full":
        return np.ones((height, width))
    yy, xx = np.mgrid[0:height, 0:width]
    if kind == "rect":
        y0, x0 = int(mask["y"]), int(mask["x"])
        h, w = int(mask["h"]), int(mask["w"])
        return ((yy >= y0) & (yy < y0 + h) & (xx >= x0) & (xx < x0 + w)).astype(np.float64)
    if kind == "disk":
        cy, cx, r = float(mask["cy"]), float(mask["cx"]), float(mask["r"])
        return (((yy - cy) ** 2 + (xx - cx) ** 2) <= r * r).astype(np.float64)
    raise SceneError(f"unknown mask kind {kind!r}")


def shift_periodic(arr: np.ndarray, sy: Fraction, sx: Fraction) -> np.ndarray:
    """Translate ``arr`` by ``(sy, sx)`` pixels with wrap-around.

    ``out[y, x] = arr[y - sy, x - sx]``; integer shifts are exact rolls,
    fractional shifts resample linearly between the two nearest rolls.
    """
    out = np.asarray(arr, dtype=np.float64)
    for axis, s in ((0, sy), (1, sx)):
        s = Fraction(s)
        n = s.numerator // s.denominator
        f = s - n
        if f == 0:
            out = np.roll(out, n, axis=axis)
        else:
            fw = float(f)
            out = (1.0 - fw) * np.roll(out, n, axis=axis) + fw * np.roll(out, n + 1, axis=axis)
    return out


def angular_center(rows: int, cols: int) -> tuple[Fraction, Fraction]:
    return Fraction(rows - 1, 2), Fraction(cols - 1, 2)


def view_shift(disparity: Fraction, u: int, v: int, rows: int, cols: int):
    cu, cv = angular_center(rows, cols)
    return disparity * (u - cu), disparity * (v - cv)


def render_view(spec: SyntheticSceneSpec, u: int, v: int, rows: int, cols: int,
                width: int, height: int, _cache=None) -> np.ndarray:
    """Render a single view of the scene; the reference for per-view oracles."""
    tiles = _cache if _cache is not None else _layer_tiles(spec, width, height)
    acc = np.broadcast_to(np.asarray(spec.background, dtype=np.float64).reshape(1, 1, 3),
                          (height, width, 3)).copy()
    for layer, (tex, alpha) in zip(spec.layers, tiles):
        sy, sx = view_shift(layer.disparity, u, v, rows, cols)
        t = shift_periodic(tex, sy, sx)
        if alpha is None:
            acc = t
        else:
            a = shift_periodic(alpha, sy, sx)[..., None]
            acc = a * t + (1.0 - a) * acc
    return to_uint8(acc)


def _layer_tiles(spec: SyntheticSceneSpec, width: int, height: int):
    tiles = []
    for i, layer in enumerate(spec.layers):
        rng = np.random.default_rng([spec.seed, i])
        tex = make_texture(layer.texture, height, width, rng).astype(np.float64)
        m = make_mask(layer.mask, height, width)
        tiles.append((tex, None if m.min() == 1.0 else m))
    return tiles


def check_scene(spec: SyntheticSceneSpec, rows: int, cols: int, width: int, height: int):
    if width <= 0 or height <= 0:
        raise SceneError("view dimensions must be positive")
    cu, cv = angular_center(rows, cols)
    for i, layer in enumerate(spec.layers):
        d = abs(layer.disparity)
        if d * cv >= width or d * cu >= height:
            raise SceneError(
                f"layer {i}: disparity {layer.disparity} too large for a "
                f"{rows}x{cols} grid of {width}x{height} views")


def generate_synthetic_lf(spec: SyntheticSceneSpec, rows: int, cols: int,
                          width: int, height: int) -> LightField:
    check_scene(spec, rows, cols, width, height)
    tiles = _layer_tiles(spec, width, height)
    views = {(u, v): render_view(spec, u, v, rows, cols, width, height, _cache=tiles)
             for u in range(rows) for v in range(cols)}
    return LightField(rows, cols, views)
