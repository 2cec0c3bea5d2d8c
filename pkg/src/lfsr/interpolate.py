"""View interpolators: linear averaging, block-matched shift compensation,
and an external-process hook for plugged-in models.

Geometry convention: moving one step along an angular axis translates
scene content by ``+disparity`` pixels along the matching spatial axis
(angular row ``u`` <-> image row ``y``, angular column ``v`` <-> image
column ``x``). A baseline direction is the spatial unit step ``(dy, dx)``
from the first source to the second, each component in ``{-1, 0, 1}``.
"""

from __future__ import annotations

import os
import shlex
import subprocess
import tempfile
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .core import ViewIndex, check_view, to_uint8
from .errors import DimensionError, InterpolationError

HORIZONTAL = (0, 1)
VERTICAL = (1, 0)
DIAGONAL_TLBR = (1, 1)
DIAGONAL_TRBL = (1, -1)

KINDS = ("linear", "shift", "external")


@dataclass(frozen=True)
class InterpolatorSpec:
    kind: str = "linear"
    block_size: int = 16
    search_radius: int = 8
    command: Optional[str] = None
    timeout: float = 300.0
    pool_size: Optional[int] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown interpolator kind {self.kind!r}")
        if self.kind == "shift":
            if self.block_size < 4:
                raise ValueError(f"block_size must be >= 4, got {self.block_size}")
            if self.search_radius < 1:
                raise ValueError(f"search_radius must be >= 1, got {self.search_radius}")
        if self.kind == "external" and not self.command:
            raise ValueError("external interpolator needs a command template")

    @classmethod
    def parse(cls, text: str, **kw) -> "InterpolatorSpec":
        """CLI form: ``linear``, ``shift`` or ``ext:<command template>``."""
        if text.startswith("ext:"):
            return cls("external", command=text[4:], **kw)
        if text in ("linear", "shift"):
            return cls(text, **kw)
        raise ValueError(f"unknown interpolator {text!r}")

    @property
    def name(self) -> str:
        return {"linear": "linear", "shift": "shift", "external": "ext"}[self.kind]


@dataclass(frozen=True)
class DisparityField:
    """Per-block displacement (pixels) of the second image along ``direction``."""

    displacement: np.ndarray  # (n_block_rows, n_block_cols) int
    direction: tuple
    block_size: int
    shape: tuple  # (height, width) of the images

    @property
    def vectors(self) -> np.ndarray:
        """Per-block ``(dy, dx)`` displacements, shape ``(..., 2)``."""
        dy, dx = self.direction
        return np.stack([self.displacement * dy, self.displacement * dx], axis=-1)

    def per_pixel(self) -> np.ndarray:
        b = self.block_size
        full = np.repeat(np.repeat(self.displacement, b, axis=0), b, axis=1)
        return full[:self.shape[0], :self.shape[1]]


def _same_shape(*imgs):
    shapes = {im.shape for im in imgs}
    if len(shapes) != 1:
        raise DimensionError(f"source views differ in shape: {sorted(shapes)}")


def _check_direction(direction) -> tuple:
    dy, dx = (int(c) for c in direction)
    if dy not in (-1, 0, 1) or dx not in (-1, 0, 1) or (dy, dx) == (0, 0):
        raise ValueError(f"invalid baseline direction {direction}")
    return dy, dx


def shift_int(img: np.ndarray, dy: int, dx: int):
    """``out[y, x] = img[y + dy, x + dx]`` plus a mask of in-frame samples."""
    H, W = img.shape[:2]
    out = np.zeros_like(img)
    valid = np.zeros((H, W), dtype=bool)
    ys, yd = slice(max(dy, 0), H + min(dy, 0)), slice(max(-dy, 0), H + min(-dy, 0))
    xs, xd = slice(max(dx, 0), W + min(dx, 0)), slice(max(-dx, 0), W + min(-dx, 0))
    if ys.start < ys.stop and xs.start < xs.stop:
        out[yd, xd] = img[ys, xs]
        valid[yd, xd] = True
    return out, valid


def sample_offset(img: np.ndarray, oy: float, ox: float):
    """Bilinear sample of ``img`` at ``(y + oy, x + ox)`` with validity mask."""
    img = np.asarray(img, dtype=np.float64)
    terms = []
    for ky, wy in _taps(oy):
        for kx, wx in _taps(ox):
            terms.append((ky, kx, wy * wx))
    out = np.zeros(img.shape)
    valid = np.ones(img.shape[:2], dtype=bool)
    for ky, kx, w in terms:
        s, m = shift_int(img, ky, kx)
        out += w * s
        valid &= m
    return out, valid


def _taps(o: float):
    k = int(np.floor(o))
    f = o - k
    return [(k, 1.0)] if f == 0 else [(k, 1.0 - f), (k + 1, f)]


def _candidates(radius: int):
    yield 0
    for r in range(1, radius + 1):
        yield -r
        yield r


def _block_sum(x: np.ndarray, b: int) -> np.ndarray:
    H, W = x.shape
    nby, nbx = -(-H // b), -(-W // b)
    padded = np.zeros((nby * b, nbx * b), dtype=x.dtype)
    padded[:H, :W] = x
    return padded.reshape(nby, b, nbx, b).sum(axis=(1, 3))


def estimate_disparity(a: np.ndarray, b: np.ndarray, direction, block_size: int = 16,
                       search_radius: int = 8) -> DisparityField:
    """Block-matching displacement of ``b`` relative to ``a`` along ``direction``.

    For each block of ``a`` and each candidate ``d`` in ``[-R, R]`` the cost
    is the sum of absolute differences between ``a[p]`` and
    ``b[p + d * direction]`` over RGB, divided by the number of pixels whose
    match lies inside the frame (interior blocks: plain SAD). Ties go to the
    smaller ``|d|``, then to the negative one.
    """
    a, b = check_view(a, "a"), check_view(b, "b")
    _same_shape(a, b)
    direction = _check_direction(direction)
    H, W = a.shape[:2]
    if block_size > H or block_size > W:
        raise DimensionError(f"block size {block_size} larger than image {W}x{H}")
    if search_radius < 0:
        raise ValueError("search_radius must be non-negative")
    ai, bi = a.astype(np.int64), b.astype(np.int64)
    best = best_sad = best_n = None
    for d in _candidates(search_radius):
        shifted, valid = shift_int(bi, d * direction[0], d * direction[1])
        ad = np.abs(ai - shifted).sum(axis=2) * valid
        sad = _block_sum(ad, block_size)
        n = _block_sum(valid.astype(np.int64), block_size)
        if best is None:
            best = np.full(sad.shape, d, dtype=np.int64)
            best_sad, best_n = sad, n
            continue
        # sad/n < best_sad/best_n, exactly; empty overlaps never win
        better = (n > 0) & ((best_n == 0) | (sad * best_n < best_sad * n))
        best = np.where(better, d, best)
        best_sad = np.where(better, sad, best_sad)
        best_n = np.where(better, n, best_n)
    return DisparityField(best, direction, block_size, (H, W))


def interpolate_pair_linear(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Per-sample rounded mean of two views."""
    a, b = check_view(a, "a"), check_view(b, "b")
    _same_shape(a, b)
    return to_uint8((a.astype(np.float64) + b) / 2.0)


def _pair_shift_float(a, b, direction, spec: InterpolatorSpec) -> np.ndarray:
    field = estimate_disparity(a, b, direction, spec.block_size, spec.search_radius)
    dy, dx = field.direction
    dmap = field.per_pixel()
    af, bf = a.astype(np.float64), b.astype(np.float64)
    out = (af + bf) / 2.0
    for d in np.unique(field.displacement):
        if d == 0:
            continue
        half = d / 2.0
        sa, va = sample_offset(af, -half * dy, -half * dx)
        sb, vb = sample_offset(bf, half * dy, half * dx)
        sel = (dmap == d) & va & vb
        out[sel] = (sa[sel] + sb[sel]) / 2.0
    return out


def interpolate_pair_shift(a: np.ndarray, b: np.ndarray, direction,
                           spec: InterpolatorSpec = InterpolatorSpec("shift")) -> np.ndarray:
    """Midpoint view from a pair, compensating block-wise displacement.

    Each output block averages ``a`` moved forward by half the block's
    displacement and ``b`` moved back by the other half; pixels whose
    samples leave the frame use the plain mean.
    """
    a, b = check_view(a, "a"), check_view(b, "b")
    _same_shape(a, b)
    if spec.kind != "shift":
        spec = InterpolatorSpec("shift", spec.block_size, spec.search_radius)
    return to_uint8(_pair_shift_float(a, b, direction, spec))


def opposing_pairs(positions: Sequence[tuple], target: tuple) -> list[tuple[int, int]]:
    """Split 4 source positions into index pairs mirrored about ``target``.

    Each pair is ordered so the second view lies down/right of the first.
    """
    pos = [ViewIndex(*p) for p in positions]
    t = ViewIndex(*target)
    if len(pos) != 4 or len(set(pos)) != 4:
        raise ValueError("quad interpolation needs 4 distinct source positions")
    pairs, used = [], set()
    for i, p in enumerate(pos):
        if i in used:
            continue
        mirror = ViewIndex(2 * t.u - p.u, 2 * t.v - p.v)
        if mirror not in pos:
            raise ValueError(f"source {p} has no mirror about {t}")
        j = pos.index(mirror)
        used.update((i, j))
        du, dv = pos[j].u - p.u, pos[j].v - p.v
        pairs.append((i, j) if (du > 0 or (du == 0 and dv > 0)) else (j, i))
    return pairs


def direction_between(a: tuple, b: tuple) -> tuple:
    du, dv = b[0] - a[0], b[1] - a[1]
    if du and dv and abs(du) != abs(dv):
        raise ValueError(f"{a} -> {b} is not an axis or diagonal baseline")
    return (int(np.sign(du)), int(np.sign(dv)))


def interpolate_quad(views: Sequence[np.ndarray], positions: Sequence[tuple], target: tuple,
                     spec: InterpolatorSpec = InterpolatorSpec()) -> np.ndarray:
    """Target view from four sources placed symmetrically around it.

    Linear: rounded mean of the four. Shift-compensated: rounded mean of the
    two opposing-pair interpolations (rounding applied once, at the end).
    """
    views = [check_view(v, f"source {i}") for i, v in enumerate(views)]
    if len(views) != 4:
        raise ValueError(f"quad interpolation needs 4 views, got {len(views)}")
    _same_shape(*views)
    pairs = opposing_pairs(positions, target)
    if spec.kind == "linear":
        return to_uint8(sum(v.astype(np.float64) for v in views) / 4.0)
    halves = [_pair_shift_float(views[i], views[j],
                                direction_between(positions[i], positions[j]), spec)
              for i, j in pairs]
    return to_uint8((halves[0] + halves[1]) / 2.0)


class _Substitutions(dict):
    def __missing__(self, key):
        if key in ("src3", "src4"):
            return ""
        raise KeyError(key)


def external_command(template: str, step, source_paths: Sequence, out_path) -> list[str]:
    """Expand the command template into an argv list.

    Placeholders: ``{src1}..{src4}``, ``{tu}``, ``{tv}``, ``{out}``. For pair
    steps, tokens consisting only of ``{src3}``/``{src4}`` are dropped.
    """
    subs = _Substitutions({f"src{i + 1}": str(p) for i, p in enumerate(source_paths)})
    subs.update(tu=str(step.target[0]), tv=str(step.target[1]), out=str(out_path))
    argv = []
    for tok in shlex.split(template):
        if tok in ("{src3}", "{src4}") and tok[1:-1] not in subs:
            continue
        try:
            argv.append(tok.format_map(subs))
        except KeyError as e:
            raise ValueError(f"unknown placeholder {e} in command template") from None
    return argv


def scratch_dir() -> Optional[str]:
    return os.environ.get("LFS_TMP") or None


def interpolate_external(step, source_paths: Sequence, spec: InterpolatorSpec,
                         out_path=None, step_id: Optional[str] = None,
                         expected_shape: Optional[tuple] = None) -> np.ndarray:
    """Run the external command for one step and read back its PNG."""
    from .lfio import read_png

    sid = step_id if step_id is not None else f"target {ViewIndex(*step.target)}"
    tmp = None
    if out_path is None:
        tmp = tempfile.TemporaryDirectory(prefix="lfsr-ext-", dir=scratch_dir())
        out_path = Path(tmp.name) / "out.png"
    try:
        argv = external_command(spec.command, step, source_paths, out_path)
        try:
            proc = subprocess.run(argv, capture_output=True, text=True, timeout=spec.timeout)
        except subprocess.TimeoutExpired as e:
            raise InterpolationError(f"external command timed out after {spec.timeout}s",
                                     step_id=sid, diagnostics=str(e.stderr or "")) from None
        except OSError as e:
            raise InterpolationError(f"cannot run external command: {e}", step_id=sid) from None
        if proc.returncode != 0:
            raise InterpolationError(
                f"external command exited with status {proc.returncode}: {proc.stderr.strip()}",
                step_id=sid, diagnostics=proc.stderr)
        if not Path(out_path).is_file():
            raise InterpolationError(f"external command produced no output at {out_path}",
                                     step_id=sid, diagnostics=proc.stderr)
        try:
            img = read_png(out_path)
        except Exception as e:
            raise InterpolationError(f"unreadable output: {e}", step_id=sid) from None
        if expected_shape is None:
            expected_shape = read_png(source_paths[0]).shape
        if img.shape != tuple(expected_shape):
            raise InterpolationError(
                f"output has shape {img.shape}, sources have {tuple(expected_shape)}",
                step_id=sid)
        return img
    finally:
        if tmp is not None:
            tmp.cleanup()


class Interpolator:
    """Dispatches a synthesis step to the interpolator selected by ``spec``."""

    def __init__(self, spec: InterpolatorSpec = InterpolatorSpec()):
        self.spec = spec
        n = spec.pool_size or os.cpu_count() or 1
        self._slots = threading.BoundedSemaphore(n)

    @property
    def name(self) -> str:
        return self.spec.name

    def synthesize(self, step, sources: Sequence[np.ndarray], step_id=None) -> np.ndarray:
        if len(sources) != len(step.sources):
            raise InterpolationError("source count does not match the step", step_id=step_id)
        if self.spec.kind == "external":
            return self._external(step, sources, step_id)
        if len(sources) == 4:
            return interpolate_quad(sources, step.sources, step.target, self.spec)
        a, b = sources
        if self.spec.kind == "linear":
            return interpolate_pair_linear(a, b)
        return interpolate_pair_shift(a, b, direction_between(*step.sources), self.spec)

    def _external(self, step, sources, step_id):
        from .lfio import write_png

        with self._slots, tempfile.TemporaryDirectory(prefix="lfsr-ext-", dir=scratch_dir()) as d:
            paths = [write_png(Path(d) / f"src{i + 1}.png", img) for i, img in enumerate(sources)]
            return interpolate_external(step, paths, self.spec, out_path=Path(d) / "out.png",
                                        step_id=step_id, expected_shape=sources[0].shape)
