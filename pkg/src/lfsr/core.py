"""4D light field container, view addressing and EPI slicing.

Views are ``uint8`` arrays of shape ``(height, width, 3)``. A light field
is a ``rows x cols`` grid of optional views indexed by angular ``(u, v)``:
``u`` is the angular row, ``v`` the angular column.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping, NamedTuple, Optional, Sequence

import numpy as np

from .errors import DimensionError, EmptySlotError, ViewIndexError


class ViewIndex(NamedTuple):
    u: int
    v: int

    def __str__(self):
        return f"({self.u},{self.v})"


def round_half_away(x: np.ndarray) -> np.ndarray:
    """Round to nearest integer, ties away from zero."""
    x = np.asarray(x, dtype=np.float64)
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def to_uint8(x: np.ndarray) -> np.ndarray:
    """Round a float accumulator and clip it into the 8-bit range."""
    return np.clip(round_half_away(x), 0, 255).astype(np.uint8)


def check_view(img, name="view") -> np.ndarray:
    arr = np.asarray(img)
    if arr.dtype != np.uint8:
        raise DimensionError(f"{name}: expected uint8 samples, got {arr.dtype}")
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise DimensionError(f"{name}: expected (H, W, 3) RGB, got shape {arr.shape}")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise DimensionError(f"{name}: empty image")
    return arr


class LightField:
    """Dense ``rows x cols`` grid of optional RGB views.

    Immutable after construction: stored arrays are private read-only
    copies, so concurrent readers are safe.
    """

    def __init__(self, rows: int, cols: int,
                 views: Optional[Mapping[tuple, np.ndarray]] = None):
        if rows < 2 or cols < 2:
            raise DimensionError(f"angular grid must be at least 2x2, got {rows}x{cols}")
        self.rows = int(rows)
        self.cols = int(cols)
        self._views: dict[ViewIndex, np.ndarray] = {}
        shape = None
        for key, img in (views or {}).items():
            idx = self._check_index(key)
            arr = check_view(img, name=f"view {idx}")
            if shape is None:
                shape = arr.shape
            elif arr.shape != shape:
                raise DimensionError(
                    f"view {idx} has shape {arr.shape}, expected {shape}")
            arr = np.array(arr, dtype=np.uint8, copy=True)
            arr.setflags(write=False)
            self._views[idx] = arr
        self._shape = shape

    @classmethod
    def from_array(cls, data: np.ndarray) -> "LightField":
        """Build a complete light field from a ``(rows, cols, H, W, 3)`` array."""
        data = np.asarray(data)
        if data.ndim != 5:
            raise DimensionError(f"expected a 5D array, got shape {data.shape}")
        rows, cols = data.shape[:2]
        return cls(rows, cols, {(u, v): data[u, v]
                                for u in range(rows) for v in range(cols)})

    def to_array(self) -> np.ndarray:
        missing = self.empty_slots()
        if missing:
            raise EmptySlotError(f"light field incomplete, empty slots: {missing}")
        return np.stack([np.stack([self._views[ViewIndex(u, v)]
                                   for v in range(self.cols)])
                         for u in range(self.rows)])

    def _check_index(self, key) -> ViewIndex:
        u, v = (int(k) for k in key)
        if not (0 <= u < self.rows and 0 <= v < self.cols):
            raise ViewIndexError(
                f"view index ({u},{v}) out of range for {self.rows}x{self.cols} grid")
        return ViewIndex(u, v)

    @property
    def height(self) -> Optional[int]:
        return None if self._shape is None else self._shape[0]

    @property
    def width(self) -> Optional[int]:
        return None if self._shape is None else self._shape[1]

    @property
    def view_shape(self):
        return self._shape

    def __contains__(self, key) -> bool:
        try:
            return self._check_index(key) in self._views
        except ViewIndexError:
            return False

    def __getitem__(self, key) -> np.ndarray:
        return get_view(self, key)

    def indices(self) -> Iterator[ViewIndex]:
        """All grid positions, row-major."""
        for u in range(self.rows):
            for v in range(self.cols):
                yield ViewIndex(u, v)

    def populated(self) -> list[ViewIndex]:
        return [idx for idx in self.indices() if idx in self._views]

    def empty_slots(self) -> list[ViewIndex]:
        return [idx for idx in self.indices() if idx not in self._views]

    @property
    def is_complete(self) -> bool:
        return len(self._views) == self.rows * self.cols

    def with_views(self, updates: Mapping[tuple, np.ndarray]) -> "LightField":
        merged = dict(self._views)
        merged.update({ViewIndex(*k): v for k, v in updates.items()})
        return LightField(self.rows, self.cols, merged)

    def restricted(self, keep: Sequence[tuple]) -> "LightField":
        keep = {ViewIndex(*k) for k in keep}
        return LightField(self.rows, self.cols,
                          {k: v for k, v in self._views.items() if k in keep})

    def transpose(self) -> "LightField":
        """Swap angular axes and spatial axes together."""
        return LightField(self.cols, self.rows,
                          {(v, u): img.transpose(1, 0, 2)
                           for (u, v), img in self._views.items()})

    def __eq__(self, other):
        if not isinstance(other, LightField):
            return NotImplemented
        if (self.rows, self.cols) != (other.rows, other.cols):
            return False
        if self._views.keys() != other._views.keys():
            return False
        return all(np.array_equal(img, other._views[k])
                   for k, img in self._views.items())

    __hash__ = None

    def __repr__(self):
        return (f"LightField({self.rows}x{self.cols}, view_shape={self._shape}, "
                f"populated={len(self._views)})")


def get_view(lf: LightField, idx) -> np.ndarray:
    """Return the stored (read-only) image at ``idx``."""
    key = lf._check_index(idx)
    try:
        return lf._views[key]
    except KeyError:
        raise EmptySlotError(f"view {key} is empty") from None


@dataclass(frozen=True)
class EpiImage:
    orientation: str  # "horizontal" | "vertical"
    fixed_angular: int
    fixed_spatial: int
    pixels: np.ndarray  # (angular extent, spatial extent, 3)


def extract_epi(lf: LightField, orientation: str, fixed_angular: int,
                fixed_spatial: int) -> EpiImage:
    """Slice the light field at one angular and one spatial coordinate.

    A horizontal EPI fixes angular row ``fixed_angular`` and spatial row
    ``fixed_spatial``; row ``k`` of the result is that spatial row of view
    ``(fixed_angular, k)``. A vertical EPI fixes angular column and spatial
    column; row ``k`` is the spatial column of view ``(k, fixed_angular)``.
    """
    if orientation == "horizontal":
        if not 0 <= fixed_angular < lf.rows:
            raise ViewIndexError(f"angular row {fixed_angular} out of range")
        line = [ViewIndex(fixed_angular, k) for k in range(lf.cols)]
        extent = lf.height
    elif orientation == "vertical":
        if not 0 <= fixed_angular < lf.cols:
            raise ViewIndexError(f"angular column {fixed_angular} out of range")
        line = [ViewIndex(k, fixed_angular) for k in range(lf.rows)]
        extent = lf.width
    else:
        raise ValueError(f"unknown EPI orientation {orientation!r}")
    missing = [idx for idx in line if idx not in lf]
    if missing:
        raise EmptySlotError(f"missing views along the EPI scan line: {missing}")
    if not 0 <= fixed_spatial < extent:
        raise ViewIndexError(f"spatial index {fixed_spatial} out of range [0, {extent})")
    if orientation == "horizontal":
        px = np.stack([lf[idx][fixed_spatial, :, :] for idx in line])
    else:
        px = np.stack([lf[idx][:, fixed_spatial, :] for idx in line])
    px.setflags(write=False)
    return EpiImage(orientation, fixed_angular, fixed_spatial, px)
