"""Angular sampling patterns and the input ratio they imply."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

from .core import LightField, ViewIndex
from .errors import DimensionError, PatternError


class ViewRole(enum.Enum):
    INPUT = "I"
    OUTPUT = "O"
    UNUSED = "U"


class Pattern(enum.Enum):
    ROW_WISE = "row"
    COLUMN_WISE = "col"
    CHECKERBOARD = "checker"
    LEVEL1 = "level1"
    LEVEL2 = "level2"
    LEVEL3 = "level3"

    @property
    def level(self) -> Optional[int]:
        if self.value.startswith("level"):
            return int(self.value[-1])
        return None

    @property
    def is_basic(self) -> bool:
        return self.level is None

    @classmethod
    def grid(cls, k: int) -> "Pattern":
        try:
            return cls(f"level{k}")
        except ValueError:
            raise PatternError(f"grid level must be 1, 2 or 3, got {k}") from None


@dataclass(frozen=True)
class ViewMask:
    roles: tuple  # rows x cols nested tuples of ViewRole

    def __post_init__(self):
        roles = tuple(tuple(ViewRole(r) for r in row) for row in self.roles)
        object.__setattr__(self, "roles", roles)
        if len(roles) < 2 or len({len(r) for r in roles}) != 1 or len(roles[0]) < 2:
            raise PatternError("mask must be a rectangular grid of at least 2x2")
        if self.n_input < 2:
            raise PatternError(f"mask needs at least 2 input views, has {self.n_input}")

    @classmethod
    def from_function(cls, rows: int, cols: int, role_of) -> "ViewMask":
        return cls(tuple(tuple(role_of(u, v) for v in range(cols)) for u in range(rows)))

    @property
    def rows(self) -> int:
        return len(self.roles)

    @property
    def cols(self) -> int:
        return len(self.roles[0])

    def __getitem__(self, idx) -> ViewRole:
        u, v = idx
        return self.roles[u][v]

    def positions(self, role: ViewRole) -> list[ViewIndex]:
        return [ViewIndex(u, v) for u in range(self.rows) for v in range(self.cols)
                if self.roles[u][v] is role]

    @property
    def inputs(self) -> list[ViewIndex]:
        return self.positions(ViewRole.INPUT)

    @property
    def outputs(self) -> list[ViewIndex]:
        return self.positions(ViewRole.OUTPUT)

    @property
    def n_input(self) -> int:
        return sum(r is ViewRole.INPUT for row in self.roles for r in row)

    @property
    def n_output(self) -> int:
        return sum(r is ViewRole.OUTPUT for row in self.roles for r in row)

    def transpose(self) -> "ViewMask":
        return ViewMask(tuple(zip(*self.roles)))

    def __str__(self):
        return "\n".join("".join(r.value for r in row) for row in self.roles)


def _require_odd(n: int, what: str, pattern: Pattern):
    if n < 3 or n % 2 == 0:
        raise PatternError(f"{pattern.value}: {what} must be odd and >= 3, got {n}")


def generate_pattern(kind: Pattern, rows: int, cols: int) -> ViewMask:
    """Input/output mask for one of the generated sampling patterns.

    Generated masks never contain unused views.
    """
    kind = Pattern(kind)
    if rows < 2 or cols < 2:
        raise PatternError(f"grid must be at least 2x2, got {rows}x{cols}")
    I, O = ViewRole.INPUT, ViewRole.OUTPUT
    if kind is Pattern.ROW_WISE:
        _require_odd(rows, "rows", kind)
        return ViewMask.from_function(rows, cols, lambda u, v: I if u % 2 == 0 else O)
    if kind is Pattern.COLUMN_WISE:
        _require_odd(cols, "cols", kind)
        return ViewMask.from_function(rows, cols, lambda u, v: I if v % 2 == 0 else O)
    if kind is Pattern.CHECKERBOARD:
        _require_odd(rows, "rows", kind)
        _require_odd(cols, "cols", kind)
        return ViewMask.from_function(rows, cols, lambda u, v: I if (u + v) % 2 == 0 else O)
    step = 2 ** kind.level
    if (rows - 1) % step or (cols - 1) % step:
        raise PatternError(
            f"{kind.value}: (rows-1) and (cols-1) must be divisible by {step}, "
            f"got {rows}x{cols}")
    return ViewMask.from_function(
        rows, cols, lambda u, v: I if u % step == 0 and v % step == 0 else O)


def compute_input_ratio(mask: ViewMask) -> Fraction:
    """``N_in / (N_in + N_out)``; unused views count toward neither."""
    n_in, n_out = mask.n_input, mask.n_output
    if n_in == 0:
        raise PatternError("mask has no input views")
    return Fraction(n_in, n_in + n_out)


def format_ratio(ir: Fraction) -> str:
    return f"{100 * float(ir):.1f}%"


def subsample(lf: LightField, mask: ViewMask) -> LightField:
    """Keep only the views at input positions of ``mask``."""
    if (lf.rows, lf.cols) != (mask.rows, mask.cols):
        raise DimensionError(
            f"mask is {mask.rows}x{mask.cols} but light field is {lf.rows}x{lf.cols}")
    if not lf.is_complete:
        raise DimensionError(f"light field incomplete, empty slots: {lf.empty_slots()}")
    return lf.restricted(mask.inputs)


def identify_pattern(mask: ViewMask) -> Optional[Pattern]:
    """The generated pattern that produces exactly ``mask``, if any."""
    for kind in Pattern:
        try:
            if generate_pattern(kind, mask.rows, mask.cols) == mask:
                return kind
        except PatternError:
            continue
    return None


def valid_patterns(rows: int, cols: int, kinds: Iterable[Pattern] = tuple(Pattern)):
    out = []
    for kind in kinds:
        try:
            generate_pattern(kind, rows, cols)
        except PatternError:
            continue
        out.append(kind)
    return out
