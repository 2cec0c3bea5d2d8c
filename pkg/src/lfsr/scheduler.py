"""Staged reconstruction plans.

A plan is an ordered list of stages; each stage is a set of independent
synthesis steps, and each step builds one target view at the angular
midpoint of its 2 or 4 source views. Steps inside a stage may run in any
order (or concurrently); stages run strictly in sequence.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from .core import LightField, ViewIndex
from .errors import InterpolationError, LFError, PatternError, PlanError
from .sampling import Pattern, ViewMask, ViewRole, generate_pattern


class InterpMode(enum.Enum):
    PAIR_HORIZONTAL = "PairHorizontal"
    PAIR_VERTICAL = "PairVertical"
    PAIR_DIAGONAL_TLBR = "PairDiagonalTLBR"
    PAIR_DIAGONAL_TRBL = "PairDiagonalTRBL"
    QUAD = "Quad"

    @property
    def n_sources(self) -> int:
        return 4 if self is InterpMode.QUAD else 2


# angular direction from the first to the second source of a pair
PAIR_DIRECTIONS = {
    InterpMode.PAIR_HORIZONTAL: (0, 1),
    InterpMode.PAIR_VERTICAL: (1, 0),
    InterpMode.PAIR_DIAGONAL_TLBR: (1, 1),
    InterpMode.PAIR_DIAGONAL_TRBL: (1, -1),
}


class CornerStrategy(enum.Enum):
    HV = "hv"
    VH = "vh"
    OMNI = "omni"
    DIAG4 = "diag4"
    LDIAG = "ldiag"
    RDIAG = "rdiag"


DEFAULT_INNER = CornerStrategy.HV


@dataclass(frozen=True)
class SynthesisStep:
    target: ViewIndex
    sources: tuple
    mode: InterpMode
    t: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "target", ViewIndex(*self.target))
        object.__setattr__(self, "sources", tuple(ViewIndex(*s) for s in self.sources))


@dataclass(frozen=True)
class Stage:
    steps: tuple
    # block spacing of the halving pass that emitted this stage (0 for basic plans)
    spacing: int = 0

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))


@dataclass(frozen=True)
class ReconstructionPlan:
    strategy: str
    mask: ViewMask
    stages: tuple

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))

    def iter_steps(self) -> Iterator[tuple[str, SynthesisStep]]:
        for si, stage in enumerate(self.stages, start=1):
            for i, step in enumerate(stage.steps):
                yield step_id(si, i), step

    @property
    def n_steps(self) -> int:
        return sum(len(s.steps) for s in self.stages)

    @property
    def targets(self) -> list[ViewIndex]:
        return [step.target for _, step in self.iter_steps()]

    @property
    def passes(self) -> int:
        """Number of halving passes (distinct block spacings)."""
        return len({s.spacing for s in self.stages if s.spacing})


def step_id(stage_no: int, index: int) -> str:
    return f"{stage_no}:{index}"


@dataclass(frozen=True)
class Block:
    """Square block with corners ``(u0, v0)`` and ``(u0 + span, v0 + span)``."""

    u0: int
    v0: int
    span: int

    def __post_init__(self):
        if self.span <= 0 or self.span % 2:
            raise PlanError(f"block span must be a positive even number, got {self.span}")
        if self.u0 < 0 or self.v0 < 0:
            raise PlanError("block origin must be non-negative")

    @classmethod
    def from_views(cls, views: Iterable[tuple]) -> "Block":
        views = {ViewIndex(*x) for x in views}
        us = sorted({x.u for x in views})
        vs = sorted({x.v for x in views})
        if len(us) != 3 or len(vs) != 3 or len(views) != 9:
            raise PlanError("a corner block needs exactly 3x3 views")
        du, dv = us[1] - us[0], vs[1] - vs[0]
        if us[2] - us[1] != du or vs[2] - vs[1] != dv:
            raise PlanError("block views must be evenly spaced")
        if du != dv:
            raise PlanError(f"non-square block: spacing {du} x {dv}")
        return cls(us[0], vs[0], 2 * du)

    @property
    def corners(self) -> tuple:
        s = self.span
        return (ViewIndex(self.u0, self.v0), ViewIndex(self.u0, self.v0 + s),
                ViewIndex(self.u0 + s, self.v0), ViewIndex(self.u0 + s, self.v0 + s))

    @property
    def center(self) -> ViewIndex:
        h = self.span // 2
        return ViewIndex(self.u0 + h, self.v0 + h)


def corner_stages(strategy: CornerStrategy, block: Block) -> list[list[SynthesisStep]]:
    """Two stages of steps completing the 3x3 midpoint views of ``block``."""
    strategy = CornerStrategy(strategy)
    u0, v0, s = block.u0, block.v0, block.span
    h = s // 2
    TL, TR, BL, BR = block.corners
    TM, BM = ViewIndex(u0, v0 + h), ViewIndex(u0 + s, v0 + h)
    LM, RM = ViewIndex(u0 + h, v0), ViewIndex(u0 + h, v0 + s)
    C = block.center
    H, V = InterpMode.PAIR_HORIZONTAL, InterpMode.PAIR_VERTICAL
    tm = SynthesisStep(TM, (TL, TR), H)
    bm = SynthesisStep(BM, (BL, BR), H)
    lm = SynthesisStep(LM, (TL, BL), V)
    rm = SynthesisStep(RM, (TR, BR), V)
    edges = [tm, bm, lm, rm]
    if strategy is CornerStrategy.HV:
        return [[tm, bm], [lm, rm, SynthesisStep(C, (TM, BM), V)]]
    if strategy is CornerStrategy.VH:
        return [[lm, rm], [tm, bm, SynthesisStep(C, (LM, RM), H)]]
    if strategy is CornerStrategy.OMNI:
        return [edges, [SynthesisStep(C, (TM, BM, LM, RM), InterpMode.QUAD)]]
    if strategy is CornerStrategy.DIAG4:
        return [[SynthesisStep(C, (TL, TR, BL, BR), InterpMode.QUAD)], edges]
    if strategy is CornerStrategy.LDIAG:
        return [[SynthesisStep(C, (TL, BR), InterpMode.PAIR_DIAGONAL_TLBR)], edges]
    return [[SynthesisStep(C, (TR, BL), InterpMode.PAIR_DIAGONAL_TRBL)], edges]


def build_basic_plan(kind: Pattern, mask: ViewMask) -> ReconstructionPlan:
    """One-stage plan for the row-wise, column-wise or checkerboard pattern."""
    kind = Pattern(kind)
    if not kind.is_basic:
        raise PlanError(f"{kind.value} is not a basic pattern")
    try:
        expected = generate_pattern(kind, mask.rows, mask.cols)
    except PatternError as e:
        raise PlanError(f"mask does not match {kind.value}: {e}") from e
    if expected != mask:
        raise PlanError(f"mask does not match the {kind.value} pattern")
    H, V = InterpMode.PAIR_HORIZONTAL, InterpMode.PAIR_VERTICAL
    last_u, last_v = mask.rows - 1, mask.cols - 1
    steps = []
    for u, v in mask.outputs:
        if kind is Pattern.ROW_WISE:
            steps.append(SynthesisStep((u, v), ((u - 1, v), (u + 1, v)), V))
        elif kind is Pattern.COLUMN_WISE:
            steps.append(SynthesisStep((u, v), ((u, v - 1), (u, v + 1)), H))
        elif u in (0, last_u):
            steps.append(SynthesisStep((u, v), ((u, v - 1), (u, v + 1)), H))
        elif v in (0, last_v):
            steps.append(SynthesisStep((u, v), ((u - 1, v), (u + 1, v)), V))
        else:
            steps.append(SynthesisStep(
                (u, v), ((u - 1, v), (u + 1, v), (u, v - 1), (u, v + 1)), InterpMode.QUAD))
    return ReconstructionPlan(kind.value, mask, [Stage(steps)])


def corner_mask(block: Block) -> ViewMask:
    """Smallest mask holding ``block``: corners input, midpoints output."""
    rows, cols = block.u0 + block.span + 1, block.v0 + block.span + 1
    corners = set(block.corners)
    h = block.span // 2
    mids = {(block.u0 + a * h, block.v0 + b * h) for a in range(3) for b in range(3)} - corners

    def role(u, v):
        if (u, v) in corners:
            return ViewRole.INPUT
        return ViewRole.OUTPUT if (u, v) in mids else ViewRole.UNUSED

    return ViewMask.from_function(rows, cols, role)


def build_corner_plan(strategy: CornerStrategy, block: Block,
                      mask: Optional[ViewMask] = None) -> ReconstructionPlan:
    """Plan filling the 3x3 block of views spanned by four input corners."""
    strategy = CornerStrategy(strategy)
    if not isinstance(block, Block):
        block = Block.from_views(block)
    if mask is None:
        mask = corner_mask(block)
    far = ViewIndex(block.u0 + block.span, block.v0 + block.span)
    if far.u >= mask.rows or far.v >= mask.cols:
        raise PlanError(f"block {block} does not fit a {mask.rows}x{mask.cols} mask")
    missing = [c for c in block.corners if mask[c] is not ViewRole.INPUT]
    if missing:
        raise PlanError(f"block corners are not input views: {missing}")
    stages = [Stage(steps, spacing=block.span) for steps in corner_stages(strategy, block)]
    return ReconstructionPlan(f"corner-{strategy.value}", mask, stages)


def build_recursive_plan(level: int, inner: CornerStrategy = DEFAULT_INNER,
                         rows: int = 9, cols: int = 9) -> ReconstructionPlan:
    """Complete a grid-level ``level`` sampling by repeated halving.

    Pass ``s = 2**level, ..., 2`` fills the midpoints of every ``s``-spaced
    block with the inner corner strategy. Blocks of one pass share its
    stages; a view on an edge shared by two blocks is scheduled once, by the
    first block in row-major order.
    """
    inner = CornerStrategy(inner)
    try:
        mask = generate_pattern(Pattern.grid(level), rows, cols)
    except PatternError as e:
        raise PlanError(str(e)) from e
    stages = []
    seen: set[ViewIndex] = set()
    s = 2 ** level
    while s >= 2:
        pass_stages: list[list[SynthesisStep]] = [[], []]
        for u0 in range(0, rows - 1, s):
            for v0 in range(0, cols - 1, s):
                for k, steps in enumerate(corner_stages(inner, Block(u0, v0, s))):
                    for step in steps:
                        if step.target not in seen:
                            seen.add(step.target)
                            pass_stages[k].append(step)
        stages.extend(Stage(steps, spacing=s) for steps in pass_stages if steps)
        s //= 2
    return ReconstructionPlan(f"recursive-l{level}-{inner.value}", mask, stages)


def build_plan(pattern: Pattern, rows: int, cols: int,
               inner: CornerStrategy = DEFAULT_INNER) -> ReconstructionPlan:
    """Plan for any generated pattern; ``inner`` applies to grid levels only."""
    pattern = Pattern(pattern)
    if pattern.is_basic:
        return build_basic_plan(pattern, generate_pattern(pattern, rows, cols))
    return build_recursive_plan(pattern.level, inner, rows, cols)


@dataclass(frozen=True)
class Violation:
    check: str  # coverage | availability | geometry | independence
    step: Optional[str]
    message: str

    def __str__(self):
        where = f"step {self.step}: " if self.step else ""
        return f"[{self.check}] {where}{self.message}"


def _geometry_error(step: SynthesisStep) -> Optional[str]:
    mode, srcs, t = step.mode, step.sources, step.target
    if len(srcs) != mode.n_sources:
        return f"{mode.value} needs {mode.n_sources} sources, got {len(srcs)}"
    if t in srcs:
        return "target is one of its own sources"
    if len(set(srcs)) != len(srcs):
        return "duplicate sources"
    if step.t != 0.5:
        return f"interpolation position must be 0.5, got {step.t}"
    if mode is InterpMode.QUAD:
        mirrored = {ViewIndex(2 * t.u - s.u, 2 * t.v - s.v) for s in srcs}
        if mirrored != set(srcs):
            return "quad sources are not symmetric about the target"
        a, c = srcs[0], next(x for x in srcs[1:] if x != ViewIndex(2 * t.u - srcs[0].u, 2 * t.v - srcs[0].v))
        da, dc = (a.u - t.u, a.v - t.v), (c.u - t.u, c.v - t.v)
        if da[0] * dc[1] - da[1] * dc[0] == 0:
            return "quad opposing pairs are collinear"
        return None
    a, b = srcs
    if (a.u + b.u, a.v + b.v) != (2 * t.u, 2 * t.v):
        return f"target {t} is not the midpoint of {a} and {b}"
    du, dv = b.u - a.u, b.v - a.v
    ddu, ddv = PAIR_DIRECTIONS[mode]
    k = du if ddu else dv * ddv
    if k <= 0 or (du, dv) != (k * ddu, k * ddv):
        return f"sources {a}->{b} do not lie along the {mode.value} direction"
    return None


def validate_plan(plan: ReconstructionPlan) -> list[Violation]:
    """Audit a plan; an empty list means the plan is sound."""
    mask = plan.mask
    out: list[Violation] = []
    available = set(mask.inputs)
    first_target: dict[ViewIndex, str] = {}

    def in_grid(x):
        return 0 <= x.u < mask.rows and 0 <= x.v < mask.cols

    for si, stage in enumerate(plan.stages, start=1):
        stage_targets: dict[ViewIndex, str] = {}
        for i, step in enumerate(stage.steps):
            sid = step_id(si, i)
            if step.target in stage_targets:
                out.append(Violation("independence", sid,
                                     f"target {step.target} also built by step {stage_targets[step.target]}"))
            else:
                stage_targets[step.target] = sid
        for i, step in enumerate(stage.steps):
            sid = step_id(si, i)
            t = step.target
            if not in_grid(t):
                out.append(Violation("coverage", sid, f"target {t} outside the grid"))
            elif mask[t] is not ViewRole.OUTPUT:
                out.append(Violation("coverage", sid, f"target {t} is a {mask[t].name.lower()} view"))
            if t in first_target:
                out.append(Violation("coverage", sid, f"view {t} already targeted by step {first_target[t]}"))
            first_target.setdefault(t, sid)
            for s in step.sources:
                if s in stage_targets:
                    out.append(Violation("independence", sid,
                                         f"source {s} is built in the same stage by step {stage_targets[s]}"))
                elif s not in available:
                    out.append(Violation("availability", sid, f"source {s} not available yet"))
            err = _geometry_error(step)
            if err:
                out.append(Violation("geometry", sid, err))
        available.update(stage_targets)
    for t in mask.outputs:
        if t not in first_target:
            out.append(Violation("coverage", None, f"output view {t} never targeted"))
    return out


def execute_plan(sparse_lf: LightField, plan: ReconstructionPlan, interpolator,
                 jobs: int = 1) -> LightField:
    """Run ``plan`` on ``sparse_lf`` and return the completed light field.

    ``interpolator`` must provide ``synthesize(step, sources, step_id=None)``.
    Output is bit-identical for any ``jobs``.
    """
    mask = plan.mask
    if (sparse_lf.rows, sparse_lf.cols) != (mask.rows, mask.cols):
        raise PlanError(f"light field is {sparse_lf.rows}x{sparse_lf.cols}, "
                        f"plan mask is {mask.rows}x{mask.cols}")
    if set(sparse_lf.populated()) != set(mask.inputs):
        raise PlanError("sparse light field must be populated exactly at the mask's input views")
    problems = validate_plan(plan)
    if problems:
        raise PlanError("invalid plan: " + "; ".join(map(str, problems[:5])))

    views = {idx: sparse_lf[idx] for idx in sparse_lf.populated()}

    def run(sid, step):
        srcs = [views[s] for s in step.sources]
        try:
            return interpolator.synthesize(step, srcs, step_id=sid)
        except InterpolationError as e:
            if e.step_id is None:
                raise InterpolationError(str(e), step_id=sid, diagnostics=e.diagnostics) from e
            raise
        except LFError as e:
            raise InterpolationError(str(e), step_id=sid) from e

    pool = ThreadPoolExecutor(max_workers=jobs) if jobs > 1 else None
    try:
        for si, stage in enumerate(plan.stages, start=1):
            ids = [step_id(si, i) for i in range(len(stage.steps))]
            if pool is None:
                results = [run(sid, st) for sid, st in zip(ids, stage.steps)]
            else:
                results = list(pool.map(run, ids, stage.steps))
            for step, img in zip(stage.steps, results):
                views[step.target] = np.asarray(img)
    finally:
        if pool is not None:
            pool.shutdown()
    return LightField(sparse_lf.rows, sparse_lf.cols, views)
