"""PSNR / SSIM on RGB views and light-field level aggregation."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .core import LightField, ViewIndex, check_view
from .errors import DimensionError, MetricsError
from .sampling import ViewMask, ViewRole

MAX_VALUE = 255.0
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def _pair(a, b):
    a, b = check_view(a, "a"), check_view(b, "b")
    if a.shape != b.shape:
        raise DimensionError(f"image shapes differ: {a.shape} vs {b.shape}")
    return a, b


def mse(a: np.ndarray, b: np.ndarray) -> float:
    a, b = _pair(a, b)
    d = a.astype(np.int64) - b.astype(np.int64)
    # integer sum keeps the zero test exact
    return float(np.sum(d * d)) / d.size


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """PSNR in dB with MSE pooled over all pixels and channels; ``inf`` if equal."""
    m = mse(a, b)
    if m == 0.0:
        return math.inf
    return 10.0 * math.log10(MAX_VALUE ** 2 / m)


def gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    x = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(x ** 2) / (2 * sigma ** 2))
    return g / g.sum()


def _filter_valid(x: np.ndarray, g: np.ndarray) -> np.ndarray:
    n = len(g)
    x = sliding_window_view(x, n, axis=0) @ g
    return sliding_window_view(x, n, axis=1) @ g


def ssim_map(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Single-channel SSIM over every fully-inside window position."""
    g = gaussian_window()
    c1 = (SSIM_K1 * MAX_VALUE) ** 2
    c2 = (SSIM_K2 * MAX_VALUE) ** 2
    x = x.astype(np.float64)
    y = y.astype(np.float64)
    mx, my = _filter_valid(x, g), _filter_valid(y, g)
    sxx = _filter_valid(x * x, g) - mx * mx
    syy = _filter_valid(y * y, g) - my * my
    sxy = _filter_valid(x * y, g) - mx * my
    num = (2 * mx * my + c1) * (2 * sxy + c2)
    den = (mx * mx + my * my + c1) * (sxx + syy + c2)
    return num / den


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Gaussian-window SSIM (11x11, sigma 1.5), averaged over RGB channels."""
    a, b = _pair(a, b)
    if min(a.shape[:2]) < SSIM_WINDOW:
        raise MetricsError(f"image {a.shape[1]}x{a.shape[0]} smaller than the "
                           f"{SSIM_WINDOW}x{SSIM_WINDOW} SSIM window")
    if np.array_equal(a, b):
        return 1.0
    return float(np.mean([ssim_map(a[..., c], b[..., c]).mean() for c in range(3)]))


class EvalMode(enum.Enum):
    SYNTHESIZED = "synth"
    ALL = "all"
    CENTRAL = "central"


@dataclass(frozen=True)
class ViewScore:
    view: ViewIndex
    psnr_db: float
    ssim: float


@dataclass(frozen=True)
class Aggregate:
    mean_psnr_db: float
    mean_ssim: float
    n_views: int
    n_inf_excluded: int

    def as_dict(self) -> dict:
        return {"mean_psnr_db": self.mean_psnr_db, "mean_ssim": self.mean_ssim,
                "n_views": self.n_views, "n_inf_excluded": self.n_inf_excluded}


def aggregate(scores) -> Aggregate:
    """Means over ``scores``; infinite PSNRs are excluded and counted.

    If every PSNR is infinite the mean PSNR is reported as infinite.
    """
    scores = list(scores)
    if not scores:
        return Aggregate(math.nan, math.nan, 0, 0)
    finite = [s.psnr_db for s in scores if not math.isinf(s.psnr_db)]
    n_inf = len(scores) - len(finite)
    mean_p = math.fsum(finite) / len(finite) if finite else math.inf
    mean_s = math.fsum(s.ssim for s in scores) / len(scores)
    return Aggregate(mean_p, mean_s, len(scores), n_inf)


@dataclass
class MetricsReport:
    mode: EvalMode
    scores: list  # ViewScore for the selected views, sorted by index
    aggregates: dict  # EvalMode.value -> Aggregate
    strategy: str = ""
    interpolator: str = ""
    level: Optional[int] = None

    @property
    def summary(self) -> Aggregate:
        return self.aggregates[self.mode.value]


def central_view(rows: int, cols: int) -> ViewIndex:
    return ViewIndex(rows // 2, cols // 2)


def selected_views(mask: ViewMask, mode: EvalMode) -> list[ViewIndex]:
    mode = EvalMode(mode)
    if mode is EvalMode.SYNTHESIZED:
        return mask.outputs
    if mode is EvalMode.CENTRAL:
        return [central_view(mask.rows, mask.cols)]
    return [ViewIndex(u, v) for u in range(mask.rows) for v in range(mask.cols)
            if mask[u, v] is not ViewRole.UNUSED]


def score_reconstruction(reconstructed: LightField, ground_truth: LightField, mask: ViewMask,
                         mode: EvalMode = EvalMode.SYNTHESIZED, strategy: str = "",
                         interpolator: str = "", level: Optional[int] = None) -> MetricsReport:
    """Score a reconstruction against ground truth on the views ``mode`` selects.

    All three aggregates are always computed; ``scores`` holds only the
    selected views.
    """
    mode = EvalMode(mode)
    dims = {(lf.rows, lf.cols) for lf in (reconstructed, ground_truth)} | {(mask.rows, mask.cols)}
    if len(dims) != 1:
        raise DimensionError(f"grid dimensions disagree: {sorted(dims)}")
    if reconstructed.view_shape != ground_truth.view_shape:
        raise DimensionError(f"view shapes differ: {reconstructed.view_shape} vs "
                             f"{ground_truth.view_shape}")
    sets = {m.value: selected_views(mask, m) for m in EvalMode}
    needed = sorted(set().union(*sets.values()))
    missing = [idx for idx in needed if idx not in reconstructed]
    if missing:
        raise MetricsError(f"reconstruction incomplete, missing views: {missing}")
    gt_missing = [idx for idx in needed if idx not in ground_truth]
    if gt_missing:
        raise MetricsError(f"ground truth missing views: {gt_missing}")
    table = {idx: ViewScore(idx, psnr(reconstructed[idx], ground_truth[idx]),
                            ssim(reconstructed[idx], ground_truth[idx]))
             for idx in needed}
    aggs = {name: aggregate(table[i] for i in views) for name, views in sets.items()}
    return MetricsReport(mode, [table[i] for i in sorted(sets[mode.value])], aggs,
                         strategy, interpolator, level)
