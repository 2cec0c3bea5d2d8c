import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis.extra.numpy import arrays

from lfsr.core import LightField
from lfsr.errors import DimensionError, MetricsError
from lfsr.metrics import (EvalMode, ViewScore, aggregate, central_view, psnr,
                          score_reconstruction, ssim)
from lfsr.sampling import Pattern, generate_pattern

from .helpers import random_view

C1 = (0.01 * 255) ** 2
C2 = (0.03 * 255) ** 2


def reference_ssim(a, b):
    """Per-window loop: weighted moments of every 11x11 window, then the SSIM formula."""
    x = np.arange(11) - 5.0
    g = np.exp(-x ** 2 / (2 * 1.5 ** 2))
    w = np.outer(g, g) / np.outer(g, g).sum()
    chans = []
    for c in range(3):
        A, B = a[..., c].astype(float), b[..., c].astype(float)
        vals = []
        for i in range(A.shape[0] - 10):
            for j in range(A.shape[1] - 10):
                pa, pb = A[i:i + 11, j:j + 11], B[i:i + 11, j:j + 11]
                ma, mb = (w * pa).sum(), (w * pb).sum()
                va = (w * (pa - ma) ** 2).sum()
                vb = (w * (pb - mb) ** 2).sum()
                cov = (w * (pa - ma) * (pb - mb)).sum()
                vals.append((2 * ma * mb + C1) * (2 * cov + C2)
                            / ((ma ** 2 + mb ** 2 + C1) * (va + vb + C2)))
        chans.append(np.mean(vals))
    return float(np.mean(chans))


def test_psnr_known_values(rng):
    a = random_view(rng).clip(0, 254)
    assert psnr(a, a) == math.inf
    assert psnr(a, a + 1) == pytest.approx(10 * math.log10(255 ** 2), abs=1e-9)
    assert psnr(a, a + 1) == pytest.approx(48.13, abs=0.01)
    z = np.zeros((8, 8, 3), np.uint8)
    half = z.copy()
    half[:4] = 255
    assert psnr(z, half) == pytest.approx(3.01, abs=0.01)


def test_psnr_doubling_error_costs_6db(rng):
    a = random_view(rng).clip(10, 240)
    assert psnr(a, a + 5) - psnr(a, a + 10) == pytest.approx(20 * math.log10(2), abs=1e-9)


def test_psnr_shape_mismatch(rng):
    with pytest.raises(DimensionError):
        psnr(random_view(rng, 8, 8), random_view(rng, 8, 9))


def test_ssim_constant_images():
    z = np.zeros((16, 16, 3), np.uint8)
    assert ssim(z, z) == 1.0
    assert ssim(z, z + 255) == pytest.approx(C1 / (255 ** 2 + C1), rel=1e-9)


def test_ssim_prefers_smaller_noise(rng):
    base = np.full((48, 48, 3), 128.0)
    small = np.clip(base + rng.normal(0, 5, base.shape), 0, 255).astype(np.uint8)
    large = np.clip(base + rng.normal(0, 20, base.shape), 0, 255).astype(np.uint8)
    ref = base.astype(np.uint8)
    assert ssim(ref, small) > ssim(ref, large)


@pytest.mark.parametrize("seed, h, w", [(0, 11, 11), (1, 16, 23), (2, 25, 18)])
def test_ssim_matches_window_loop(seed, h, w):
    rng = np.random.default_rng(seed)
    a = random_view(rng, h, w)
    b = np.clip(a.astype(int) + rng.integers(-30, 31, a.shape), 0, 255).astype(np.uint8)
    assert abs(ssim(a, b) - reference_ssim(a, b)) < 1e-6


def test_ssim_matches_skimage(rng):
    metrics = pytest.importorskip("skimage.metrics")
    a = random_view(rng, 32, 40)
    b = np.clip(a.astype(int) + rng.integers(-20, 21, a.shape), 0, 255).astype(np.uint8)
    ref = metrics.structural_similarity(a, b, channel_axis=2, gaussian_weights=True, sigma=1.5,
                                        use_sample_covariance=False, data_range=255)
    # skimage averages over a cropped 'same'-size map; agreement is only approximate
    assert ssim(a, b) == pytest.approx(ref, abs=0.02)


def test_ssim_too_small(rng):
    with pytest.raises(MetricsError):
        ssim(random_view(rng, 10, 30), random_view(rng, 10, 30))


@settings(max_examples=20, deadline=None)
@given(a=arrays(np.uint8, (12, 13, 3)), b=arrays(np.uint8, (12, 13, 3)))
def test_metrics_symmetric_and_bounded(a, b):
    assert psnr(a, b) == psnr(b, a)
    s = ssim(a, b)
    assert s == pytest.approx(ssim(b, a), abs=1e-12)
    assert -1 - 1e-9 <= s <= 1 + 1e-9


def test_aggregate_excludes_infinite():
    scores = [ViewScore((0, 0), math.inf, 1.0), ViewScore((0, 1), 30.0, 0.8),
              ViewScore((0, 2), 40.0, 0.6)]
    agg = aggregate(scores)
    assert agg.mean_psnr_db == 35.0
    assert agg.mean_ssim == pytest.approx(0.8)
    assert (agg.n_views, agg.n_inf_excluded) == (3, 1)
    all_inf = aggregate(scores[:1] * 2)
    assert all_inf.mean_psnr_db == math.inf and all_inf.n_inf_excluded == 2


def _perturbed(lf, rng):
    return lf.with_views({i: np.clip(lf[i].astype(int) + rng.integers(-3, 4, lf[i].shape),
                                     0, 255).astype(np.uint8) for i in lf.indices()})


def test_score_modes(flat_lf_9x9, rng):
    mask = generate_pattern(Pattern.LEVEL1, 9, 9)
    rec = _perturbed(flat_lf_9x9, rng)
    rep = score_reconstruction(rec, flat_lf_9x9, mask, EvalMode.SYNTHESIZED)
    assert len(rep.scores) == 56 and rep.summary.n_views == 56
    assert {s.view for s in rep.scores} == set(mask.outputs)
    assert rep.aggregates["all"].n_views == 81
    assert rep.aggregates["central"].n_views == 1
    central = score_reconstruction(rec, flat_lf_9x9, mask, "central")
    assert [s.view for s in central.scores] == [central_view(9, 9)] == [(4, 4)]
    assert central.summary.mean_psnr_db == pytest.approx(psnr(rec[4, 4], flat_lf_9x9[4, 4]))


def test_score_exact_reconstruction(flat_lf_9x9):
    mask = generate_pattern(Pattern.LEVEL2, 9, 9)
    rep = score_reconstruction(flat_lf_9x9, flat_lf_9x9, mask)
    assert rep.summary.mean_psnr_db == math.inf
    assert rep.summary.n_inf_excluded == 72 and rep.summary.mean_ssim == 1.0


def test_score_incomplete_reconstruction(flat_lf_9x9):
    mask = generate_pattern(Pattern.LEVEL1, 9, 9)
    sparse = flat_lf_9x9.restricted(mask.inputs)
    with pytest.raises(MetricsError, match="missing"):
        score_reconstruction(sparse, flat_lf_9x9, mask)
    with pytest.raises(DimensionError):
        score_reconstruction(flat_lf_9x9, flat_lf_9x9, generate_pattern(Pattern.LEVEL1, 5, 5))
