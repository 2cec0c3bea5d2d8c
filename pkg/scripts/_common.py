"""Shared bits for the experiment scripts."""

import json
from pathlib import Path

import numpy as np

from lfsr import (Interpolator, InterpolatorSpec, SyntheticSceneSpec, execute_plan,
                  generate_synthetic_lf, psnr, ssim, subsample)

CONFIGS = Path(__file__).parent / "configs"


def load_scenes(path=CONFIGS / "scenes.json"):
    return [SyntheticSceneSpec.from_dict(d) for d in json.loads(Path(path).read_text())]


def render(scene, rows, cols, size):
    return generate_synthetic_lf(scene, rows, cols, size, size)


def run_plan(gt, plan, spec: InterpolatorSpec, views=None):
    """Reconstruct and return (mean PSNR, mean SSIM) over ``views`` (default: outputs)."""
    rec = execute_plan(subsample(gt, plan.mask), plan, Interpolator(spec))
    views = plan.mask.outputs if views is None else views
    p = [psnr(rec[i], gt[i]) for i in views]
    s = [ssim(rec[i], gt[i]) for i in views]
    finite = [x for x in p if np.isfinite(x)]
    return (float(np.mean(finite)) if finite else float("inf")), float(np.mean(s))


def interp_specs(names):
    return [InterpolatorSpec.parse(n) for n in names]


def print_table(header, rows):
    widths = [max(len(str(x)) for x in col) for col in zip(header, *rows)]
    for r in [header, *rows]:
        print("  ".join(str(x).ljust(w) for x, w in zip(r, widths)))
