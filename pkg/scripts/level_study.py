"""Density levels 1-3 with the recursive scheduler: input ratio vs quality.

    python3 scripts/level_study.py --size 128 --inner hv --interp shift
"""

import argparse

from lfsr import CornerStrategy, Pattern, build_plan, compute_input_ratio
from lfsr.sampling import format_ratio

from _common import interp_specs, load_scenes, print_table, render, run_plan


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=128)
    ap.add_argument("--grid", type=int, default=9)
    ap.add_argument("--inner", default="hv", choices=[s.value for s in CornerStrategy])
    ap.add_argument("--interp", nargs="+", default=["shift"])
    args = ap.parse_args()

    rows = []
    for si, scene in enumerate(load_scenes()):
        gt = render(scene, args.grid, args.grid, args.size)
        for pattern in (Pattern.LEVEL1, Pattern.LEVEL2, Pattern.LEVEL3):
            plan = build_plan(pattern, args.grid, args.grid, CornerStrategy(args.inner))
            ir = format_ratio(compute_input_ratio(plan.mask))
            for spec in interp_specs(args.interp):
                p, s = run_plan(gt, plan, spec)
                rows.append([si, pattern.level, ir, plan.mask.n_output, spec.name,
                             f"{p:.2f}", f"{s:.4f}"])
    print_table(["scene", "level", "IR", "n_synth", "interp", "psnr_db", "ssim"], rows)


if __name__ == "__main__":
    main()
