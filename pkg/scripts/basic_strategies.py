"""Row-wise vs column-wise vs checkerboard subsampling on the layered scenes.

    python3 scripts/basic_strategies.py --size 128 --interp linear shift
"""

import argparse

from lfsr import Pattern, build_plan, compute_input_ratio
from lfsr.sampling import format_ratio

from _common import interp_specs, load_scenes, print_table, render, run_plan


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=128)
    ap.add_argument("--grid", type=int, default=9)
    ap.add_argument("--interp", nargs="+", default=["linear", "shift"])
    args = ap.parse_args()

    rows = []
    for si, scene in enumerate(load_scenes()):
        gt = render(scene, args.grid, args.grid, args.size)
        for pattern in (Pattern.ROW_WISE, Pattern.COLUMN_WISE, Pattern.CHECKERBOARD):
            plan = build_plan(pattern, args.grid, args.grid)
            ir = format_ratio(compute_input_ratio(plan.mask))
            for spec in interp_specs(args.interp):
                p, s = run_plan(gt, plan, spec)
                rows.append([si, pattern.value, ir, spec.name, f"{p:.2f}", f"{s:.4f}"])
    print_table(["scene", "pattern", "IR", "interp", "psnr_db", "ssim"], rows)


if __name__ == "__main__":
    main()
