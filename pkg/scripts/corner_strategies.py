"""The six corner strategies on every 3x3 block, scored on the block's central view.

    python3 scripts/corner_strategies.py --size 128 --interp shift
"""

import argparse

from lfsr.scheduler import Block, CornerStrategy, build_corner_plan

from _common import interp_specs, load_scenes, print_table, render, run_plan


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=128)
    ap.add_argument("--interp", nargs="+", default=["linear", "shift"])
    args = ap.parse_args()

    block = Block(0, 0, 2)
    rows = []
    for si, scene in enumerate(load_scenes()):
        gt = render(scene, 3, 3, args.size)
        for strategy in CornerStrategy:
            plan = build_corner_plan(strategy, block)
            for spec in interp_specs(args.interp):
                p, s = run_plan(gt, plan, spec, views=[block.center])
                rows.append([si, strategy.value, spec.name, f"{p:.2f}", f"{s:.4f}"])
    print_table(["scene", "strategy", "interp", "center_psnr_db", "center_ssim"], rows)


if __name__ == "__main__":
    main()
