"""Command-line harness: generate, sample, plan, reconstruct, evaluate, sweep."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import InterpolationError, LFError, PlanError
from .interpolate import Interpolator, InterpolatorSpec
from .lfio import (DatasetConfig, append_report_csv, format_psnr, load_lightfield, load_mask,
                   load_plan, plan_to_text, report_summary, save_lightfield, save_mask,
                   save_plan, save_views, write_report_json)
from .metrics import EvalMode, MetricsReport, score_reconstruction
from .sampling import (Pattern, ViewMask, compute_input_ratio, format_ratio, generate_pattern,
                       identify_pattern, subsample)
from .scheduler import (CornerStrategy, DEFAULT_INNER, ReconstructionPlan, build_plan,
                        execute_plan, validate_plan)
from .synthetic import SyntheticSceneSpec, generate_synthetic_lf

log = logging.getLogger("lfsr")

SUMMARY_HEADER = ["dataset", "strategy", "interpolator", "level", "n_views",
                  "mean_psnr_db", "mean_ssim", "n_inf_excluded"]


def default_jobs() -> int:
    return os.cpu_count() or 1


def strategy_label(pattern: Pattern, inner: CornerStrategy) -> str:
    return pattern.value if pattern.is_basic else CornerStrategy(inner).value


def plan_for_mask(mask: ViewMask, inner: CornerStrategy = DEFAULT_INNER) -> ReconstructionPlan:
    pattern = identify_pattern(mask)
    if pattern is None:
        raise PlanError("mask does not match any generated pattern; pass an explicit --plan")
    return build_plan(pattern, mask.rows, mask.cols, inner)


def interp_spec(args) -> InterpolatorSpec:
    kw = {"timeout": args.timeout, "pool_size": args.jobs}
    if args.interp == "shift":
        kw.update(block_size=args.block_size, search_radius=args.search_radius)
    return InterpolatorSpec.parse(args.interp, **kw)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_generate(args) -> int:
    scene = SyntheticSceneSpec.from_dict(json.loads(Path(args.scene).read_text()))
    lf = generate_synthetic_lf(scene, args.rows, args.cols, args.width, args.height)
    out = Path(args.out)
    save_lightfield(lf, out, args.template)
    DatasetConfig(out, lf.rows, lf.cols, args.template).to_json(out / "dataset.json")
    print(out / "dataset.json")
    return 0


def cmd_sample(args) -> int:
    config = DatasetConfig.from_json(args.dataset)
    lf = load_lightfield(config, jobs=args.jobs)
    mask = generate_pattern(Pattern(args.pattern), lf.rows, lf.cols)
    sparse = subsample(lf, mask)
    out = Path(args.out)
    sparse_config = DatasetConfig(out, lf.rows, lf.cols, config.template, config.order)
    save_views(sparse, sparse_config)
    sparse_config.to_json(out / "dataset.json")
    mask_path = Path(args.mask_out) if args.mask_out else out / "mask.txt"
    save_mask(mask, mask_path)
    print(f"{args.pattern}: {mask.n_input} inputs, {mask.n_output} outputs, "
          f"IR = {format_ratio(compute_input_ratio(mask))}")
    return 0


def cmd_plan(args) -> int:
    if args.mask:
        mask = load_mask(args.mask)
    elif args.pattern and args.rows and args.cols:
        mask = generate_pattern(Pattern(args.pattern), args.rows, args.cols)
    else:
        raise PlanError("plan needs --mask, or --pattern with --rows and --cols")
    plan = plan_for_mask(mask, CornerStrategy(args.strategy))
    text = plan_to_text(plan)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    problems = validate_plan(plan)
    if problems:
        raise PlanError("; ".join(map(str, problems)))
    return 0


def cmd_reconstruct(args) -> int:
    mask = load_mask(args.mask)
    plan = load_plan(args.plan) if args.plan else plan_for_mask(mask, CornerStrategy(args.strategy))
    if plan.mask != mask:
        raise PlanError("plan mask differs from --mask")
    config = DatasetConfig.from_json(args.dataset)
    sparse = load_lightfield(config, mask=mask, jobs=args.jobs)
    rec = execute_plan(sparse, plan, Interpolator(interp_spec(args)), jobs=args.jobs)
    out = Path(args.out)
    save_lightfield(rec, out, config.template, config.order)
    DatasetConfig(out, rec.rows, rec.cols, config.template, config.order).to_json(out / "dataset.json")
    save_plan(plan, out / "plan.txt")
    print(out / "dataset.json")
    return 0


def cmd_evaluate(args) -> int:
    mask = load_mask(args.mask)
    rec = load_lightfield(DatasetConfig.from_json(args.recon), jobs=args.jobs)
    gt = load_lightfield(DatasetConfig.from_json(args.gt), jobs=args.jobs)
    pattern = identify_pattern(mask)
    level = pattern.level if pattern is not None else None
    label = strategy_label(pattern, args.strategy) if pattern is not None else args.strategy
    interp = "ext" if args.interp.startswith("ext:") else args.interp
    report = score_reconstruction(rec, gt, mask, EvalMode(args.mode), label, interp, level)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    append_report_csv(report, out / "report.csv")
    write_report_json(report, out / "summary.json")
    s = report.summary
    print(f"{label} views={s.n_views} psnr={format_psnr(s.mean_psnr_db)} ssim={s.mean_ssim:.6f}")
    return 0


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------


@dataclass
class SweepSpec:
    datasets: list
    patterns: list
    strategies: list = field(default_factory=lambda: [DEFAULT_INNER])
    interpolator: InterpolatorSpec = field(default_factory=InterpolatorSpec)
    mode: EvalMode = EvalMode.SYNTHESIZED
    out: Path = Path("sweep-out")

    def __post_init__(self):
        self.datasets = [Path(p) for p in self.datasets]
        self.patterns = [Pattern(p) for p in self.patterns]
        self.strategies = [CornerStrategy(s) for s in self.strategies]
        self.mode = EvalMode(self.mode)
        self.out = Path(self.out)

    @classmethod
    def from_json(cls, path) -> "SweepSpec":
        path = Path(path)
        d = json.loads(path.read_text())
        base = path.parent
        interp = d.get("interp", "linear")
        kw = {k: d[k] for k in ("block_size", "search_radius", "timeout") if k in d}
        return cls(datasets=[base / p for p in d["datasets"]],
                   patterns=d.get("patterns", ["row", "col", "checker"]),
                   strategies=d.get("strategies", [DEFAULT_INNER.value]),
                   interpolator=InterpolatorSpec.parse(interp, **kw),
                   mode=d.get("mode", "synth"), out=base / d.get("out", "sweep-out"))

    def combinations(self):
        for di in range(len(self.datasets)):
            for p in self.patterns:
                inners = [DEFAULT_INNER] if p.is_basic else self.strategies
                for s in inners:
                    yield di, p, s


def dataset_names(paths) -> list[str]:
    names, seen = [], {}
    for p in paths:
        p = Path(p)
        name = p.parent.name if p.stem == "dataset" else p.stem
        n = seen.get(name, 0)
        seen[name] = n + 1
        names.append(name if n == 0 else f"{name}-{n}")
    return names


def run_sweep(spec: SweepSpec, jobs: int = 1) -> dict:
    names = dataset_names(spec.datasets)
    lfs = [load_lightfield(DatasetConfig.from_json(p), jobs=jobs) for p in spec.datasets]
    combos, skipped = [], []
    for di, pattern, inner in spec.combinations():
        lf = lfs[di]
        label = strategy_label(pattern, inner)
        try:
            generate_pattern(pattern, lf.rows, lf.cols)
        except LFError as e:
            reason = f"{names[di]}/{label}/{pattern.value}: {e}"
            log.warning("skipping %s", reason)
            skipped.append({"dataset": names[di], "pattern": pattern.value,
                            "strategy": label, "reason": str(e)})
            continue
        combos.append((di, pattern, inner))
    interpolator = Interpolator(spec.interpolator)

    def run(combo) -> MetricsReport:
        di, pattern, inner = combo
        gt = lfs[di]
        plan = build_plan(pattern, gt.rows, gt.cols, inner)
        rec = execute_plan(subsample(gt, plan.mask), plan, interpolator)
        report = score_reconstruction(rec, gt, plan.mask, spec.mode,
                                      strategy_label(pattern, inner),
                                      spec.interpolator.name, pattern.level)
        run_dir = spec.out / "runs" / names[di] / f"{pattern.value}-{report.strategy}"
        run_dir.mkdir(parents=True, exist_ok=True)
        (run_dir / "report.csv").unlink(missing_ok=True)
        append_report_csv(report, run_dir / "report.csv")
        write_report_json(report, run_dir / "summary.json")
        return report

    spec.out.mkdir(parents=True, exist_ok=True)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(run, combos))
    else:
        reports = [run(c) for c in combos]

    # merge in combination order so output bytes do not depend on scheduling
    rows = []
    for (di, pattern, inner), rep in zip(combos, reports):
        s = rep.summary
        rows.append([names[di], rep.strategy, rep.interpolator,
                     "" if rep.level is None else rep.level, s.n_views,
                     format_psnr(s.mean_psnr_db), repr(float(s.mean_ssim)), s.n_inf_excluded])
    with (spec.out / "summary.csv").open("w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(SUMMARY_HEADER)
        w.writerows(rows)
    with (spec.out / "series.csv").open("w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["series", "x", "y"])
        for metric, idx in (("psnr_db", 5), ("ssim", 6)):
            for row in rows:
                if row[3] != "":
                    w.writerow([f"{row[0]}/{row[1]}/{metric}", row[3], row[idx]])
    summary = {
        "interpolator": spec.interpolator.name,
        "mode": spec.mode.value,
        "results": [report_summary(r) | {"dataset": names[di]}
                    for (di, _, _), r in zip(combos, reports)],
        "skipped": skipped,
    }
    (spec.out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    return summary


def cmd_sweep(args) -> int:
    if args.spec:
        spec = SweepSpec.from_json(args.spec)
        if args.out:
            spec.out = Path(args.out)
    else:
        if not args.dataset:
            raise LFError("sweep needs --spec or at least one --dataset")
        spec = SweepSpec(datasets=args.dataset,
                         patterns=args.pattern or ["row", "col", "checker"],
                         strategies=args.strategy or [DEFAULT_INNER.value],
                         interpolator=interp_spec(args), mode=args.mode,
                         out=args.out or "sweep-out")
    summary = run_sweep(spec, jobs=args.jobs)
    print(f"{len(summary['results'])} combinations, {len(summary['skipped'])} skipped -> "
          f"{spec.out / 'summary.csv'}")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

PATTERNS = [p.value for p in Pattern]
STRATEGIES = [s.value for s in CornerStrategy]


def _interp_options(p):
    p.add_argument("--interp", default="linear",
                   help='linear | shift | ext:"CMD {src1} {src2} [{src3} {src4}] {tu} {tv} {out}"')
    p.add_argument("--block-size", type=int, default=16)
    p.add_argument("--search-radius", type=int, default=8)
    p.add_argument("--timeout", type=float, default=300.0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lfsr", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help):
        p = sub.add_parser(name, help=help)
        p.set_defaults(func=func)
        p.add_argument("--jobs", type=int, default=default_jobs())
        return p

    p = add("generate", cmd_generate, "render a synthetic light field to PNGs")
    p.add_argument("--scene", required=True)
    p.add_argument("--rows", type=int, default=9)
    p.add_argument("--cols", type=int, default=9)
    p.add_argument("--width", type=int, default=128)
    p.add_argument("--height", type=int, default=128)
    p.add_argument("--template", default="view_{u:02d}_{v:02d}.png")
    p.add_argument("--out", required=True)

    p = add("sample", cmd_sample, "subsample a dataset with a pattern")
    p.add_argument("--dataset", required=True)
    p.add_argument("--pattern", required=True, choices=PATTERNS)
    p.add_argument("--out", required=True)
    p.add_argument("--mask-out")

    p = add("plan", cmd_plan, "print and validate a reconstruction plan")
    p.add_argument("--mask")
    p.add_argument("--pattern", choices=PATTERNS)
    p.add_argument("--rows", type=int)
    p.add_argument("--cols", type=int)
    p.add_argument("--strategy", default="hv", choices=STRATEGIES)
    p.add_argument("--out")

    p = add("reconstruct", cmd_reconstruct, "complete a sparse dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--strategy", default="hv", choices=STRATEGIES)
    p.add_argument("--plan", help="explicit plan dump instead of a generated plan")
    _interp_options(p)
    p.add_argument("--out", required=True)

    p = add("evaluate", cmd_evaluate, "score a reconstruction against ground truth")
    p.add_argument("--recon", "--dataset", dest="recon", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--mode", default="synth", choices=[m.value for m in EvalMode])
    p.add_argument("--strategy", default="hv", help="label for the report")
    p.add_argument("--interp", default="linear", help="label for the report")
    p.add_argument("--out", required=True)

    p = add("sweep", cmd_sweep, "run a strategy x level x dataset sweep")
    p.add_argument("--spec", help="sweep JSON file")
    p.add_argument("--dataset", action="append")
    p.add_argument("--pattern", action="append", choices=PATTERNS)
    p.add_argument("--strategy", action="append", choices=STRATEGIES)
    p.add_argument("--mode", default="synth", choices=[m.value for m in EvalMode])
    _interp_options(p)
    p.add_argument("--out")
    return parser


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (LFError, OSError, ValueError, KeyError) as e:
        err = {"error": type(e).__name__, "message": str(e)}
        if isinstance(e, InterpolationError):
            err["step"] = e.step_id
            err["diagnostics"] = e.diagnostics
        print(json.dumps(err), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
