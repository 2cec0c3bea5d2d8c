"""Persistence: PNG light fields, dataset configs, masks, plans and reports."""

from __future__ import annotations

import csv
import json
import math
import os
import string
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

import numpy as np
from PIL import Image

from .core import LightField, ViewIndex, check_view
from .errors import DatasetError, FormatError
from .sampling import ViewMask, ViewRole

# ---------------------------------------------------------------------------
# PNG
# ---------------------------------------------------------------------------


def read_png(path) -> np.ndarray:
    """Decode an 8-bit RGB PNG. Anything else is rejected, never converted."""
    path = Path(path)
    try:
        with Image.open(path) as im:
            if im.format != "PNG":
                raise DatasetError(f"{path}: expected PNG, got {im.format}")
            if im.mode != "RGB":
                raise DatasetError(f"{path}: expected 8-bit RGB, got mode {im.mode}")
            return np.array(im, dtype=np.uint8)
    except FileNotFoundError:
        raise
    except DatasetError:
        raise
    except Exception as e:  # PIL raises a zoo of exception types
        raise DatasetError(f"{path}: cannot decode image ({e})") from e


def write_png(path, img: np.ndarray) -> Path:
    path = Path(path)
    arr = check_view(img, name=str(path))
    Image.fromarray(np.ascontiguousarray(arr), mode="RGB").save(path, format="PNG")
    return path


# ---------------------------------------------------------------------------
# Directory-of-images light fields
# ---------------------------------------------------------------------------

DEFAULT_TEMPLATE = "view_{u:02d}_{v:02d}.png"


def _template_fields(template: str) -> set[str]:
    return {name for _, name, _, _ in string.Formatter().parse(template) if name}


@dataclass
class DatasetConfig:
    root: Path
    rows: int
    cols: int
    template: str = DEFAULT_TEMPLATE
    order: str = "row"  # running-index order: "row" or "col"
    crop: Optional[tuple[int, int]] = None  # (width, height), centered

    def __post_init__(self):
        self.root = Path(self.root)
        self.rows, self.cols = int(self.rows), int(self.cols)
        if self.rows < 2 or self.cols < 2:
            raise DatasetError(f"grid must be at least 2x2, got {self.rows}x{self.cols}")
        fields = _template_fields(self.template)
        if fields == {"i"}:
            if self.order not in ("row", "col"):
                raise DatasetError(f"order must be 'row' or 'col', got {self.order!r}")
        elif fields != {"u", "v"}:
            raise DatasetError(
                f"template {self.template!r} must use both {{u}} and {{v}}, or only {{i}}")
        if self.crop is not None:
            w, h = (int(x) for x in self.crop)
            if w <= 0 or h <= 0:
                raise DatasetError("crop must be positive")
            self.crop = (w, h)

    @property
    def running_index(self) -> bool:
        return "i" in _template_fields(self.template)

    def filename(self, u: int, v: int) -> str:
        if self.running_index:
            i = u * self.cols + v if self.order == "row" else v * self.rows + u
            return self.template.format(i=i)
        return self.template.format(u=u, v=v)

    def path(self, u: int, v: int) -> Path:
        return self.root / self.filename(u, v)

    @classmethod
    def from_json(cls, path) -> "DatasetConfig":
        path = Path(path)
        try:
            d = json.loads(path.read_text())
        except json.JSONDecodeError as e:
            raise FormatError(e.msg, lineno=e.lineno, source=str(path)) from e
        missing = {"root", "rows", "cols"} - d.keys()
        if missing:
            raise DatasetError(f"{path}: missing keys {sorted(missing)}")
        root = Path(d["root"])
        if not root.is_absolute():
            root = path.parent / root
        crop = d.get("crop")
        if crop is not None:
            crop = (crop["w"], crop["h"])
        return cls(root, d["rows"], d["cols"], d.get("template", DEFAULT_TEMPLATE),
                   d.get("order", "row"), crop)

    def to_json(self, path, relative: bool = True) -> Path:
        path = Path(path)
        root = self.root
        if relative:
            try:
                root = Path(os.path.relpath(self.root, path.parent))
            except ValueError:
                pass
        d = {"root": str(root), "rows": self.rows, "cols": self.cols,
             "template": self.template, "order": self.order}
        if self.crop is not None:
            d["crop"] = {"w": self.crop[0], "h": self.crop[1]}
        path.write_text(json.dumps(d, indent=2) + "\n")
        return path


def center_crop(img: np.ndarray, width: int, height: int) -> np.ndarray:
    H, W = img.shape[:2]
    if width > W or height > H:
        raise DatasetError(f"crop {width}x{height} exceeds native {W}x{H}")
    top, left = (H - height) // 2, (W - width) // 2
    return img[top:top + height, left:left + width]


def load_lightfield(config: DatasetConfig, mask: Optional[ViewMask] = None,
                    jobs: int = 4) -> LightField:
    """Load every view (or only the mask's input views) from disk."""
    if mask is not None and (mask.rows, mask.cols) != (config.rows, config.cols):
        raise DatasetError(f"mask is {mask.rows}x{mask.cols}, dataset {config.rows}x{config.cols}")
    positions = (mask.inputs if mask is not None else
                 [ViewIndex(u, v) for u in range(config.rows) for v in range(config.cols)])
    for idx in positions:
        p = config.path(*idx)
        if not p.is_file():
            raise DatasetError(f"missing view {idx}: {p}")
        if p.suffix.lower() in (".jpg", ".jpeg"):
            raise DatasetError(f"{p}: JPEG views are not accepted, use PNG")

    def load(idx):
        img = read_png(config.path(*idx))
        if config.crop is not None:
            img = center_crop(img, *config.crop)
        return idx, img

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        loaded = list(pool.map(load, positions))
    first = loaded[0][1].shape if loaded else None
    for idx, img in loaded:
        if img.shape != first:
            raise DatasetError(f"view {idx} has shape {img.shape}, expected {first}")
    return LightField(config.rows, config.cols, dict(loaded))


def save_lightfield(lf: LightField, root, template: str = DEFAULT_TEMPLATE,
                    order: str = "row") -> list[Path]:
    """Write one PNG per view and return the paths, row-major."""
    config = DatasetConfig(root, lf.rows, lf.cols, template, order)
    empty = lf.empty_slots()
    if empty:
        raise DatasetError(f"cannot save incomplete light field, empty slots: {empty}")
    config.root.mkdir(parents=True, exist_ok=True)
    return [write_png(config.path(*idx), lf[idx]) for idx in lf.indices()]


def save_views(lf: LightField, config: DatasetConfig) -> list[Path]:
    """Write only the populated views of ``lf`` using ``config``'s naming."""
    config.root.mkdir(parents=True, exist_ok=True)
    return [write_png(config.path(*idx), lf[idx]) for idx in lf.populated()]


# ---------------------------------------------------------------------------
# Masks: "rows cols" then one line of I/O/U per angular row
# ---------------------------------------------------------------------------


def mask_to_text(mask: ViewMask) -> str:
    return f"{mask.rows} {mask.cols}\n{mask}\n"


def mask_from_text(text: str, source=None) -> ViewMask:
    lines = text.splitlines()
    if not lines:
        raise FormatError("empty mask file", 1, source)
    head = lines[0].split()
    if len(head) != 2 or not all(h.isdigit() for h in head):
        raise FormatError(f"expected 'rows cols', got {lines[0]!r}", 1, source)
    rows, cols = int(head[0]), int(head[1])
    body = lines[1:]
    while body and not body[-1].strip():
        body.pop()
    if len(body) != rows:
        raise FormatError(f"expected {rows} role lines, got {len(body)}", len(body) + 2, source)
    roles = []
    for n, line in enumerate(body, start=2):
        if len(line) != cols:
            raise FormatError(f"expected {cols} roles, got {len(line)}", n, source)
        for ch in line:
            if ch not in "IOU":
                raise FormatError(f"invalid role character {ch!r}", n, source)
        roles.append(tuple(ViewRole(ch) for ch in line))
    return ViewMask(tuple(roles))


def save_mask(mask: ViewMask, path) -> Path:
    path = Path(path)
    path.write_text(mask_to_text(mask))
    return path


def load_mask(path) -> ViewMask:
    path = Path(path)
    return mask_from_text(path.read_text(), source=str(path))


# ---------------------------------------------------------------------------
# Plans: '#' header lines, then "stage tu tv mode s1u s1v s2u s2v [..]"
# ---------------------------------------------------------------------------


def plan_to_text(plan) -> str:
    out = [f"# strategy {plan.strategy}",
           f"# grid {plan.mask.rows} {plan.mask.cols}"]
    out += [f"# mask {line}" for line in str(plan.mask).splitlines()]
    for si, stage in enumerate(plan.stages, start=1):
        out.append(f"# stage {si} spacing {stage.spacing}")
    for si, stage in enumerate(plan.stages, start=1):
        for step in stage.steps:
            coords = " ".join(f"{s.u} {s.v}" for s in step.sources)
            out.append(f"{si} {step.target.u} {step.target.v} {step.mode.value} {coords}")
    return "\n".join(out) + "\n"


def plan_from_text(text: str, source=None):
    from .scheduler import InterpMode, ReconstructionPlan, Stage, SynthesisStep

    strategy = None
    mask_lines: list[str] = []
    spacings: dict[int, int] = {}
    steps: dict[int, list] = {}
    grid = None
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if not parts:
                continue
            key = parts[0]
            try:
                if key == "strategy":
                    strategy = parts[1]
                elif key == "grid":
                    grid = (int(parts[1]), int(parts[2]))
                elif key == "mask":
                    mask_lines.append(parts[1])
                elif key == "stage":
                    spacings[int(parts[1])] = int(parts[3])
            except (IndexError, ValueError):
                raise FormatError(f"malformed header {line!r}", n, source) from None
            continue
        parts = line.split()
        try:
            stage_no = int(parts[0])
            target = (int(parts[1]), int(parts[2]))
            mode = InterpMode(parts[3])
            coords = [int(x) for x in parts[4:]]
        except (IndexError, ValueError):
            raise FormatError(f"malformed step line {line!r}", n, source) from None
        if stage_no < 1:
            raise FormatError(f"stage numbers start at 1, got {stage_no}", n, source)
        if len(coords) != 2 * mode.n_sources:
            raise FormatError(f"{mode.value} needs {mode.n_sources} source coordinates", n, source)
        srcs = [(coords[i], coords[i + 1]) for i in range(0, len(coords), 2)]
        steps.setdefault(stage_no, []).append(SynthesisStep(target, srcs, mode))
    if strategy is None or grid is None or not mask_lines:
        raise FormatError("missing '# strategy', '# grid' or '# mask' header", None, source)
    mask = mask_from_text(f"{grid[0]} {grid[1]}\n" + "\n".join(mask_lines), source)
    n_stages = max([*steps.keys(), *spacings.keys(), 0])
    stages = [Stage(steps.get(i, []), spacing=spacings.get(i, 0)) for i in range(1, n_stages + 1)]
    return ReconstructionPlan(strategy, mask, stages)


def save_plan(plan, path) -> Path:
    path = Path(path)
    path.write_text(plan_to_text(plan))
    return path


def load_plan(path):
    path = Path(path)
    return plan_from_text(path.read_text(), source=str(path))


# ---------------------------------------------------------------------------
# Metrics reports
# ---------------------------------------------------------------------------

REPORT_HEADER = ["strategy", "interpolator", "level", "view_u", "view_v", "psnr_db", "ssim"]


def format_psnr(x: float) -> str:
    return "inf" if math.isinf(x) else repr(float(x))


def parse_psnr(s: str) -> float:
    return math.inf if s == "inf" else float(s)


def append_report_csv(report, path) -> Path:
    """Append per-view rows; the header is written only to a new/empty file."""
    path = Path(path)
    new = not path.exists() or path.stat().st_size == 0
    with path.open("a", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        if new:
            w.writerow(REPORT_HEADER)
        for s in report.scores:
            w.writerow([report.strategy, report.interpolator,
                        "" if report.level is None else report.level,
                        s.view.u, s.view.v, format_psnr(s.psnr_db), repr(float(s.ssim))])
    return path


def read_report_csv(path) -> list[dict]:
    path = Path(path)
    with path.open(newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != REPORT_HEADER:
            raise FormatError(f"unexpected header {reader.fieldnames}", 1, str(path))
        rows = []
        for n, row in enumerate(reader, start=2):
            try:
                rows.append({
                    "strategy": row["strategy"], "interpolator": row["interpolator"],
                    "level": int(row["level"]) if row["level"] else None,
                    "view": ViewIndex(int(row["view_u"]), int(row["view_v"])),
                    "psnr_db": parse_psnr(row["psnr_db"]), "ssim": float(row["ssim"]),
                })
            except (TypeError, ValueError) as e:
                raise FormatError(str(e), n, str(path)) from None
    return rows


def _json_num(x: float):
    return "inf" if isinstance(x, float) and math.isinf(x) else x


def report_summary(report) -> dict:
    return {
        "strategy": report.strategy,
        "interpolator": report.interpolator,
        "level": report.level,
        "mode": report.mode.value,
        "n_views": len(report.scores),
        "aggregates": {mode: {k: _json_num(v) for k, v in agg.as_dict().items()}
                       for mode, agg in report.aggregates.items()},
    }


def write_report_json(report, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(report_summary(report), indent=2) + "\n")
    return path
