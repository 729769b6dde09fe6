"""Detection metrics, per-algorithm grid search and the FNR/FPR comparison.

Attack is the positive class throughout: a false positive is a benign
emission flagged as an attack (a false alarm), a false negative an attack
that goes unnoticed.
"""

import csv
import io
import itertools
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

import numpy as np

from . import dataset as ds
from .classifiers import ALGORITHMS, TrainConfig, predict_labels, train

COMPARISON_HEADER = ("algorithm", "best_fnr", "best_fpr", "accuracy", "config_id",
                     "train_seconds")

UNDEFINED = "undefined"


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    @property
    def total(self):
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class MetricsReport:
    """Rates are ``None`` when their denominator is zero."""

    fpr: float | None
    fnr: float | None
    accuracy: float | None
    matrix: ConfusionMatrix = field(default_factory=ConfusionMatrix)

    def objective(self):
        """fnr + fpr, or ``inf`` if either is undefined."""
        if self.fnr is None or self.fpr is None:
            return math.inf
        return self.fnr + self.fpr


def confusion(predictions, truth):
    p = np.asarray(predictions, dtype=np.int64).ravel()
    t = np.asarray(truth, dtype=np.int64).ravel()
    if p.size != t.size:
        raise ValueError(f"length mismatch: {p.size} predictions vs {t.size} labels")
    if p.size == 0:
        raise ValueError("nothing to evaluate")
    return ConfusionMatrix(
        tp=int(np.count_nonzero((p == 1) & (t == 1))),
        fp=int(np.count_nonzero((p == 1) & (t == 0))),
        tn=int(np.count_nonzero((p == 0) & (t == 0))),
        fn=int(np.count_nonzero((p == 0) & (t == 1))),
    )


def _ratio(num, den):
    return num / den if den > 0 else None


def metrics(matrix):
    return MetricsReport(
        fpr=_ratio(matrix.fp, matrix.fp + matrix.tn),
        fnr=_ratio(matrix.fn, matrix.fn + matrix.tp),
        accuracy=_ratio(matrix.tp + matrix.tn, matrix.total),
        matrix=matrix,
    )


def evaluate(model, data):
    return metrics(confusion(predict_labels(model, data.features), data.labels))


# --------------------------------------------------------------------------
# grids
# --------------------------------------------------------------------------

DEFAULT_GRID_SPECS = {
    "LR": {"learning_rate": [0.1, 0.5], "epochs": [200, 500], "regularization": [0.0, 1e-3]},
    "RF": {"n_trees": [10, 30], "max_depth": [4, 6]},
    "SVM": {"regularization": [1e-4, 1e-3, 1e-2], "epochs": [20, 50]},
    "BT": {"rounds": [20, 50], "max_depth": [2, 3], "shrinkage": [0.1, 0.3]},
    "BPNN": {"hidden": [4, 8], "learning_rate": [0.1, 0.5]},
    "NBC": {},
}


def expand_grid(algorithm, spec, seed=0):
    """Cartesian product of ``spec`` (name -> list of values) over the
    algorithm defaults.

    Names are taken in sorted order with the last one varying fastest, so the
    expansion does not depend on dict ordering.
    """
    names = sorted(spec)
    values = [list(spec[n]) if isinstance(spec[n], (list, tuple)) else [spec[n]]
              for n in names]
    return [TrainConfig.for_algorithm(algorithm, seed=seed, **dict(zip(names, combo)))
            for combo in itertools.product(*values)]


def default_grids(seed=0):
    return {tag: expand_grid(tag, spec, seed) for tag, spec in DEFAULT_GRID_SPECS.items()}


# --------------------------------------------------------------------------
# search and comparison
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class GridResult:
    model: object
    metrics: MetricsReport
    config: TrainConfig
    index: int
    grid_size: int
    train_seconds: float


def _fit_and_score(config, train_set, test_set):
    start = time.perf_counter()
    model = train(config, train_set)
    elapsed = time.perf_counter() - start
    return model, evaluate(model, test_set), elapsed


def grid_search(algorithm, grid, train_set, test_set, executor=None):
    """Train every config, keep the one with the lowest fnr + fpr on ``test_set``.

    Ties go to the lower fnr, then to the earlier grid position.  Results are
    collected by grid position, so running under an ``executor`` gives the
    same answer.
    """
    grid = list(grid)
    if not grid:
        raise ValueError(f"empty grid for {algorithm}")
    for c in grid:
        if c.algorithm != algorithm:
            raise ValueError(f"grid for {algorithm} contains a {c.algorithm} config")
    if executor is None:
        results = [_fit_and_score(c, train_set, test_set) for c in grid]
    else:
        results = list(executor.map(lambda c: _fit_and_score(c, train_set, test_set), grid))

    def key(i):
        m = results[i][1]
        return (m.objective(), math.inf if m.fnr is None else m.fnr, i)

    best = min(range(len(grid)), key=key)
    model, report, _ = results[best]
    total = sum(r[2] for r in results)
    return GridResult(model, report, grid[best], best, len(grid), total)


@dataclass(frozen=True)
class ComparisonEntry:
    algorithm: str
    metrics: MetricsReport
    config: TrainConfig
    config_index: int
    grid_size: int
    train_seconds: float

    @property
    def config_id(self):
        return f"{self.algorithm}-{self.config_index}"


@dataclass(frozen=True)
class ComparisonReport:
    entries: tuple
    split_hash: str
    seed: int
    split_fraction: float

    def entry(self, algorithm):
        for e in self.entries:
            if e.algorithm == algorithm:
                return e
        raise KeyError(algorithm)

    def to_json(self, include_timing=False):
        """Canonical JSON; wall-clock times are left out unless asked for."""
        doc = {
            "seed": self.seed,
            "split_fraction": self.split_fraction,
            "split_hash": self.split_hash,
            "entries": [],
        }
        for e in self.entries:
            item = {
                "algorithm": e.algorithm,
                "config_id": e.config_id,
                "config": e.config.to_dict(),
                "grid_size": e.grid_size,
                "fnr": e.metrics.fnr,
                "fpr": e.metrics.fpr,
                "accuracy": e.metrics.accuracy,
                "confusion": vars(e.metrics.matrix),
            }
            if include_timing:
                item["train_seconds"] = e.train_seconds
            doc["entries"].append(item)
        return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def compare_all(algorithms, grids, data, split_fraction=0.7, seed=42, jobs=1):
    """Split once, grid-search each algorithm on the same partition.

    ``algorithms`` is reported in roster order (LR, RF, SVM, BT, BPNN, NBC).
    ``jobs > 1`` trains grid points on a thread pool; the report does not
    depend on it.
    """
    wanted = set(algorithms)
    missing = [a for a in wanted if a not in grids]
    if missing:
        raise ValueError(f"no grid for: {', '.join(sorted(missing))}")
    order = [a for a in ALGORITHMS if a in wanted] + sorted(wanted - set(ALGORITHMS))
    train_set, test_set = ds.split(data, split_fraction, seed)
    digest = ds.split_digest(train_set, test_set)
    entries = []
    executor = ThreadPoolExecutor(max_workers=jobs) if jobs > 1 else None
    try:
        for tag in order:
            r = grid_search(tag, grids[tag], train_set, test_set, executor)
            entries.append(ComparisonEntry(tag, r.metrics, r.config, r.index,
                                           r.grid_size, r.train_seconds))
    finally:
        if executor is not None:
            executor.shutdown()
    return ComparisonReport(tuple(entries), digest, int(seed), float(split_fraction))


# --------------------------------------------------------------------------
# rendering
# --------------------------------------------------------------------------

def _fmt_rate(v):
    return UNDEFINED if v is None else repr(float(v))


def comparison_csv(report, include_timing=False):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COMPARISON_HEADER)
    for e in report.entries:
        w.writerow((e.algorithm, _fmt_rate(e.metrics.fnr), _fmt_rate(e.metrics.fpr),
                    _fmt_rate(e.metrics.accuracy), e.config_id,
                    f"{e.train_seconds:.6f}" if include_timing else ""))
    return buf.getvalue()


_FNR_COLOUR = "#c0392b"
_FPR_COLOUR = "#2e86c1"


def comparison_svg(report):
    """Grouped bar chart: an FNR and an FPR bar per algorithm.

    The y axis is scaled to the largest rate shown (at least 0.05), since
    good detectors sit close to zero.  Undefined rates are drawn as
    zero-height bars labelled "n/a".
    """
    entries = report.entries
    rates = [v for e in entries for v in (e.metrics.fnr, e.metrics.fpr) if v is not None]
    top = max([0.05] + rates)
    width = 120 + 110 * max(len(entries), 1)
    height = 320
    left, right, base, plot_h = 70, 20, 260, 200
    bar_w = 36
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        '<title>Best FNR and FPR per algorithm</title>',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{left}" y1="{base}" x2="{width - right}" y2="{base}" stroke="black"/>',
        f'<line x1="{left}" y1="{base}" x2="{left}" y2="{base - plot_h}" stroke="black"/>',
    ]
    for i in range(5):
        v = top * i / 4
        y = base - plot_h * i / 4
        out.append(f'<text x="{left - 6}" y="{y + 4:.2f}" text-anchor="end">{v:.3f}</text>')
        out.append(f'<line x1="{left - 3}" y1="{y:.2f}" x2="{left}" y2="{y:.2f}" stroke="black"/>')
    out.append(f'<text x="16" y="{base - plot_h / 2:.2f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {base - plot_h / 2:.2f})">rate</text>')
    for i, e in enumerate(entries):
        x0 = left + 30 + 110 * i
        for j, (name, v, colour) in enumerate((("fnr", e.metrics.fnr, _FNR_COLOUR),
                                               ("fpr", e.metrics.fpr, _FPR_COLOUR))):
            h = 0.0 if v is None else plot_h * v / top
            x = x0 + j * bar_w
            label = "n/a" if v is None else f"{v:.4f}"
            out.append(f'<rect class="bar {name}" x="{x}" y="{base - h:.2f}" width="{bar_w - 4}" '
                       f'height="{h:.2f}" fill="{colour}"><title>{escape(e.algorithm)} '
                       f'{name.upper()} {label}</title></rect>')
            out.append(f'<text x="{x + (bar_w - 4) / 2:.1f}" y="{base - h - 4:.2f}" '
                       f'text-anchor="middle" font-size="9">{label}</text>')
        out.append(f'<text class="axis-label" x="{x0 + bar_w - 2}" y="{base + 18}" '
                   f'text-anchor="middle">{escape(e.algorithm)}</text>')
    lx = width - right - 140
    for k, (name, colour) in enumerate((("FNR", _FNR_COLOUR), ("FPR", _FPR_COLOUR))):
        y = 16 + 18 * k
        out.append(f'<rect class="legend-swatch" x="{lx}" y="{y}" width="12" height="12" '
                   f'fill="{colour}"/>')
        out.append(f'<text x="{lx + 18}" y="{y + 10}">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_report(report, out_dir, include_timing=False):
    """Write ``comparison.csv`` and ``comparison.svg`` into ``out_dir``.

    The ``train_seconds`` column is left blank unless ``include_timing``:
    wall-clock times would otherwise make repeated runs differ.
    """
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "comparison.csv")
    svg_path = os.path.join(out_dir, "comparison.svg")
    text_csv = comparison_csv(report, include_timing)
    text_svg = comparison_svg(report)
    with open(csv_path, "w", newline="") as fh:
        fh.write(text_csv)
    with open(svg_path, "w") as fh:
        fh.write(text_svg)
    return csv_path, svg_path
