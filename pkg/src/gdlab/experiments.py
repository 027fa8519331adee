"""Convergence-time experiments: trials, summaries, trajectories and figures."""

from __future__ import annotations

import csv
import io
import math
import os
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

import numpy as np

from . import svg
from .init import draw_matrix_init, draw_scalar_init
from .matrix_core import MatrixTarget, matrix_run
from .scalar_core import ScalarLoss, Status, StepPlan, scalar_run
from .util import atomic_write_text

TRIAL_HEADER = ["scheme", "k", "d", "trial", "seed", "status", "iterations", "final_objective",
                "wall_time_ms"]
SUMMARY_HEADER = ["scheme", "k", "n_trials", "n_converged", "nc_percent", "mean_log_iters",
                  "std_log_iters"]
MAX_COORDINATE_PANEL = 16


class FigureError(ValueError):
    pass


@dataclass
class TrialRecord:
    scheme_id: str
    k: int
    d: int
    trial_index: int
    seed: int
    status: Status
    iterations: int
    final_objective: float
    wall_time_ms: int = 0

    def row(self) -> list:
        return [self.scheme_id, self.k, self.d, self.trial_index, self.seed, self.status.value,
                self.iterations, format_float(self.final_objective), self.wall_time_ms]

    @classmethod
    def from_row(cls, row: dict) -> "TrialRecord":
        return cls(row["scheme"], int(row["k"]), int(row["d"]), int(row["trial"]), int(row["seed"]),
                   Status(row["status"]), int(row["iterations"]), float(row["final_objective"]),
                   int(row["wall_time_ms"]))


@dataclass
class SummaryRow:
    scheme: str
    k: int
    n_trials: int
    n_converged: int
    n_diverged: int
    nc_percent: float
    mean_log_iters: Optional[float]
    std_log_iters: Optional[float]

    def row(self) -> list:
        return [self.scheme, self.k, self.n_trials, self.n_converged, format_float(self.nc_percent),
                format_float(self.mean_log_iters), format_float(self.std_log_iters)]


@dataclass
class ExperimentSummary:
    rows: List[SummaryRow]

    def cell(self, scheme: str, k: int) -> SummaryRow:
        for r in self.rows:
            if r.scheme == scheme and r.k == k:
                return r
        raise KeyError((scheme, k))

    @property
    def schemes(self) -> list:
        return list(dict.fromkeys(r.scheme for r in self.rows))

    @property
    def depths(self) -> list:
        return sorted({r.k for r in self.rows})

    def series(self, scheme: str, attr: str = "mean_log_iters") -> dict:
        return {r.k: getattr(r, attr) for r in self.rows if r.scheme == scheme}


def format_float(value) -> str:
    if value is None:
        return ""
    return repr(float(value))


# ---------------------------------------------------------------------------
# trajectories


class TrajectoryRecorder:
    """Thinned snapshots of a run.

    ``policy`` is ``"every"`` (record every ``value`` iterations) or
    ``"geometric"`` (next record at ``ceil(t * value)``).  The first and last
    iterations are always kept.  With ``sign_events`` the run also pauses at
    every iteration where some coordinate changes sign and the following
    iteration is recorded too, so zero crossings are captured exactly.
    """

    def __init__(self, policy: str = "geometric", value: float = 1.05, *, sign_events: bool = False,
                 keep_values: bool = True):
        if policy not in ("every", "geometric"):
            raise ValueError(f"unknown thinning policy {policy!r}")
        if policy == "every" and int(value) < 1:
            raise ValueError("'every' thinning needs a positive integer")
        if policy == "geometric" and not value > 1.0:
            raise ValueError("'geometric' thinning needs a ratio > 1")
        self.policy = policy
        self.value = value
        self.sign_events = sign_events
        self.keep_values = keep_values
        self.t: List[int] = []
        self.objective: List[float] = []
        self.product: List[float] = []
        self.values: List[np.ndarray] = []
        self.events: List[int] = []
        self._force: Optional[int] = None

    def begin(self, t, w, objective, product):
        self._record(t, w, objective, product)

    def next_stop(self, t: int) -> int:
        if self.policy == "every":
            n = int(self.value)
            nxt = (t // n + 1) * n
        else:
            nxt = max(t + 1, math.ceil(t * self.value))
        if self._force is not None and self._force > t:
            nxt = min(nxt, self._force)
        return nxt

    def observe(self, t, w, objective, product, event=False):
        if event:
            self.events.append(int(t))
            self._force = t + 1
        self._record(t, w, objective, product)

    def finish(self, t):
        self._force = None

    def _record(self, t, w, objective, product):
        if self.t and self.t[-1] == t:
            return
        self.t.append(int(t))
        self.objective.append(float(objective))
        self.product.append(float(product))
        if self.keep_values:
            self.values.append(np.array(w, dtype=np.float64))

    def __len__(self):
        return len(self.t)

    @property
    def coordinates(self) -> np.ndarray:
        """Recorded per-coordinate values with shape (snapshots, k)."""
        return np.array(self.values)

    def to_csv(self) -> str:
        k = len(self.values[0]) if self.values else 0
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t", "objective", "product"] + [f"w_{j + 1}" for j in range(k)])
        for i, t in enumerate(self.t):
            vals = [format_float(v) for v in self.values[i]] if k else []
            writer.writerow([t, format_float(self.objective[i]), format_float(self.product[i])] + vals)
        return buf.getvalue()


# ---------------------------------------------------------------------------
# trials


def run_trial(objective, cell, trial_index: int, seed: int, plan: StepPlan) -> TrialRecord:
    """One (scheme, k, d, trial) cell; numerical failures become Diverged records."""
    scheme = cell.scheme.for_trial(seed, trial_index)
    start = time.perf_counter()
    try:
        if objective.kind == "scalar":
            init = draw_scalar_init(scheme, cell.k)
            result = scalar_run(init, objective.loss(), plan)
        else:
            init = draw_matrix_init(scheme, cell.k, cell.d)
            result = matrix_run(init, objective.target(cell.d), plan)
        status, iterations, final = result.status, result.iterations, result.final_objective
    except (ArithmeticError, FloatingPointError):
        status, iterations, final = Status.DIVERGED, 0, math.nan
    wall = int(round((time.perf_counter() - start) * 1000))
    return TrialRecord(scheme.scheme_id, cell.k, cell.d, trial_index, seed, status, iterations,
                       final, wall)


def _run_task(args):
    return run_trial(*args)


def _canonical_key(rec: TrialRecord):
    return (rec.scheme_id, rec.k, rec.d, rec.trial_index)


def run_experiment(config, parallelism: Optional[int] = None) -> List[TrialRecord]:
    """Every (scheme, k, d, trial) cell of ``config``, canonically sorted.

    ``parallelism`` overrides ``config.parallelism``; records do not depend on
    it (apart from ``wall_time_ms``).
    """
    workers = resolve_parallelism(config.parallelism if parallelism is None else parallelism)
    tasks = [
        (config.objective, cell, trial, config.master_seed, config.plan)
        for cell in config.grid
        for trial in range(config.trials)
    ]
    if workers <= 1 or len(tasks) <= 1:
        records = [_run_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_task, tasks, chunksize=1))
    return sorted(records, key=_canonical_key)


def resolve_parallelism(value) -> int:
    if value in (None, "auto"):
        return max(1, os.cpu_count() or 1)
    n = int(value)
    if n < 1:
        raise ValueError("parallelism must be >= 1 or 'auto'")
    return n


def summarize(records: Iterable[TrialRecord]) -> ExperimentSummary:
    """Per (scheme, k) statistics of ln(iterations) over converged trials.

    The standard deviation uses the n - 1 denominator and is absent with fewer
    than two converged trials.  Runs converging at t = 0 count as one iteration.
    """
    records = list(records)
    if not records:
        raise ValueError("cannot summarize an empty set of trial records")
    cells = {}
    for rec in records:
        cells.setdefault((rec.scheme_id, rec.k), []).append(rec)
    rows = []
    for (scheme, k), recs in sorted(cells.items()):
        logs = [math.log(max(r.iterations, 1)) for r in recs if r.status == Status.CONVERGED]
        n = len(recs)
        mean = statistics.fmean(logs) if logs else None
        std = statistics.stdev(logs) if len(logs) >= 2 else None
        rows.append(SummaryRow(
            scheme, k, n, len(logs),
            sum(r.status == Status.DIVERGED for r in recs),
            100.0 * (n - len(logs)) / n, mean, std,
        ))
    return ExperimentSummary(rows)


def trials_csv(records: Sequence[TrialRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRIAL_HEADER)
    for rec in records:
        writer.writerow(rec.row())
    return buf.getvalue()


def summary_csv(summary: ExperimentSummary) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SUMMARY_HEADER)
    for row in summary.rows:
        writer.writerow(row.row())
    return buf.getvalue()


def read_trials_csv(path) -> List[TrialRecord]:
    with open(path, newline="") as fh:
        return [TrialRecord.from_row(r) for r in csv.DictReader(fh)]


# ---------------------------------------------------------------------------
# figures


def export_figure1(recorder: TrajectoryRecorder, out_dir, prefix: str = "figure1",
                   title: str = "Gradient descent trajectory") -> dict:
    """Trajectory CSV plus a two-panel SVG (objective vs t, each w_j vs t).

    The CSV is always written; the SVG is refused for k > 16 coordinates.
    """
    if len(recorder) == 0:
        raise FigureError("trajectory is empty")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {"csv": out_dir / f"{prefix}.csv"}
    atomic_write_text(paths["csv"], recorder.to_csv())
    coords = recorder.coordinates if recorder.keep_values else np.empty((len(recorder), 0))
    k = coords.shape[1]
    if k > MAX_COORDINATE_PANEL:
        raise FigureError(f"per-coordinate panel refused for k={k} > {MAX_COORDINATE_PANEL}; "
                          f"CSV written to {paths['csv']}")
    panels = [
        {"x": recorder.t, "series": [("F(w(t))", recorder.objective)], "title": "objective",
         "xlabel": "iteration t", "ylabel": "F(w(t))"},
    ]
    if k:
        panels.append({
            "x": recorder.t,
            "series": [(f"w_{j + 1}", list(coords[:, j])) for j in range(k)],
            "title": "coordinates", "xlabel": "iteration t", "ylabel": "w_j(t)",
            "legend": True, "zero_line": True,
        })
    paths["svg"] = out_dir / f"{prefix}.svg"
    atomic_write_text(paths["svg"], svg.line_panels(title, panels))
    return paths


def export_figure2(summary: ExperimentSummary, out_dir, prefix: str = "figure2",
                   cap: Optional[int] = None, csv_name: Optional[str] = None) -> dict:
    """Summary CSV plus a grouped bar chart of mean ln(iterations) with std bars and NC labels."""
    if summary is None or not summary.rows:
        raise FigureError("summary is empty")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {"csv": out_dir / (csv_name or f"{prefix}.csv"), "svg": out_dir / f"{prefix}.svg"}
    atomic_write_text(paths["csv"], summary_csv(summary))
    schemes, depths = summary.schemes, summary.depths
    values, errors, notes = [], [], []
    for s in schemes:
        vals, errs, nts = [], [], []
        for k in depths:
            try:
                row = summary.cell(s, k)
            except KeyError:
                vals.append(None), errs.append(None), nts.append("")
                continue
            vals.append(row.mean_log_iters)
            errs.append(row.std_log_iters)
            nts.append(f"NC {row.nc_percent:.0f}%" if row.nc_percent > 0 else "")
        values.append(vals), errors.append(errs), notes.append(nts)
    chart = svg.grouped_bars(
        "ln(iterations) to reach the objective threshold", [f"k={k}" for k in depths], schemes,
        values, errors, notes, ylabel="mean ln(iterations)", xlabel="depth",
        hline=math.log(cap) if cap else None,
    )
    atomic_write_text(paths["svg"], chart)
    return paths
