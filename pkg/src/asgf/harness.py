"""Repeated-trial experiments, summary statistics and trace output.

Trial ``k`` of a plan uses seed ``base_seed + k`` both for its initial
point and for the algorithm's RNG, so different algorithms run under the
same base seed start from the same points, and results do not depend on
how many worker processes share the trials.
"""

from __future__ import annotations

import ast
import configparser
import csv
import io
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from .baselines import DgsConfig, EsConfig, dgs_minimize, es_minimize
from .benchmarks import BenchmarkSpec, get_benchmark, is_success, sample_initial_point
from .optimizer import AsgfConfig, OptimizationResult, RunTrace, minimize

__all__ = [
    "ALGORITHMS",
    "WORKERS_ENV",
    "ExperimentPlan",
    "TrialResult",
    "SummaryRow",
    "ComparisonTable",
    "default_worker_count",
    "build_config",
    "load_config_file",
    "run_trial",
    "run_experiment",
    "compare",
    "read_trace_csv",
    "write_trace_csv",
    "emit_convergence_plot_data",
]

logger = logging.getLogger(__name__)

ALGORITHMS = ("asgf", "es", "dgs")
WORKERS_ENV = "ASGF_WORKERS"
TRACE_COLUMNS = [f.name for f in fields(RunTrace)]
SUMMARY_COLUMNS = [
    "benchmark",
    "algorithm",
    "success_rate",
    "mean_iterations_on_success",
    "mean_evaluations_on_success",
    "trial_count",
]

_CONFIG_TYPES = {"asgf": AsgfConfig, "es": EsConfig, "dgs": DgsConfig}


def default_worker_count() -> int:
    """Worker count from ``$ASGF_WORKERS``, else 1."""
    value = os.environ.get(WORKERS_ENV)
    if not value:
        return 1
    count = int(value)
    if count < 1:
        raise ValueError(f"{WORKERS_ENV} must be a positive integer, got {value!r}")
    return count


@dataclass
class ExperimentPlan:
    """What to run and where to put the results.

    ``algorithm_config`` holds overrides of the algorithm's config fields;
    anything not given falls back to the defaults (for ASGF, ``sigma0``
    defaults to a tenth of the sampling box diameter). With
    ``stop_at_target`` a trial ends as soon as its best value is within the
    success tolerance, so iteration and evaluation counts measure the cost
    of reaching the global minimum.
    """

    benchmark: str
    algorithm: str = "asgf"
    trial_count: int = 100
    base_seed: int = 0
    algorithm_config: Dict[str, object] = field(default_factory=dict)
    output_path: Optional[Union[str, Path]] = None
    worker_count: int = 1
    direction_workers: int = 1
    stop_at_target: bool = True

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; choose from {ALGORITHMS}")
        if self.trial_count < 1:
            raise ValueError("trial_count must be positive")
        if self.worker_count < 1 or self.direction_workers < 1:
            raise ValueError("worker counts must be positive")
        if isinstance(self.algorithm_config, (AsgfConfig, EsConfig, DgsConfig)):
            self.algorithm_config = self.algorithm_config.to_dict()
        self.algorithm_config = dict(self.algorithm_config)
        self.algorithm_config.pop("rng_seed", None)

    def trial_seed(self, index: int) -> int:
        return self.base_seed + index

    @property
    def spec(self) -> BenchmarkSpec:
        return get_benchmark(self.benchmark)


@dataclass
class TrialResult:
    index: int
    seed: int
    success: bool
    best_value: float
    iterations: int
    evaluations: int
    status: str
    trace: List[RunTrace]
    error: Optional[str] = None


@dataclass
class SummaryRow:
    benchmark: str
    algorithm: str
    success_rate: float
    mean_iterations_on_success: Optional[float]
    mean_evaluations_on_success: Optional[float]
    trial_count: int

    def to_dict(self) -> dict:
        return asdict(self)


def build_config(algorithm: str, spec: BenchmarkSpec, overrides: dict, seed: Optional[int]):
    """Effective config for one trial of ``algorithm`` on ``spec``."""
    values = dict(overrides)
    values["rng_seed"] = seed
    if algorithm == "asgf":
        values.setdefault("sigma0", spec.default_sigma0)
        return AsgfConfig(**values)
    if algorithm == "es":
        return EsConfig(**values)
    if algorithm == "dgs":
        return DgsConfig(**values)
    raise ValueError(f"unknown algorithm {algorithm!r}")


def _parse_value(text: str):
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text


def load_config_file(path: Union[str, Path], algorithm: str) -> dict:
    """Read ``key = value`` overrides for ``algorithm`` from an INI file.

    Keys live in a section named after the algorithm (``[asgf]``, ``[dgs]``
    or ``[es]``); other sections are ignored. Values are Python literals.
    """
    parser = configparser.ConfigParser()
    parser.optionxform = str
    with open(path) as fh:
        parser.read_file(fh)
    if not parser.has_section(algorithm):
        return {}
    known = {f.name for f in fields(_CONFIG_TYPES[algorithm])}
    values = {}
    for key, text in parser.items(algorithm):
        if key not in known:
            raise ValueError(f"unknown {algorithm} config key {key!r} in {path}")
        values[key] = _parse_value(text)
    return values


def run_trial(plan: ExperimentPlan, index: int) -> TrialResult:
    """Run trial ``index`` of ``plan``. Algorithm errors become failed trials."""
    spec = plan.spec
    seed = plan.trial_seed(index)
    x0 = sample_initial_point(spec, seed)
    objective = spec.objective()
    target = spec.global_minimum_value + spec.success_tolerance if plan.stop_at_target else None
    config = build_config(plan.algorithm, spec, plan.algorithm_config, seed)
    try:
        if plan.algorithm == "asgf":
            result = minimize(objective, x0, config, workers=plan.direction_workers, target_value=target)
        elif plan.algorithm == "dgs":
            result = dgs_minimize(objective, x0, config, target_value=target)
        else:
            result = es_minimize(
                objective, x0, config.sigma, config.learning_rate, config.sample_count,
                config.max_iterations, np.random.default_rng(seed), target_value=target,
            )
    except Exception as exc:  # a crashed trial is a failed trial
        logger.warning("trial %d of %s/%s failed: %s", index, plan.benchmark, plan.algorithm, exc)
        return TrialResult(index, seed, False, math.nan, 0, objective.evaluations, "error", [], repr(exc))
    assert result.evaluations == objective.evaluations
    return TrialResult(
        index=index,
        seed=seed,
        success=is_success(spec, result.best_value),
        best_value=result.best_value,
        iterations=result.iterations,
        evaluations=result.evaluations,
        status=result.status,
        trace=result.trace,
    )


def _run_trials(plan: ExperimentPlan) -> List[TrialResult]:
    indices = range(plan.trial_count)
    if plan.worker_count == 1:
        return [run_trial(plan, k) for k in indices]
    with ProcessPoolExecutor(max_workers=plan.worker_count) as pool:
        return list(pool.map(run_trial, [plan] * plan.trial_count, indices))


def summarize(plan: ExperimentPlan, trials: Sequence[TrialResult]) -> SummaryRow:
    wins = [t for t in trials if t.success]
    return SummaryRow(
        benchmark=plan.spec.label,
        algorithm=plan.algorithm,
        success_rate=len(wins) / len(trials),
        mean_iterations_on_success=float(np.mean([t.iterations for t in wins])) if wins else None,
        mean_evaluations_on_success=float(np.mean([t.evaluations for t in wins])) if wins else None,
        trial_count=len(trials),
    )


def write_trace_csv(trace: Sequence[RunTrace], path: Union[str, Path]) -> None:
    """Write a trace with a header row; floats use round-trip ``repr``."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_COLUMNS)
        for row in trace:
            writer.writerow([_fmt(getattr(row, c)) for c in TRACE_COLUMNS])


def read_trace_csv(path: Union[str, Path]) -> List[RunTrace]:
    types = {f.name: f.type for f in fields(RunTrace)}
    out = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            kwargs = {}
            for k, v in rec.items():
                t = types[k]
                kwargs[k] = v if t == "str" else (int(v) if t == "int" else float(v))
            out.append(RunTrace(**kwargs))
    return out


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _summary_document(plan: ExperimentPlan, row: SummaryRow, trials: Sequence[TrialResult]) -> dict:
    spec = plan.spec
    config = build_config(plan.algorithm, spec, plan.algorithm_config, None).to_dict()
    config.pop("rng_seed")
    return {
        "summary": row.to_dict(),
        "plan": {
            "benchmark": spec.label,
            "algorithm": plan.algorithm,
            "trial_count": plan.trial_count,
            "base_seed": plan.base_seed,
            "stop_at_target": plan.stop_at_target,
            "success_tolerance": spec.success_tolerance,
            "worker_count": plan.worker_count,
            "direction_workers": plan.direction_workers,
            "workers_env": os.environ.get(WORKERS_ENV),
        },
        "config": config,
        "trials": [
            {
                "index": t.index,
                "seed": t.seed,
                "success": t.success,
                "best_value": None if math.isnan(t.best_value) else t.best_value,
                "iterations": t.iterations,
                "evaluations": t.evaluations,
                "status": t.status,
                "error": t.error,
            }
            for t in trials
        ],
    }


def run_experiment(plan: ExperimentPlan, return_trials: bool = False):
    """Run all trials of ``plan`` and persist the results.

    Writes ``<output_path>/<benchmark>_<algorithm>/trial_XXXX.csv`` for each
    trial and ``summary.json`` next to them, unless ``output_path`` is
    ``None``. Returns the :class:`SummaryRow`, plus the trial results when
    ``return_trials`` is set.
    """
    trials = _run_trials(plan)
    row = summarize(plan, trials)
    if plan.output_path is not None:
        out = Path(plan.output_path) / f"{plan.spec.label}_{plan.algorithm}"
        out.mkdir(parents=True, exist_ok=True)
        for t in trials:
            write_trace_csv(t.trace, out / f"trial_{t.index:04d}.csv")
        doc = _summary_document(plan, row, trials)
        with open(out / "summary.json", "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return (row, trials) if return_trials else row


@dataclass
class ComparisonTable:
    """One row per algorithm; cells are kept as strings as written."""

    rows: List[Dict[str, str]]

    def to_csv(self, path: Optional[Union[str, Path]] = None) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=SUMMARY_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(self.rows)
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    def to_text(self) -> str:
        table = [SUMMARY_COLUMNS] + [[r[c] for c in SUMMARY_COLUMNS] for r in self.rows]
        widths = [max(len(line[i]) for line in table) for i in range(len(SUMMARY_COLUMNS))]
        lines = ["  ".join(cell.ljust(w) for cell, w in zip(line, widths)).rstrip() for line in table]
        lines.insert(1, "  ".join("-" * w for w in widths))
        return "\n".join(lines) + "\n"


def _row_strings(row: SummaryRow) -> Dict[str, str]:
    return {k: "" if v is None else _fmt(v) for k, v in row.to_dict().items()}


def compare(
    plans: Sequence[ExperimentPlan],
    external: Sequence[Union[str, Path]] = (),
    output_path: Optional[Union[str, Path]] = None,
) -> ComparisonTable:
    """Run several plans on one benchmark and merge their summaries.

    Rows from ``external`` CSVs (same columns as the table) are appended
    unchanged, which is how results of third-party optimizers enter the
    comparison. With ``output_path`` set, writes ``comparison.csv`` and
    ``comparison.txt`` there.
    """
    if not plans:
        raise ValueError("no plans to compare")
    labels = {p.spec.label for p in plans}
    if len(labels) != 1:
        raise ValueError(f"plans use different benchmarks: {sorted(labels)}")
    label = labels.pop()
    rows = [_row_strings(run_experiment(p)) for p in plans]
    for path in external:
        with open(path, newline="") as fh:
            for rec in csv.DictReader(fh):
                missing = set(SUMMARY_COLUMNS) - set(rec)
                if missing:
                    raise ValueError(f"{path} lacks columns {sorted(missing)}")
                if rec["benchmark"] != label:
                    raise ValueError(f"{path} row is for {rec['benchmark']!r}, not {label!r}")
                rows.append({c: rec[c] for c in SUMMARY_COLUMNS})
    table = ComparisonTable(rows)
    if output_path is not None:
        out = Path(output_path)
        out.mkdir(parents=True, exist_ok=True)
        table.to_csv(out / "comparison.csv")
        (out / "comparison.txt").write_text(table.to_text())
    return table


def _padded(columns: Sequence[Sequence[float]]) -> np.ndarray:
    n = max(len(c) for c in columns)
    out = np.empty((n, len(columns)))
    for j, c in enumerate(columns):
        out[: len(c), j] = c
        out[len(c):, j] = c[-1]
    return out


def emit_convergence_plot_data(
    traces: Sequence[Sequence[RunTrace]],
    output_path: Union[str, Path],
    svg_path: Optional[Union[str, Path]] = None,
) -> Path:
    """Write best-value curves for several runs as one CSV.

    Columns: ``iteration``, then ``best_k`` and ``evals_k`` per trace, then
    the across-trace ``min``, ``q1``, ``median``, ``q3`` and ``max`` of the
    best value. Shorter traces are padded with their last row (the run had
    stopped). Quartiles use linear interpolation between order statistics
    (``numpy.quantile``'s default), so with values ``a < b < c < d`` the
    first quartile is ``a + 0.75 * (b - a)``.

    Optionally also renders the median curve with its interquartile band as
    a small SVG.
    """
    if not traces or any(len(t) == 0 for t in traces):
        raise ValueError("need at least one nonempty trace")
    best = _padded([[r.best_value for r in t] for t in traces])
    evals = _padded([[r.cumulative_evaluations for r in t] for t in traces]).astype(int)
    stats = np.quantile(best, [0.0, 0.25, 0.5, 0.75, 1.0], axis=1).T
    header = ["iteration"]
    header += [f"best_{k}" for k in range(len(traces))]
    header += [f"evals_{k}" for k in range(len(traces))]
    header += ["min", "q1", "median", "q3", "max"]
    path = Path(output_path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(best.shape[0]):
            writer.writerow(
                [i + 1]
                + [repr(float(v)) for v in best[i]]
                + [int(v) for v in evals[i]]
                + [repr(float(v)) for v in stats[i]]
            )
    if svg_path is not None:
        Path(svg_path).write_text(_svg_chart(stats))
    return path


def _svg_chart(stats: np.ndarray, width: int = 480, height: int = 320) -> str:
    pad = 40
    floor = 1e-16
    logs = np.log10(np.maximum(np.abs(stats), floor))
    lo, hi = float(logs.min()), float(logs.max())
    if hi == lo:
        hi = lo + 1
    n = stats.shape[0]

    def pt(i, v):
        x = pad + (width - 2 * pad) * (i / max(n - 1, 1))
        y = height - pad - (height - 2 * pad) * (v - lo) / (hi - lo)
        return f"{x:.1f},{y:.1f}"

    median = " ".join(pt(i, logs[i, 2]) for i in range(n))
    band = " ".join(pt(i, logs[i, 1]) for i in range(n))
    band += " " + " ".join(pt(i, logs[i, 3]) for i in reversed(range(n)))
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">\n'
        f'<rect x="{pad}" y="{pad}" width="{width - 2 * pad}" height="{height - 2 * pad}" '
        'fill="none" stroke="#888"/>\n'
        f'<polygon points="{band}" fill="#9ecae1" opacity="0.5"/>\n'
        f'<polyline points="{median}" fill="none" stroke="#08519c" stroke-width="1.5"/>\n'
        f'<text x="{pad}" y="{pad - 8}" font-size="12">log10 |best value| (median, IQR)'
        f" [{lo:.1f}, {hi:.1f}]</text>\n"
        f'<text x="{width - pad}" y="{height - 12}" font-size="12" text-anchor="end">iteration 1..{n}</text>\n'
        "</svg>\n"
    )
