"""
Experiment harness
------------------
Builds a problem, computes the reference minimizer once, runs each
configured method from a shared starting point and writes per-pass
convergence records as CSV plus a standalone matplotlib script that draws
the normalized-error curves.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from .errors import SolverError
from .problems import (
    generate_quadratic,
    logistic_oracle,
    parse_libsvm,
    quadratic_oracle,
    synthetic_logistic,
)
from .problems.logistic import LogisticProblem
from .solvers import METHODS, RunRecord, SolverConfig, default_schedule, newton_reference, run

CSV_HEADER = ("method", "pass", "normalized_error", "grad_norm", "wall_seconds",
              "grad_calls", "hess_calls", "skipped_updates")
PROBLEMS = ("quadratic", "logistic", "synthetic-logistic")


@dataclass
class ExperimentConfig:
    problem: str = "quadratic"
    n: int = 50
    d: int = 20
    xi: float = 4.0
    seed: int = 0
    data: Optional[str] = None
    lam: float = 1e-3
    methods: Sequence[str] = ("lisr1", "lisrk", "iqn")
    k: int = 5
    mode: str = "lazy"
    max_passes: int = 50
    tol: float = 1e-10
    x0: str = "zero"
    scaling: Optional[bool] = None  # None: on iff the problem has M > 0
    r0: Optional[float] = None
    rho: Optional[float] = None
    out: Optional[str] = None
    plot: Optional[str] = None
    timing: bool = False

    def validate(self, d: Optional[int] = None):
        if self.problem not in PROBLEMS:
            raise ValueError(f"unknown problem {self.problem!r}")
        if self.problem == "logistic" and not self.data:
            raise ValueError("logistic problem needs a data path")
        if self.problem != "quadratic" and not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}")
        if not self.methods:
            raise ValueError("no methods configured")
        d = self.d if d is None else d
        if "lisrk" in self.methods and not 1 <= self.k < d:
            raise ValueError(f"k must lie in [1, {d}), got {self.k}")
        if self.x0 not in ("zero", "random"):
            raise ValueError(f"x0 must be 'zero' or 'random', got {self.x0!r}")
        if self.plot and not self.out:
            raise ValueError("--plot needs --out: the script reads the CSV")
        for p in (self.out, self.plot):
            if p is not None:
                parent = Path(p).resolve().parent
                if not parent.is_dir() or not os.access(parent, os.W_OK):
                    raise ValueError(f"cannot write to {p}")


@dataclass
class ExperimentResult:
    records: Dict[str, List[RunRecord]]
    errors: Dict[str, SolverError] = field(default_factory=dict)
    x_star: Optional[np.ndarray] = None

    @property
    def ok(self) -> bool:
        return not self.errors

    def all_records(self) -> List[RunRecord]:
        return [r for recs in self.records.values() for r in recs]


def build_oracle(cfg: ExperimentConfig):
    if cfg.problem == "quadratic":
        return quadratic_oracle(generate_quadratic(cfg.n, cfg.d, cfg.xi, cfg.seed))
    if cfg.problem == "synthetic-logistic":
        return logistic_oracle(synthetic_logistic(cfg.n, cfg.d, cfg.seed, cfg.lam))
    X, y = parse_libsvm(cfg.data)
    return logistic_oracle(LogisticProblem(X, y, cfg.lam))


def starting_point(cfg: ExperimentConfig, d: int) -> np.ndarray:
    if cfg.x0 == "zero":
        return np.zeros(d)
    return np.random.default_rng([cfg.seed, 1]).standard_normal(d)


def run_experiment(cfg: ExperimentConfig, raise_errors: bool = True) -> ExperimentResult:
    """Run every configured method on one problem from a common ``x0``.

    With ``raise_errors=False`` a failing method is recorded in
    ``result.errors`` and the remaining methods still run.
    """
    cfg.validate()
    oracle = build_oracle(cfg)
    cfg.validate(oracle.d)
    x0 = starting_point(cfg, oracle.d)
    x_star = newton_reference(oracle, x0)
    result = ExperimentResult({}, {}, x_star)
    for method in cfg.methods:
        k = 1 if method == "lisr1" else cfg.k
        sched = None
        if method != "iqn":
            sched = default_schedule(oracle, x0, k, scaling=cfg.scaling, r0=cfg.r0, rho=cfg.rho)
        scfg = SolverConfig(method=method, k=k, mode=cfg.mode, max_passes=cfg.max_passes,
                            tolerance=cfg.tol, schedule=sched)
        try:
            records = run(oracle, scfg, x0=x0, x_star=x_star)
        except SolverError as exc:
            exc.method = exc.method or scfg.label
            if raise_errors:
                raise
            result.errors[scfg.label] = exc
            continue
        result.records[scfg.label] = records
    if cfg.out:
        emit_csv(result.all_records(), cfg.out, timing=cfg.timing)
        if cfg.plot:
            emit_plot_script(cfg.out, cfg.plot)
    return result


def format_float(v: float) -> str:
    """Shortest round-trip decimal; integral values lose the trailing ``.0``."""
    s = repr(float(v))
    return s[:-2] if s.endswith(".0") else s


def emit_csv(records: Iterable[RunRecord], path, timing: bool = True):
    """Write records sorted by method then pass.

    ``wall_seconds`` is written as ``nan`` unless ``timing`` is set, so that
    repeated runs produce identical bytes.
    """
    rows = sorted(records, key=lambda r: (r.method, r.pass_index))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in rows:
            w.writerow([
                r.method,
                r.pass_index,
                format_float(r.normalized_error),
                format_float(r.grad_norm),
                format_float(r.wall_seconds) if timing else "nan",
                r.grad_calls,
                r.hess_calls,
                r.skipped_updates,
            ])


def read_csv(path) -> List[RunRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_HEADER:
            raise ValueError(f"unexpected header {reader.fieldnames}")
        return [
            RunRecord(row["method"], int(row["pass"]), float(row["normalized_error"]),
                      float(row["grad_norm"]), float(row["wall_seconds"]), int(row["grad_calls"]),
                      int(row["hess_calls"]), int(row["skipped_updates"]))
            for row in reader
        ]


_PLOT_TEMPLATE = '''\
"""Normalized error vs. effective passes, one curve per method."""
import csv
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

CSV_PATH = {csv_path!r}

series = defaultdict(lambda: ([], []))
with open(CSV_PATH, newline="") as fh:
    for row in csv.DictReader(fh):
        xs, ys = series[row["method"]]
        xs.append(int(row["pass"]))
        ys.append(float(row["normalized_error"]))

fig, ax = plt.subplots(figsize=(5, 4))
for method in sorted(series):
    xs, ys = series[method]
    ax.plot(xs, ys, label=method, linewidth=2)
ax.set_yscale("log")
ax.set_xlabel("Number of effective passes")
ax.set_ylabel("Normalized error")
ax.grid(True, which="major", alpha=0.4)
ax.legend()
fig.tight_layout()
fig.savefig(Path(CSV_PATH).with_suffix(".png"), dpi=150)
'''


def emit_plot_script(csv_path, out_path):
    """Write a matplotlib script that renders ``csv_path`` to a PNG beside it."""
    text = _PLOT_TEMPLATE.format(csv_path=str(csv_path))
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write(text)
