"""
Batch reports and their CSV files.

Files written by ``write_batch`` under the output directory
------------------------------------------------------------
- ``summary.csv``  — one row per batch:
  instance, k, runs, iterations, population_size, alpha, target, n_opt,
  success_rate, best, mean_reached, worst, q_limit
  (+ t_avg, t_avg_to_opt when timings are requested).
- ``dynamics.csv`` — one row per sampled iteration:
  iteration, runs_sampled, q_cp, delta_good.
- ``runs/<seed>.csv`` — one row per iteration of one run:
  iteration, best_cost, q (q is empty where no sample was taken).

Wall-clock columns are opt-in; without them every file is a pure function of
the instance and the arguments, so repeated invocations are byte-identical.

A sampled recombination is *good* when q ≤ (1 + ε)·ln k with ε = log2(e) − 1,
i.e. q ≤ log2 k; ``q_limit`` = ⌊log2 k⌋ is the block count up to which the
recombination has at most k feasible offspring.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import pandas as pd

from app.scheduling.genetic import GAConfig, RunRecord
from app.scheduling.instance import Cost, Instance

logger = logging.getLogger(__name__)

SUMMARY_COLUMNS = [
    "instance",
    "k",
    "runs",
    "iterations",
    "population_size",
    "alpha",
    "target",
    "n_opt",
    "success_rate",
    "best",
    "mean_reached",
    "worst",
    "q_limit",
]
TIMING_COLUMNS = ["t_avg", "t_avg_to_opt"]
DYNAMICS_COLUMNS = ["iteration", "runs_sampled", "q_cp", "delta_good"]
RUN_COLUMNS = ["iteration", "best_cost", "q"]

_FLOAT_FORMAT = "%.6f"


def q_limit(k: int) -> int:
    """⌊ln k / ln 2⌋."""
    return k.bit_length() - 1


def good_threshold(k: int) -> float:
    """(1 + ε)·ln k with ε = log2(e) − 1, which is exactly log2 k."""
    return math.log2(k)


@dataclass
class BatchReport:
    instance: str
    k: int
    iterations: int
    population_size: int
    alpha: float
    records: list[RunRecord]
    target: Cost | None = None
    dynamics: pd.DataFrame = field(default_factory=lambda: pd.DataFrame(columns=DYNAMICS_COLUMNS))

    @property
    def runs(self) -> int:
        return len(self.records)

    @property
    def n_opt(self) -> int | None:
        if self.target is None:
            return None
        return sum(1 for r in self.records if r.reached <= self.target)

    @property
    def t_avg(self) -> float:
        return sum(r.wall_time for r in self.records) / self.runs

    @property
    def t_avg_to_opt(self) -> float | None:
        """Expected time to the first optimum with unlimited restarts."""
        if not self.n_opt:
            return None
        return self.t_avg * self.runs / self.n_opt

    def summary_row(self, with_timings: bool = False) -> dict:
        reached = [r.reached for r in self.records]
        n_opt = self.n_opt
        row = {
            "instance": self.instance,
            "k": self.k,
            "runs": self.runs,
            "iterations": self.iterations,
            "population_size": self.population_size,
            "alpha": self.alpha,
            "target": self.target,
            "n_opt": n_opt,
            "success_rate": None if n_opt is None else n_opt / self.runs,
            "best": min(reached),
            "mean_reached": sum(reached) / self.runs,
            "worst": max(reached),
            "q_limit": q_limit(self.k),
        }
        if with_timings:
            row["t_avg"] = self.t_avg
            row["t_avg_to_opt"] = self.t_avg_to_opt
        return row


def dynamics_frame(records: Sequence[RunRecord], k: int) -> pd.DataFrame:
    """Mean q and the share of good recombinations per sampled iteration."""
    samples = pd.DataFrame(
        [(it, q) for r in records for it, q in r.q_samples],
        columns=["iteration", "q"],
    )
    if samples.empty:
        return pd.DataFrame(columns=DYNAMICS_COLUMNS)
    samples["good"] = samples["q"] <= good_threshold(k)
    frame = (
        samples.groupby("iteration", sort=True)
        .agg(runs_sampled=("q", "size"), q_cp=("q", "mean"), delta_good=("good", "mean"))
        .reset_index()
    )
    return frame[DYNAMICS_COLUMNS]


def build_report(
    inst: Instance,
    cfg: GAConfig,
    records: list[RunRecord],
    target: Cost | None = None,
) -> BatchReport:
    return BatchReport(
        instance=inst.name,
        k=inst.k,
        iterations=cfg.max_iterations,
        population_size=cfg.population_size,
        alpha=cfg.alpha,
        records=records,
        target=target,
        dynamics=dynamics_frame(records, inst.k),
    )


def run_frame(record: RunRecord) -> pd.DataFrame:
    sampled = dict(record.q_samples)
    frame = pd.DataFrame(
        {
            "iteration": range(len(record.best_cost_trace)),
            "best_cost": record.best_cost_trace,
        }
    )
    frame["q"] = pd.array(
        [sampled.get(it) for it in frame["iteration"]], dtype="Int64"
    )
    return frame[RUN_COLUMNS]


def _to_csv(frame: pd.DataFrame, path: Path) -> None:
    frame.to_csv(path, index=False, lineterminator="\n", float_format=_FLOAT_FORMAT)


def write_batch(
    report: BatchReport, out_dir: str | Path, with_timings: bool = False
) -> dict[str, Path]:
    """Write summary.csv, dynamics.csv and runs/<seed>.csv; return their paths."""
    out = Path(out_dir)
    runs_dir = out / "runs"
    runs_dir.mkdir(parents=True, exist_ok=True)

    columns = SUMMARY_COLUMNS + (TIMING_COLUMNS if with_timings else [])
    summary = pd.DataFrame([report.summary_row(with_timings)], columns=columns)
    paths = {"summary": out / "summary.csv", "dynamics": out / "dynamics.csv"}
    _to_csv(summary, paths["summary"])
    _to_csv(report.dynamics, paths["dynamics"])
    for record in report.records:
        _to_csv(run_frame(record), runs_dir / f"{record.seed}.csv")

    logger.info(
        "Wrote %s, %s and %d run file(s) under %s",
        paths["summary"].name,
        paths["dynamics"].name,
        report.runs,
        runs_dir,
    )
    return paths


def load_targets(path: str | Path) -> dict[str, Cost]:
    """Known optima keyed by instance name (columns: instance, k, optimum)."""
    frame = pd.read_csv(path)
    return dict(zip(frame["instance"].astype(str), frame["optimum"].tolist()))
