"""
Solve endpoint.

POST /api/solve
---------------
Run a seeded batch of GA runs and return the batch summary and the
recombination dynamics, exactly as ``python -m app solve`` aggregates them
(without writing files).

Request body
------------
``instance``             : TSPLIB text.
``runs``                 : number of runs, seeds ``seed``, ``seed + 1``, …
``iterations``           : iterations per run.
``population_size``      : population size r (≥ 2).
``alpha``                : replacement parameter a (≥ 0).
``seed``                 : base seed.
``stats_period``         : q is sampled every ``stats_period`` iterations.
``mutation``             : ``none`` | ``shift`` | ``exchange``.
``mutation_probability`` : per-parent mutation probability.
``target``               : (optional) cost counted as reaching the optimum.
``with_timings``         : (optional) include wall-clock figures.

Responses
---------
- **200** — ``summary`` row and ``dynamics`` rows.
- **400** — invalid instance.
- **413** — ``runs`` above ``api_max_runs`` or a recombination above the cap.
- **422** — parameters out of range.

Batches are CPU-bound; they run in a worker thread and at most
``api_max_concurrent_batches`` of them execute at once.
"""

import asyncio
import logging
import math
from typing import Any

from fastapi import APIRouter
from pydantic import BaseModel, Field

from app.api.deps import error, parse_instance
from app.config import settings
from app.reports.csv_store import build_report
from app.scheduling.errors import RecombinationTooLarge
from app.scheduling.genetic import GAConfig, Mutation, QCapFallback
from app.scheduling.instance import Cost, format_order
from app.workers.batch_runner import run_batch
from app.workers.slots import batch_slots

logger = logging.getLogger(__name__)

router = APIRouter()


# ── Pydantic models ───────────────────────────────────────────────────────────


class SolveRequest(BaseModel):
    instance: str
    runs: int = Field(default=1, ge=1)
    iterations: int = Field(default_factory=lambda: settings.iterations, ge=1)
    population_size: int = Field(default_factory=lambda: settings.population_size, ge=2)
    alpha: float = Field(default_factory=lambda: settings.replacement_alpha, ge=0)
    seed: int = 0
    stats_period: int = Field(default_factory=lambda: settings.stats_period, ge=1)
    mutation: Mutation = Mutation.NONE
    mutation_probability: float = Field(default=0.0, ge=0, le=1)
    target: Cost | None = None
    with_timings: bool = False


class SolveResponse(BaseModel):
    instance: str
    k: int
    summary: dict[str, Any]
    dynamics: list[dict[str, Any]]
    best_order: list[int]


# ── Route ─────────────────────────────────────────────────────────────────────


def _jsonable(value: Any) -> Any:
    if isinstance(value, float) and math.isinf(value):
        return "inf"
    return value


@router.post("/api/solve", response_model=SolveResponse)
async def solve(body: SolveRequest) -> SolveResponse:
    if body.runs > settings.api_max_runs:
        raise error(413, f"runs={body.runs} exceeds the limit {settings.api_max_runs}")
    inst = parse_instance(body.instance)
    cfg = GAConfig(
        population_size=body.population_size,
        alpha=body.alpha,
        max_iterations=body.iterations,
        mutation=body.mutation,
        mutation_probability=body.mutation_probability,
        rng_seed=body.seed,
        stats_period=body.stats_period,
        q_cap=settings.q_cap,
        q_cap_fallback=QCapFallback.ERROR,
    )

    async with batch_slots:
        try:
            records = await asyncio.to_thread(run_batch, inst, cfg, body.runs)
        except RecombinationTooLarge as exc:
            raise error(413, str(exc)) from exc

    report = build_report(inst, cfg, records, body.target)
    summary = {k: _jsonable(v) for k, v in report.summary_row(body.with_timings).items()}
    best = min(records, key=lambda r: r.reached)
    logger.info(
        "Solve request on %s: %d run(s), best %s (%s)",
        inst.name,
        report.runs,
        best.reached,
        format_order(best.best_order),
    )
    return SolveResponse(
        instance=inst.name,
        k=inst.k,
        summary=summary,
        dynamics=report.dynamics.to_dict(orient="records"),
        best_order=[v + 1 for v in best.best_order],
    )
