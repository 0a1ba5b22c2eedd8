"""
Optimal recombination endpoint.

POST /api/recombine
-------------------
Build the best offspring of two parent orders.

Request body
------------
``instance`` : TSPLIB text (EXPLICIT / FULL_MATRIX).
``parents``  : two permutations of the jobs, 1-based.

Responses
---------
- **200** — block count ``q``, number of enumerated offspring, special edge
  count, the offspring (1-based) and its cost.  When ``q`` is within the
  brute-force cap the result is cross-checked against exhaustive search.
- **400** — invalid instance or parents that are not permutations.
- **413** — ``q`` exceeds the recombination cap.
"""

import logging

from fastapi import APIRouter
from pydantic import BaseModel, Field

from app.api.deps import error, parse_instance
from app.config import settings
from app.scheduling.errors import ContractViolation, RecombinationTooLarge
from app.scheduling.instance import Cost, Schedule, parse_order
from app.scheduling.recombination import solve_bruteforce, solve_gray

logger = logging.getLogger(__name__)

router = APIRouter()


# ── Pydantic models ───────────────────────────────────────────────────────────


class RecombineRequest(BaseModel):
    instance: str
    parents: list[list[int]] = Field(min_length=2, max_length=2)


class RecombineResponse(BaseModel):
    q: int
    solutions: int
    special_edges: int
    parent_costs: list[Cost]
    offspring: list[int]
    cost: Cost
    oracle_checked: bool
    oracle_agrees: bool | None = None


# ── Route ─────────────────────────────────────────────────────────────────────


@router.post("/api/recombine", response_model=RecombineResponse)
def recombine(body: RecombineRequest) -> RecombineResponse:
    inst = parse_instance(body.instance)
    try:
        p1, p2 = (
            Schedule.of(inst, parse_order([str(v) for v in parent], inst.k))
            for parent in body.parents
        )
    except ContractViolation as exc:
        raise error(400, str(exc)) from exc

    try:
        result = solve_gray(inst, p1, p2, q_cap=settings.q_cap)
    except RecombinationTooLarge as exc:
        raise error(413, str(exc)) from exc

    oracle_agrees = None
    checked = result.q <= settings.bruteforce_q_cap
    if checked:
        oracle = solve_bruteforce(inst, p1, p2, q_cap=settings.bruteforce_q_cap)
        oracle_agrees = oracle.offspring.cost == result.offspring.cost
        if not oracle_agrees:
            logger.error(
                "Gray enumeration disagrees with brute force on %s: %s vs %s",
                inst.name,
                result.offspring.cost,
                oracle.offspring.cost,
            )

    return RecombineResponse(
        q=result.q,
        solutions=result.solutions_enumerated,
        special_edges=result.special_edges,
        parent_costs=[p1.cost, p2.cost],
        offspring=[v + 1 for v in result.offspring.order],
        cost=result.offspring.cost,
        oracle_checked=checked,
        oracle_agrees=oracle_agrees,
    )
