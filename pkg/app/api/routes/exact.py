"""
POST /api/exact — exact optimum for small instances, LP model otherwise.

Instances with k up to ``held_karp_max_k`` are solved with Held–Karp and the
optimal order is returned (1-based).  Larger ones get the Boolean program in
LP text, including any subtour cuts supplied as 1-based vertex lists.

Held–Karp needs O(2^k · k) memory and time, so it runs in a worker thread and
shares the ``batch_slots`` limit with ``/api/solve``.
"""

import asyncio
import logging
from typing import Literal

from fastapi import APIRouter
from pydantic import BaseModel

from app.api.deps import error, parse_instance
from app.config import settings
from app.scheduling.errors import ContractViolation
from app.scheduling.exact import emit_cut, export_ilp, held_karp_path
from app.scheduling.instance import Cost
from app.workers.slots import batch_slots

logger = logging.getLogger(__name__)

router = APIRouter()


class ExactRequest(BaseModel):
    instance: str
    cuts: list[list[int]] = []


class ExactResponse(BaseModel):
    method: Literal["held_karp", "lp"]
    k: int
    cost: Cost | None = None
    order: list[int] | None = None
    model: str | None = None


@router.post("/api/exact", response_model=ExactResponse)
async def exact(body: ExactRequest) -> ExactResponse:
    inst = parse_instance(body.instance)
    if inst.k <= settings.held_karp_max_k:
        async with batch_slots:
            cost, order = await asyncio.to_thread(
                held_karp_path, inst, settings.held_karp_max_k
            )
        return ExactResponse(
            method="held_karp", k=inst.k, cost=cost, order=[v + 1 for v in order]
        )

    try:
        cuts = [emit_cut([v - 1 for v in c], inst.k) for c in body.cuts]
    except ContractViolation as exc:
        raise error(400, str(exc)) from exc
    if any(v < 0 or v >= inst.k for cut in cuts for v in cut.vertices):
        raise error(400, f"cut vertices must lie in 1..{inst.k}")
    logger.info("Exporting LP model for %s (k=%d, %d cuts)", inst.name, inst.k, len(cuts))
    return ExactResponse(method="lp", k=inst.k, model=export_ilp(inst, cuts))
