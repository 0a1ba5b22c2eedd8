"""
GET /status — server health and solver limits.
"""

import logging

from fastapi import APIRouter
from pydantic import BaseModel

from app.config import settings

router = APIRouter()
logger = logging.getLogger(__name__)

VERSION = "0.1.0"


class Limits(BaseModel):
    q_cap: int
    bruteforce_q_cap: int
    held_karp_max_k: int
    api_max_runs: int


class StatusResponse(BaseModel):
    status: str
    version: str
    limits: Limits


@router.get("/status", response_model=StatusResponse)
def get_status() -> StatusResponse:
    """
    Returns ``status="ok"`` together with the limits the solver endpoints
    enforce, so clients can size their requests.
    """
    return StatusResponse(
        status="ok",
        version=VERSION,
        limits=Limits(
            q_cap=settings.q_cap,
            bruteforce_q_cap=settings.bruteforce_q_cap,
            held_karp_max_k=settings.held_karp_max_k,
            api_max_runs=settings.api_max_runs,
        ),
    )
