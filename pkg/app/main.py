"""
Setup-time scheduling solver — FastAPI application entry point.

Run with:
    uvicorn app.main:app --host 0.0.0.0 --port 8000
"""

import logging

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from app.api.routes import exact as exact_router
from app.api.routes import recombine as recombine_router
from app.api.routes import solve as solve_router
from app.api.routes import status as status_router
from app.config import settings

logging.basicConfig(
    level=settings.log_level.upper(),
    format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
)

logger = logging.getLogger(__name__)


app = FastAPI(
    title="Setup-Time Scheduling Solver API",
    description=(
        "GA with optimal recombination, Held-Karp and LP export for "
        "single-machine scheduling with sequence-dependent setup times."
    ),
    version=status_router.VERSION,
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_methods=["*"],
    allow_headers=["*"],
)

# ── Routers ──────────────────────────────────────────────────────────────────
app.include_router(status_router.router, tags=["health"])
app.include_router(recombine_router.router, tags=["solver"])
app.include_router(exact_router.router, tags=["solver"])
app.include_router(solve_router.router, tags=["solver"])
