"""
Test helpers shared across modules.
"""

import random
from pathlib import Path

import numpy as np
import pytest

from app.config import settings
from app.scheduling.instance import Instance, Schedule, load_instance


def random_instance(rng: random.Random, k: int, high: int = 100, name: str = "rand") -> Instance:
    """Integer instance with off-diagonal weights uniform in [0, high]."""
    setup = np.array(
        [[0 if i == j else rng.randint(0, high) for j in range(k)] for i in range(k)],
        dtype=np.int64,
    )
    return Instance(name=name, setup=setup)


def random_schedule(inst: Instance, rng: random.Random) -> Schedule:
    order = list(range(inst.k))
    rng.shuffle(order)
    return Schedule.of(inst, order)


def tsplib_instance(name: str) -> Instance:
    """Load ``<tsplib_dir>/<name>.atsp`` or skip the calling test."""
    path = Path(settings.tsplib_dir) / f"{name}.atsp"
    if not path.exists():
        pytest.skip(f"{path} not available")
    return load_instance(path)
