"""
Steady-state genetic algorithm with elitist optimal recombination.

Each iteration picks two distinct members uniformly at random, optionally
mutates copies of them, builds ONE offspring with ``solve_gray`` and lets it
take the slot of one parent:

    Δ_i = s(p^i) − s(p′),     P = min((Δ1/Δ2) / a, 1)

With probability P the offspring replaces the worse parent p², otherwise the
better parent p¹.  Small ``a`` favours replacing p² (a = 0: always p²),
large ``a`` keeps the population closer to p¹ (a = ∞: always p¹).  Because the
offspring is never worse than either parent the best member cannot get worse.

The initial population is built by arbitrary insertion.  Runs are fully
determined by ``GAConfig.rng_seed``.
"""

import logging
import math
import random
import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from app.config import settings
from app.scheduling.errors import ContractViolation, RecombinationTooLarge
from app.scheduling.instance import Cost, Instance, Schedule
from app.scheduling.recombination import solve_gray

logger = logging.getLogger(__name__)


class Mutation(str, Enum):
    NONE = "none"
    SHIFT = "shift"
    EXCHANGE = "exchange"


class QCapFallback(str, Enum):
    ERROR = "error"
    TRUNCATE_TO_PARENT = "truncate_to_parent"


class Replacement(str, Enum):
    PROBABILISTIC = "probabilistic"
    ORIGINAL = "original"


class GAConfig(BaseModel):
    """Parameters of one GA run; defaults follow the application settings."""

    model_config = ConfigDict(frozen=True)

    population_size: int = Field(default_factory=lambda: settings.population_size, ge=2)
    alpha: float = Field(default_factory=lambda: settings.replacement_alpha, ge=0)
    max_iterations: int = Field(default_factory=lambda: settings.iterations, ge=1)
    mutation: Mutation = Mutation.NONE
    mutation_probability: float = Field(default=0.0, ge=0, le=1)
    rng_seed: int = 0
    stats_period: int = Field(default_factory=lambda: settings.stats_period, ge=1)
    q_cap: int = Field(default_factory=lambda: settings.q_cap, ge=0)
    q_cap_fallback: QCapFallback = QCapFallback.TRUNCATE_TO_PARENT
    replacement: Replacement = Replacement.PROBABILISTIC


@dataclass
class Population:
    members: list[Schedule]
    best: Schedule

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass
class RunRecord:
    seed: int
    best_cost_trace: list[Cost] = field(default_factory=list)
    q_samples: list[tuple[int, int]] = field(default_factory=list)
    iterations_run: int = 0
    wall_time: float = 0.0
    reached: Cost = 0
    best_order: tuple[int, ...] = ()
    iteration_found: int = 0
    truncations: int = 0


# ── Construction ──────────────────────────────────────────────────────────────


def arbitrary_insertion(inst: Instance, rng: random.Random) -> Schedule:
    """
    Randomized greedy construction: start from a random ordered pair, then
    insert the remaining jobs in random order, each at the slot with the
    smallest setup increase (ends included, ties to the lowest slot).
    """
    s = inst.setup
    seq = rng.sample(range(inst.k), 2)
    remaining = [v for v in range(inst.k) if v not in seq]
    rng.shuffle(remaining)

    for u in remaining:
        o = np.fromiter(seq, dtype=np.intp, count=len(seq))
        between = s[o[:-1], u] + s[u, o[1:]] - s[o[:-1], o[1:]]
        deltas = np.concatenate(([s[u, o[0]]], between, [s[o[-1], u]]))
        seq.insert(int(np.argmin(deltas)), u)

    return Schedule.of(inst, seq)


def init_population(inst: Instance, cfg: GAConfig, rng: random.Random) -> Population:
    members = [arbitrary_insertion(inst, rng) for _ in range(cfg.population_size)]
    best = min(members, key=lambda m: m.cost)
    return Population(members=members, best=best)


# ── Operators ─────────────────────────────────────────────────────────────────


def select_parents(pop: Population, rng: random.Random) -> tuple[int, int]:
    """Two distinct member slots, uniform; the cheaper member comes first."""
    i, j = rng.sample(range(pop.size), 2)
    if pop.members[j].cost < pop.members[i].cost:
        i, j = j, i
    return i, j


def mutate_shift(inst: Instance, schedule: Schedule, rng: random.Random) -> Schedule:
    """Move one random job to a different random position."""
    k = len(schedule.order)
    src = rng.randrange(k)
    dst = rng.randrange(k - 1)
    if dst >= src:
        dst += 1
    order = list(schedule.order)
    order.insert(dst, order.pop(src))
    return Schedule.of(inst, order)


def mutate_exchange(inst: Instance, schedule: Schedule, rng: random.Random) -> Schedule:
    """Swap the jobs at two distinct random positions."""
    i, j = rng.sample(range(len(schedule.order)), 2)
    order = list(schedule.order)
    order[i], order[j] = order[j], order[i]
    return Schedule.of(inst, order)


_MUTATIONS = {
    Mutation.SHIFT: mutate_shift,
    Mutation.EXCHANGE: mutate_exchange,
}


def _maybe_mutate(
    inst: Instance, schedule: Schedule, cfg: GAConfig, rng: random.Random
) -> Schedule:
    if rng.random() < cfg.mutation_probability:
        return _MUTATIONS[cfg.mutation](inst, schedule, rng)
    return schedule


# ── Replacement ───────────────────────────────────────────────────────────────


def replacement_probability(delta1: Cost, delta2: Cost, alpha: float) -> float:
    """Probability that the offspring takes the worse parent's slot."""
    if delta1 < 0 or delta2 < delta1:
        raise ContractViolation(
            f"expected 0 <= delta1 <= delta2, got delta1={delta1}, delta2={delta2}"
        )
    if math.isinf(alpha):
        return 0.0
    if alpha == 0:
        return 1.0
    ratio = 1.0 if delta1 == delta2 == 0 else delta1 / delta2
    return min(ratio / alpha, 1.0)


def apply_replacement(
    pop: Population,
    slot1: int,
    slot2: int,
    child: Schedule,
    cfg: GAConfig,
    rng: random.Random,
) -> Population:
    """
    Put the offspring into the slot of p¹ or p² (``slot1`` holds the cheaper
    parent).  Under the ``original`` rule the offspring enters only when it is
    strictly better than p¹.  Otherwise an offspring worse than p¹ can only
    come from mutated parents; it takes p²'s slot when it is no worse than p²
    and is dropped otherwise.
    """
    cost1 = pop.members[slot1].cost
    cost2 = pop.members[slot2].cost

    if cfg.replacement is Replacement.ORIGINAL:
        target = slot2 if child.cost < cost1 else None
    elif child.cost > cost1:
        target = slot2 if child.cost <= cost2 else None
    else:
        p = replacement_probability(cost1 - child.cost, cost2 - child.cost, cfg.alpha)
        target = slot2 if rng.random() < p else slot1

    if target is not None:
        pop.members[target] = child
        if child.cost < pop.best.cost:
            pop.best = child
    return pop


# ── Driver ────────────────────────────────────────────────────────────────────


def run_ga(inst: Instance, cfg: GAConfig) -> RunRecord:
    """Run the GA for ``cfg.max_iterations`` iterations and return its trace."""
    started = time.perf_counter()
    rng = random.Random(cfg.rng_seed)
    record = RunRecord(seed=cfg.rng_seed)

    pop = init_population(inst, cfg, rng)
    record.best_cost_trace.append(pop.best.cost)
    logger.debug(
        "Run seed=%d on %s: initial best %s", cfg.rng_seed, inst.name, pop.best.cost
    )

    for t in range(1, cfg.max_iterations + 1):
        slot1, slot2 = select_parents(pop, rng)
        parent1, parent2 = pop.members[slot1], pop.members[slot2]
        if cfg.mutation is not Mutation.NONE:
            parent1 = _maybe_mutate(inst, parent1, cfg, rng)
            parent2 = _maybe_mutate(inst, parent2, cfg, rng)

        try:
            result = solve_gray(inst, parent1, parent2, q_cap=cfg.q_cap)
            child, q = result.offspring, result.q
        except RecombinationTooLarge as exc:
            if cfg.q_cap_fallback is QCapFallback.ERROR:
                raise
            logger.warning(
                "Iteration %d: %s; keeping the better parent", t, exc
            )
            child, q = pop.members[slot1], exc.q
            record.truncations += 1

        if t % cfg.stats_period == 0:
            record.q_samples.append((t, q))
            logger.debug("Iteration %d: q=%d best=%s", t, q, pop.best.cost)

        previous_best = pop.best.cost
        apply_replacement(pop, slot1, slot2, child, cfg, rng)
        if pop.best.cost < previous_best:
            record.iteration_found = t
        record.best_cost_trace.append(pop.best.cost)

    record.iterations_run = cfg.max_iterations
    record.reached = pop.best.cost
    record.best_order = pop.best.order
    record.wall_time = time.perf_counter() - started
    logger.info(
        "Run seed=%d on %s finished: best=%s after %d iterations (%.3fs)",
        cfg.rng_seed,
        inst.name,
        record.reached,
        record.iterations_run,
        record.wall_time,
    )
    return record
