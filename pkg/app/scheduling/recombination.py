"""
Optimal recombination of two job orders.

Given parents π¹ and π², the offspring π′ must take, at every position i,
either π¹_i or π²_i, and among all such permutations it must minimize s(π′).

Design
------
- Position i gets the prescription set {π¹_i} when the parents agree there and
  {π¹_i, π²_i} otherwise.  In the bipartite position–job graph a singleton
  position is a *special edge*: it belongs to every perfect matching.
- The remaining edges form vertex-disjoint even cycles (*blocks*).  Each block
  has exactly two perfect matchings: the edges taken from π¹ (choice 0) and
  the edges taken from π² (choice 1).  The feasible offspring are therefore
  exactly the 2^q combinations of per-block choices δ ∈ {0,1}^q.
- Consecutive positions (i, i+1) are *contacts*.  Bucketing each contact by
  the owners of its two positions gives, per block j, the sums P_j^0 / P_j^1
  (contacts inside j and with special edges) and, per neighbouring block j′,
  a 2×2 table P_jj′[δ_j][δ_j′].  Flipping one block then changes the
  objective by a sum over that block's neighbours only.
- ``solve_gray`` walks the 2^q choices in reflected Gray-code order, updating
  the objective incrementally; ``solve_bruteforce`` rebuilds and re-evaluates
  every offspring from scratch and serves as the oracle.

Ties between equal-cost offspring go to the first one met in the respective
enumeration order.
"""

import itertools
import logging
import time
from dataclasses import dataclass, field, replace
from typing import Iterator

from app.scheduling.errors import (
    ContractViolation,
    InvariantError,
    RecombinationTooLarge,
    SolverLimitExceeded,
)
from app.scheduling.instance import Cost, Instance, Schedule, evaluate_cost

logger = logging.getLogger(__name__)

DEFAULT_Q_CAP: int = 30
DEFAULT_BRUTEFORCE_Q_CAP: int = 20

SPECIAL: int = -1

ContactTable = tuple[tuple[Cost, Cost], tuple[Cost, Cost]]


# ── Domain types ──────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class PrescriptionSystem:
    """Per-position allowed jobs; ``sets[i][0]`` is always the first parent's job."""

    k: int
    sets: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        if len(self.sets) != self.k:
            raise InvariantError(f"expected {self.k} prescription sets, got {len(self.sets)}")
        occurrences: dict[int, list[int]] = {}
        for i, allowed in enumerate(self.sets):
            if not 1 <= len(allowed) <= 2 or len(set(allowed)) != len(allowed):
                raise InvariantError(f"position {i} has an invalid set {allowed}")
            for job in allowed:
                occurrences.setdefault(job, []).append(i)
        if set(occurrences) != set(range(self.k)):
            raise InvariantError("every job must appear in at least one set")
        for job, positions in occurrences.items():
            if len(positions) > 2:
                raise InvariantError(f"job {job} appears in {len(positions)} sets")
            doubletons = all(len(self.sets[i]) == 2 for i in positions)
            if len(positions) == 2 and not doubletons:
                raise InvariantError(f"job {job} appears twice but not only in doubletons")
            if len(positions) == 1 and len(self.sets[positions[0]]) != 1:
                raise InvariantError(f"job {job} appears once but not in a singleton")


@dataclass(frozen=True)
class Block:
    """One degree-2 component: a cycle over ``positions`` with its two matchings."""

    positions: tuple[int, ...]
    matching0: dict[int, int]
    matching1: dict[int, int]
    p0: Cost = 0
    p1: Cost = 0
    neighbor_contacts: dict[int, ContactTable] = field(default_factory=dict)

    @property
    def matchings(self) -> tuple[dict[int, int], dict[int, int]]:
        return self.matching0, self.matching1


@dataclass(frozen=True)
class BipartiteStructure:
    special_edges: tuple[tuple[int, int], ...]
    blocks: tuple[Block, ...]
    owner: tuple[int, ...]
    constant: Cost = 0
    baseline: Cost | None = None

    @property
    def q(self) -> int:
        return len(self.blocks)

    @property
    def k(self) -> int:
        return len(self.owner)


@dataclass(frozen=True)
class RecombinationResult:
    offspring: Schedule
    solutions_enumerated: int
    q: int
    elapsed: float
    special_edges: int = 0
    block_sizes: tuple[int, ...] = ()


# ── Structure ─────────────────────────────────────────────────────────────────


def build_prescriptions(p1: Schedule, p2: Schedule) -> PrescriptionSystem:
    """X^i = {π¹_i} where the parents agree, {π¹_i, π²_i} otherwise."""
    if len(p1.order) != len(p2.order):
        raise ContractViolation(
            f"parents have different lengths: {len(p1.order)} and {len(p2.order)}"
        )
    sets = tuple((a,) if a == b else (a, b) for a, b in zip(p1.order, p2.order))
    return PrescriptionSystem(k=len(sets), sets=sets)


def decompose(system: PrescriptionSystem) -> BipartiteStructure:
    """
    Split the position–job graph into special edges and blocks in O(k).

    Blocks are numbered by their lowest position.  Choice 0 of a block is the
    matching that contains the lowest position's first-parent edge.
    """
    k = system.k
    sets = system.sets
    job_positions: dict[int, list[int]] = {}
    for i, allowed in enumerate(sets):
        for job in allowed:
            job_positions.setdefault(job, []).append(i)

    owner = [SPECIAL] * k
    special_edges: list[tuple[int, int]] = []
    blocks: list[Block] = []

    for start in range(k):
        if len(sets[start]) == 1:
            special_edges.append((start, sets[start][0]))
            continue
        if owner[start] != SPECIAL:
            continue

        block_id = len(blocks)
        matching0: dict[int, int] = {}
        matching1: dict[int, int] = {}
        pos, job0 = start, sets[start][0]
        while True:
            if owner[pos] != SPECIAL or len(sets[pos]) != 2:
                raise InvariantError(f"position {pos} breaks the cycle of block {block_id}")
            owner[pos] = block_id
            job1 = sets[pos][1] if sets[pos][0] == job0 else sets[pos][0]
            matching0[pos] = job0
            matching1[pos] = job1
            a, b = job_positions[job1]
            nxt = b if a == pos else a
            if nxt == start:
                if job1 != sets[start][0] or len(matching0) < 2:
                    raise InvariantError(f"block {block_id} does not close into an even cycle")
                break
            pos, job0 = nxt, job1

        blocks.append(
            Block(
                positions=tuple(sorted(matching0)),
                matching0=matching0,
                matching1=matching1,
            )
        )

    return BipartiteStructure(
        special_edges=tuple(special_edges),
        blocks=tuple(blocks),
        owner=tuple(owner),
    )


def precompute_contacts(
    inst: Instance, system: PrescriptionSystem, structure: BipartiteStructure
) -> BipartiteStructure:
    """
    Fill P_j^0, P_j^1 and the pairwise contact tables, and compute the
    objective of δ = all-zeros as ``baseline``.
    """
    s = inst.rows
    owner = structure.owner
    q = structure.q
    matchings = [b.matchings for b in structure.blocks]
    p_sums = [[0, 0] for _ in range(q)]
    tables: list[dict[int, list[list[Cost]]]] = [{} for _ in range(q)]
    constant: Cost = 0

    def job_at(pos: int, choice: int) -> int:
        o = owner[pos]
        return system.sets[pos][0] if o == SPECIAL else matchings[o][choice][pos]

    for i in range(structure.k - 1):
        oi, oj = owner[i], owner[i + 1]
        if oi == SPECIAL and oj == SPECIAL:
            constant += s[job_at(i, 0)][job_at(i + 1, 0)]
        elif oi == oj or oj == SPECIAL:
            for c in (0, 1):
                p_sums[oi][c] += s[job_at(i, c)][job_at(i + 1, c)]
        elif oi == SPECIAL:
            for c in (0, 1):
                p_sums[oj][c] += s[job_at(i, 0)][job_at(i + 1, c)]
        else:
            fwd = tables[oi].setdefault(oj, [[0, 0], [0, 0]])
            bwd = tables[oj].setdefault(oi, [[0, 0], [0, 0]])
            for a in (0, 1):
                for b in (0, 1):
                    w = s[job_at(i, a)][job_at(i + 1, b)]
                    fwd[a][b] += w
                    bwd[b][a] += w

    baseline = constant + sum(p[0] for p in p_sums)
    for j in range(q):
        baseline += sum(t[0][0] for nb, t in tables[j].items() if nb > j)

    blocks = tuple(
        replace(
            block,
            p0=p_sums[j][0],
            p1=p_sums[j][1],
            neighbor_contacts={
                nb: (tuple(t[0]), tuple(t[1])) for nb, t in sorted(tables[j].items())
            },
        )
        for j, block in enumerate(structure.blocks)
    )
    return replace(structure, blocks=blocks, constant=constant, baseline=baseline)


def induced_order(structure: BipartiteStructure, delta: int) -> tuple[int, ...]:
    """The permutation selected by the choice bitmask (bit j = δ of block j)."""
    order = [0] * structure.k
    for pos, job in structure.special_edges:
        order[pos] = job
    for j, block in enumerate(structure.blocks):
        chosen = block.matchings[(delta >> j) & 1]
        for pos in block.positions:
            order[pos] = chosen[pos]
    return tuple(order)


# ── Enumeration ───────────────────────────────────────────────────────────────


def enumerate_gray(structure: BipartiteStructure) -> Iterator[tuple[int, Cost]]:
    """
    Yield ``(delta, objective)`` for all 2^q choice vectors in reflected
    Gray-code order, starting from δ = 0.  Each step flips one block and
    updates the objective from that block's contact sums only.
    """
    if structure.baseline is None:
        raise ContractViolation("contacts must be precomputed before enumeration")
    p_sums = [(b.p0, b.p1) for b in structure.blocks]
    neighbors = [list(b.neighbor_contacts.items()) for b in structure.blocks]

    delta = 0
    value = structure.baseline
    yield delta, value
    for step in range(1, 1 << structure.q):
        j = (step & -step).bit_length() - 1
        old = (delta >> j) & 1
        new = old ^ 1
        change = p_sums[j][new] - p_sums[j][old]
        for nb, table in neighbors[j]:
            other = (delta >> nb) & 1
            change += table[new][other] - table[old][other]
        delta ^= 1 << j
        value += change
        yield delta, value


def _prepare(p1: Schedule, p2: Schedule) -> tuple[PrescriptionSystem, BipartiteStructure]:
    system = build_prescriptions(p1, p2)
    return system, decompose(system)


def solve_gray(
    inst: Instance, p1: Schedule, p2: Schedule, q_cap: int = DEFAULT_Q_CAP
) -> RecombinationResult:
    """Optimal recombination in O(q·2^q) after O(k·q) preprocessing."""
    started = time.perf_counter()
    if len(p1.order) != inst.k:
        raise ContractViolation(f"parents must have {inst.k} jobs, got {len(p1.order)}")
    system, structure = _prepare(p1, p2)
    if structure.q > q_cap:
        raise RecombinationTooLarge(structure.q, q_cap)
    structure = precompute_contacts(inst, system, structure)

    best_delta, best_value = 0, structure.baseline
    for delta, value in enumerate_gray(structure):
        if value < best_value:
            best_delta, best_value = delta, value

    offspring = Schedule.of(inst, induced_order(structure, best_delta))
    return RecombinationResult(
        offspring=offspring,
        solutions_enumerated=1 << structure.q,
        q=structure.q,
        elapsed=time.perf_counter() - started,
        special_edges=len(structure.special_edges),
        block_sizes=tuple(len(b.positions) for b in structure.blocks),
    )


def solve_bruteforce(
    inst: Instance, p1: Schedule, p2: Schedule, q_cap: int = DEFAULT_BRUTEFORCE_Q_CAP
) -> RecombinationResult:
    """Oracle: build every offspring and evaluate it from scratch."""
    started = time.perf_counter()
    if len(p1.order) != inst.k:
        raise ContractViolation(f"parents must have {inst.k} jobs, got {len(p1.order)}")
    system, structure = _prepare(p1, p2)
    q = structure.q
    if q > q_cap:
        raise SolverLimitExceeded("q", q, q_cap)

    best: tuple[int, ...] | None = None
    best_cost: Cost | None = None
    for bits in itertools.product((0, 1), repeat=q):
        delta = sum(bit << j for j, bit in enumerate(bits))
        order = induced_order(structure, delta)
        cost = evaluate_cost(inst, order)
        if best_cost is None or cost < best_cost:
            best, best_cost = order, cost

    return RecombinationResult(
        offspring=Schedule(order=best, cost=best_cost),
        solutions_enumerated=1 << q,
        q=q,
        elapsed=time.perf_counter() - started,
        special_edges=len(structure.special_edges),
        block_sizes=tuple(len(b.positions) for b in structure.blocks),
    )
