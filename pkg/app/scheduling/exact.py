"""
Exact machinery for the shortest Hamiltonian path.

Held–Karp
---------
``held_karp_path`` is the free-endpoint variant of the subset DP.  It works
backwards: g[S, v] is the cheapest path that starts at v and visits exactly
the jobs of S.  Each popcount layer is one vectorized numpy step.  The
forward reconstruction always takes the smallest job that still leads to an
optimum, which yields the lexicographically smallest optimal order.

Boolean program and cutting planes
----------------------------------
The path is modelled as an assignment (x_ij: j follows i on a closed cycle)
plus one removed arc (y_ij = 1 on the arc that closes the cycle):

    min   Σ c_ij x_ij − Σ c_ij y_ij
    s.t.  Σ_j x_ij = 1  (rows)      Σ_i x_ij = 1  (cols)
          Σ y_ij = 1                x_ij − y_ij ≥ 0
          x, y binary, no diagonal variables

``build_model`` states this model with pulp; ``write_ilp`` / ``export_ilp``
emit it through ``LpProblem.writeLP`` for an external MILP solver.  No solver
runs in-process.  One round of the cutting-plane loop is:

1. ``write_ilp(inst, cuts, path)`` → solve the .lp file externally;
2. ``AssignmentSolution.from_values(k, values)`` on the solver's x/y values;
3. ``find_subtours`` → every x-cycle that does not carry the y arc;
4. ``emit_cut`` for each cycle (Σ_{i,j∈C} x_ij ≤ |C| − 1), append, repeat.

The loop stops when ``find_subtours`` returns nothing; the x-cycle minus the
y arc is then an optimal Hamiltonian path.  ``python -m app cuts`` performs
steps 2–4 and re-exports the model.
"""

import logging
import re
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
from pulp import LpBinary, LpMinimize, LpProblem, LpVariable, lpSum

from app.scheduling.errors import ContractViolation, SolverLimitExceeded
from app.scheduling.instance import Cost, Instance, check_permutation

logger = logging.getLogger(__name__)

DEFAULT_HELD_KARP_MAX_K: int = 22

_MODEL_NAME = re.compile(r"\W")
_VAR_NAME = re.compile(r"([xy])_(\d+)_(\d+)")


# ── Held–Karp ─────────────────────────────────────────────────────────────────


def held_karp_path(
    inst: Instance, max_k: int = DEFAULT_HELD_KARP_MAX_K
) -> tuple[Cost, tuple[int, ...]]:
    """Exact minimum of s(π) over all k! orders, with the lexicographically smallest optimal order."""
    k = inst.k
    if k > max_k:
        raise SolverLimitExceeded("k", k, max_k)

    s = inst.setup.astype(np.float64)
    np.fill_diagonal(s, 0.0)
    full = (1 << k) - 1
    g = np.full((1 << k, k), np.inf)
    for v in range(k):
        g[1 << v, v] = 0.0

    masks = np.arange(1 << k, dtype=np.int64)
    popcount = np.zeros(1 << k, dtype=np.int8)
    for b in range(k):
        popcount += ((masks >> b) & 1).astype(np.int8)

    for size in range(2, k + 1):
        layer = masks[popcount == size]
        for v in range(k):
            sel = layer[(layer >> v) & 1 == 1]
            rest = sel ^ (1 << v)
            g[sel, v] = (g[rest, :] + s[v][np.newaxis, :]).min(axis=1)

    best = float(g[full].min())
    order: list[int] = []
    mask = full
    v = int(np.flatnonzero(g[full] == best)[0])
    order.append(v)
    while len(order) < k:
        rest = mask ^ (1 << v)
        candidates = s[v] + g[rest]
        u = int(np.flatnonzero(candidates == g[mask, v])[0])
        order.append(u)
        mask, v = rest, u

    cost: Cost = int(round(best)) if inst.is_integral else best
    logger.debug("Held-Karp on %s (k=%d): optimum %s", inst.name, k, cost)
    return cost, tuple(order)


# ── Assignment solutions and cuts ─────────────────────────────────────────────


@dataclass(frozen=True)
class AssignmentSolution:
    """An x/y assignment: ``successor[i] = j`` iff x_ij = 1, and the y arc."""

    successor: tuple[int, ...]
    y_edge: tuple[int, int]

    def __post_init__(self) -> None:
        k = len(self.successor)
        check_permutation(self.successor, k)
        if any(j == i for i, j in enumerate(self.successor)):
            raise ContractViolation("successor map has a fixed point (x_ii = 1)")
        i, j = self.y_edge
        if not (0 <= i < k and self.successor[i] == j):
            raise ContractViolation(f"y arc {self.y_edge} is not an x arc")

    @property
    def k(self) -> int:
        return len(self.successor)

    @property
    def arcs(self) -> set[tuple[int, int]]:
        return {(i, j) for i, j in enumerate(self.successor)}

    def path(self) -> tuple[int, ...]:
        """The Hamiltonian path encoded by a subtour-free solution."""
        order = [self.y_edge[1]]
        while len(order) < self.k:
            order.append(self.successor[order[-1]])
        if len(set(order)) != self.k:
            raise ContractViolation("solution still contains subtours")
        return tuple(order)

    @classmethod
    def from_order(cls, order: Sequence[int]) -> "AssignmentSolution":
        """Encode a Hamiltonian path: close it into a cycle and mark the closing arc."""
        check_permutation(order, len(order))
        successor = [0] * len(order)
        for a, b in zip(order, order[1:]):
            successor[a] = b
        successor[order[-1]] = order[0]
        return cls(successor=tuple(successor), y_edge=(order[-1], order[0]))

    @classmethod
    def from_values(cls, k: int, values: Mapping[str, float]) -> "AssignmentSolution":
        """Read ``x_i_j`` / ``y_i_j`` (1-based) variable values from a solver."""
        successor: list[int | None] = [None] * k
        y_edges = []
        for name, value in values.items():
            m = _VAR_NAME.fullmatch(name)
            if m is None or value < 0.5:
                continue
            kind, i, j = m.group(1), int(m.group(2)) - 1, int(m.group(3)) - 1
            if not (0 <= i < k and 0 <= j < k):
                raise ContractViolation(f"variable {name} is out of range for k={k}")
            if kind == "x":
                if successor[i] is not None:
                    raise ContractViolation(f"vertex {i + 1} has two successors")
                successor[i] = j
            else:
                y_edges.append((i, j))
        if any(j is None for j in successor):
            raise ContractViolation("every vertex needs exactly one x arc")
        if len(y_edges) != 1:
            raise ContractViolation(f"expected exactly one y arc, found {len(y_edges)}")
        return cls(successor=tuple(successor), y_edge=y_edges[0])


@dataclass(frozen=True)
class SubtourCut:
    """Σ_{i≠j ∈ vertices} x_ij ≤ |vertices| − 1."""

    vertices: tuple[int, ...]

    @property
    def rhs(self) -> int:
        return len(self.vertices) - 1

    @property
    def terms(self) -> list[tuple[int, int]]:
        return [(i, j) for i in self.vertices for j in self.vertices if i != j]

    def lhs(self, sol: AssignmentSolution) -> int:
        members = set(self.vertices)
        return sum(1 for i, j in sol.arcs if i in members and j in members)

    def violated_by(self, sol: AssignmentSolution) -> bool:
        return self.lhs(sol) > self.rhs


def _cycles(successor: Sequence[int]) -> list[list[int]]:
    seen = [False] * len(successor)
    cycles = []
    for start in range(len(successor)):
        if seen[start]:
            continue
        cycle = []
        v = start
        while not seen[v]:
            seen[v] = True
            cycle.append(v)
            v = successor[v]
        cycles.append(cycle)
    return cycles


def find_subtours(sol: AssignmentSolution) -> list[list[int]]:
    """All x-cycles except the one that carries the y arc."""
    y_start = sol.y_edge[0]
    return [c for c in _cycles(sol.successor) if y_start not in c]


def emit_cut(cycle: Iterable[int], k: int) -> SubtourCut:
    vertices = tuple(sorted(set(cycle)))
    if not 2 <= len(vertices) < k:
        raise ContractViolation(
            f"a subtour cut needs between 2 and {k - 1} vertices, got {len(vertices)}"
        )
    return SubtourCut(vertices=vertices)


def add_cuts_from_solution(
    cuts: Sequence[SubtourCut], sol: AssignmentSolution
) -> list[SubtourCut]:
    """One cutting-plane round: the old cuts plus one new cut per subtour."""
    known = {c.vertices for c in cuts}
    result = list(cuts)
    for cycle in find_subtours(sol):
        cut = emit_cut(cycle, sol.k)
        if cut.vertices not in known:
            known.add(cut.vertices)
            result.append(cut)
    logger.info("Cut round: %d subtour(s), %d cut(s) in total", len(result) - len(cuts), len(result))
    return result


# ── LP export ─────────────────────────────────────────────────────────────────


def build_model(inst: Instance, cuts: Sequence[SubtourCut] = ()) -> LpProblem:
    """The Boolean program plus cuts as a pulp problem (1-based names)."""
    k = inst.k
    c = inst.rows
    arcs = [(i, j) for i in range(k) for j in range(k) if i != j]
    x = {(i, j): LpVariable(f"x_{i + 1}_{j + 1}", cat=LpBinary) for i, j in arcs}
    y = {(i, j): LpVariable(f"y_{i + 1}_{j + 1}", cat=LpBinary) for i, j in arcs}

    prob = LpProblem(_MODEL_NAME.sub("_", inst.name) or "model", LpMinimize)
    prob += (
        lpSum(c[i][j] * x[i, j] for i, j in arcs) - lpSum(c[i][j] * y[i, j] for i, j in arcs),
        "obj",
    )
    for i in range(k):
        prob += lpSum(x[i, j] for j in range(k) if j != i) == 1, f"row_{i + 1}"
    for j in range(k):
        prob += lpSum(x[i, j] for i in range(k) if i != j) == 1, f"col_{j + 1}"
    prob += lpSum(y.values()) == 1, "ysum"
    for i, j in arcs:
        prob += x[i, j] - y[i, j] >= 0, f"link_{i + 1}_{j + 1}"
    for n, cut in enumerate(cuts, start=1):
        prob += lpSum(x[a] for a in cut.terms) <= cut.rhs, f"subtour_{n}"
    return prob


def write_ilp(inst: Instance, cuts: Sequence[SubtourCut], path: Path) -> None:
    """Write the model as an LP file for an external MILP solver."""
    path.parent.mkdir(parents=True, exist_ok=True)
    build_model(inst, cuts).writeLP(str(path))
    variables, constraints = model_size(inst.k, len(cuts))
    logger.info("Wrote %s: %d binaries, %d constraints", path, variables, constraints)


def export_ilp(inst: Instance, cuts: Sequence[SubtourCut] = ()) -> str:
    """The LP file contents, for callers that return the model inline."""
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "model.lp"
        build_model(inst, cuts).writeLP(str(path))
        return path.read_text()


def model_size(k: int, cuts: int = 0) -> tuple[int, int]:
    """(variables, constraints) of the exported model."""
    return 2 * k * (k - 1), 2 * k + 1 + k * (k - 1) + cuts
