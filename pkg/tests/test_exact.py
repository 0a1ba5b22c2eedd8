"""
Tests for Held–Karp, the LP export and the subtour-cut machinery.
"""

import itertools
import random
import re

import numpy as np
import pytest
from pulp import value

from app.scheduling.errors import ContractViolation, SolverLimitExceeded
from app.scheduling.exact import (
    AssignmentSolution,
    SubtourCut,
    add_cuts_from_solution,
    build_model,
    emit_cut,
    export_ilp,
    find_subtours,
    held_karp_path,
    model_size,
    write_ilp,
)
from app.scheduling.instance import Instance, evaluate_cost
from tests.helpers import random_instance


def _brute_force(inst):
    """All k! orders at once; argmin returns the lexicographically first optimum."""
    perms = np.array(list(itertools.permutations(range(inst.k))))
    costs = inst.setup[perms[:, :-1], perms[:, 1:]].sum(axis=1)
    best = int(np.argmin(costs))
    return evaluate_cost(inst, perms[best]), tuple(int(v) for v in perms[best])


# ── held_karp_path ────────────────────────────────────────────────────────────


def test_held_karp_two_jobs():
    inst = Instance(name="k2", setup=np.array([[0, 8], [3, 0]]))
    assert held_karp_path(inst) == (3, (1, 0))


def test_held_karp_matches_factorial_search():
    rng = random.Random(1000)
    for _ in range(1000):
        inst = random_instance(rng, rng.randint(4, 8))
        cost, order = held_karp_path(inst)
        assert cost == _brute_force(inst)[0]
        assert evaluate_cost(inst, order) == cost


def test_held_karp_returns_lexicographically_smallest_optimum():
    rng = random.Random(5)
    for _ in range(50):
        inst = random_instance(rng, 6, high=3)
        assert held_karp_path(inst) == _brute_force(inst)


def test_held_karp_constant_weights():
    inst = Instance(name="flat", setup=np.full((7, 7), 5, dtype=np.int64))
    cost, order = held_karp_path(inst)
    assert cost == 30
    assert order == tuple(range(7))


def test_held_karp_float_weights():
    setup = np.array([[0.0, 0.5, 2.5], [1.5, 0.0, 0.25], [0.75, 3.0, 0.0]])
    cost, order = held_karp_path(Instance(name="f", setup=setup))
    assert cost == pytest.approx(0.75)
    assert order == (0, 1, 2)


def test_held_karp_refuses_large_k():
    inst = random_instance(random.Random(0), 9)
    with pytest.raises(SolverLimitExceeded) as exc:
        held_karp_path(inst, max_k=8)
    assert "8" in str(exc.value)


# ── build_model / export_ilp ──────────────────────────────────────────────────


def _assign(model, sol):
    """Load an assignment solution into the model's variables."""
    x_arcs, y_arc = sol.arcs, sol.y_edge
    for name, var in model.variablesDict().items():
        kind, i, j = name.split("_")
        arc = (int(i) - 1, int(j) - 1)
        var.varValue = int(arc in x_arcs if kind == "x" else arc == y_arc)


def _violated(model):
    return sorted(name for name, row in model.constraints.items() if not row.valid())


_ROW_NAME = re.compile(r"^\s*((?:row|col|link|subtour)_\d+(?:_\d+)?|ysum):", re.MULTILINE)


def test_model_counts_for_three_jobs():
    inst = random_instance(random.Random(3), 3)
    model = build_model(inst)
    variables = model.variables()
    assert len(variables) == 12
    assert all(v.isBinary() for v in variables)
    assert "x_1_1" not in {v.name for v in variables}
    assert len(model.constraints) == 13
    assert model_size(3) == (12, 13)
    assert len(_ROW_NAME.findall(export_ilp(inst))) == 13


def test_model_constraint_names():
    inst = random_instance(random.Random(3), 3)
    names = set(build_model(inst).constraints)
    assert {"row_1", "row_3", "col_1", "col_3", "ysum", "link_1_2", "link_3_2"} <= names
    assert not any(n.startswith("subtour_") for n in names)


def test_model_objective_is_path_cost_on_hamiltonian_paths():
    inst = Instance(name="tiny", setup=np.array([[0, 2, 3], [4, 0, 5], [6, 7, 0]]))
    model = build_model(inst)
    for order in itertools.permutations(range(3)):
        _assign(model, AssignmentSolution.from_order(order))
        assert _violated(model) == []
        assert value(model.objective) == evaluate_cost(inst, order)


def test_model_rejects_missing_or_extra_y_arc():
    inst = random_instance(random.Random(5), 4)
    model = build_model(inst)
    _assign(model, AssignmentSolution.from_order((0, 1, 2, 3)))
    model.variablesDict()["y_4_1"].varValue = 0
    assert _violated(model) == ["ysum"]
    model.variablesDict()["y_2_3"].varValue = 1
    model.variablesDict()["y_4_1"].varValue = 1
    assert _violated(model) == ["ysum"]


def test_model_cut_separates_subtour_solution():
    inst = random_instance(random.Random(4), 5)
    sol = AssignmentSolution(successor=(1, 2, 0, 4, 3), y_edge=(2, 0))
    [subtour] = find_subtours(sol)
    model = build_model(inst, [emit_cut(subtour, 5)])
    _assign(model, sol)
    assert _violated(model) == ["subtour_1"]
    _assign(model, AssignmentSolution.from_order((0, 1, 2, 3, 4)))
    assert _violated(model) == []


def test_model_reexport_adds_one_row_per_cut():
    inst = random_instance(random.Random(4), 5)
    base = build_model(inst)
    with_cut = build_model(inst, [emit_cut([1, 2], 5)])
    assert set(with_cut.constraints) - set(base.constraints) == {"subtour_1"}

    text = export_ilp(inst, [emit_cut([1, 2], 5)])
    assert re.search(r"subtour_1:[^\n]*x_2_3[^\n]*x_3_2[^\n]*<= 1", text)
    assert "Minimize" in text and "Subject To" in text
    assert text.rstrip().endswith("End")
    assert export_ilp(inst, [emit_cut([1, 2], 5)]) == text


def test_write_ilp_creates_file(tmp_path):
    inst = random_instance(random.Random(6), 4, name="w4")
    path = tmp_path / "nested" / "w4.lp"
    write_ilp(inst, [emit_cut([0, 1], 4)], path)
    text = path.read_text()
    assert text == export_ilp(inst, [emit_cut([0, 1], 4)])
    assert len(_ROW_NAME.findall(text)) == model_size(4, 1)[1]


def test_model_size_large_instance():
    assert model_size(36)[0] == 2 * 36 * 35
    assert model_size(36, cuts=4)[1] == model_size(36)[1] + 4


# ── AssignmentSolution / find_subtours / cuts ─────────────────────────────────


def test_two_two_cycles():
    sol = AssignmentSolution(successor=(1, 0, 3, 2), y_edge=(1, 0))
    assert find_subtours(sol) == [[2, 3]]


def test_hamiltonian_cycle_has_no_subtours():
    sol = AssignmentSolution.from_order((2, 0, 3, 1))
    assert find_subtours(sol) == []
    assert sol.path() == (2, 0, 3, 1)


def test_disjoint_two_cycles_count():
    k = 10
    successor = tuple(i + 1 if i % 2 == 0 else i - 1 for i in range(k))
    sol = AssignmentSolution(successor=successor, y_edge=(0, 1))
    assert len(find_subtours(sol)) == k // 2 - 1


def test_path_refuses_solution_with_subtours():
    sol = AssignmentSolution(successor=(1, 0, 3, 2), y_edge=(1, 0))
    with pytest.raises(ContractViolation):
        sol.path()


def test_assignment_solution_validation():
    with pytest.raises(ContractViolation):
        AssignmentSolution(successor=(0, 2, 1), y_edge=(1, 2))
    with pytest.raises(ContractViolation):
        AssignmentSolution(successor=(1, 2, 0), y_edge=(0, 2))


def test_from_values_reads_solver_output():
    values = {"x_1_2": 1.0, "x_2_1": 1.0, "x_3_4": 0.9999, "x_4_3": 1, "x_1_3": 0.0, "y_2_1": 1.0}
    sol = AssignmentSolution.from_values(4, values)
    assert sol.successor == (1, 0, 3, 2)
    assert sol.y_edge == (1, 0)
    with pytest.raises(ContractViolation):
        AssignmentSolution.from_values(4, {"x_1_2": 1, "x_2_1": 1})


def test_emit_cut_smallest_case():
    cut = emit_cut([3, 2], 5)
    assert cut.vertices == (2, 3)
    assert cut.terms == [(2, 3), (3, 2)]
    assert cut.rhs == 1


def test_emit_cut_bounds():
    with pytest.raises(ContractViolation):
        emit_cut([1], 5)
    with pytest.raises(ContractViolation):
        emit_cut(range(5), 5)


def test_planted_cycles_recovered_and_cut():
    rng = random.Random(100)
    for _ in range(100):
        k = rng.randint(5, 14)
        vertices = list(range(k))
        rng.shuffle(vertices)
        cycles, rest = [], vertices
        while len(rest) >= 2:
            size = rng.randint(2, len(rest))
            if len(rest) - size == 1:
                size = len(rest)
            cycles.append(rest[:size])
            rest = rest[size:]
        successor = [0] * k
        for cycle in cycles:
            for a, b in zip(cycle, cycle[1:] + cycle[:1]):
                successor[a] = b
        y_cycle = cycles[0]
        sol = AssignmentSolution(successor=tuple(successor), y_edge=(y_cycle[0], y_cycle[1]))

        found = find_subtours(sol)
        assert sorted(sorted(c) for c in found) == sorted(sorted(c) for c in cycles[1:])
        for cycle in found:
            cut = emit_cut(cycle, k)
            assert cut.lhs(sol) == len(cycle)
            assert cut.violated_by(sol)
            path_sol = AssignmentSolution.from_order(tuple(range(k)))
            assert not cut.violated_by(path_sol)


def test_add_cuts_from_solution_deduplicates():
    sol = AssignmentSolution(successor=(1, 0, 3, 2, 5, 4), y_edge=(0, 1))
    cuts = add_cuts_from_solution([], sol)
    assert [c.vertices for c in cuts] == [(2, 3), (4, 5)]
    again = add_cuts_from_solution(cuts, sol)
    assert again == cuts
    assert all(isinstance(c, SubtourCut) for c in again)
