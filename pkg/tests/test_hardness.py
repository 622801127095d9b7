import itertools

import pytest

from mapfma.hardness import (
    CnfFormula,
    build_hardness_instance,
    check_hardness_structure,
    expected_agent_count,
    repair_from_assignment,
)
from mapfma.model import Graph, Instance, ModelError, apply_delay1, apply_delay_sequence, check_feasible, validate_instance

ONE = CnfFormula(1, (((1, True), (1, True), (1, False)),))
TWO = CnfFormula(2, (((1, True), (2, False), (2, True)), ((1, False), (2, False), (1, True))))
PICKY = CnfFormula(2, (((1, True), (2, True), (2, True)), ((1, False), (1, False), (2, False))))


def repaired(formula, assignment):
    inst, sched, layout, event = build_hardness_instance(formula)
    broken = apply_delay1(sched, event.agents, event.turn)
    return inst, apply_delay_sequence(broken, repair_from_assignment(layout, inst, broken, assignment))


def test_dimacs_round_trip():
    assert CnfFormula.from_dimacs(TWO.to_dimacs()) == TWO


@pytest.mark.parametrize(
    "text, where",
    [
        ("p cnf 2 1\n1 -2 0\n", "line 2"),
        ("p cnf 2 1\n1 -3 2 0\n", "line 2"),
        ("1 2 3 0\n", "line 1"),
        ("p cnf 2 1\n1 2 x 0\n", "line 2"),
        ("p cnf 2 2\n1 -2 2 0\n", "line 2"),
    ],
)
def test_dimacs_errors_are_located(text, where):
    with pytest.raises(ModelError, match=where):
        CnfFormula.from_dimacs(text)


def test_satisfying_assignments_exhaustive():
    assert list(PICKY.satisfying_assignments()) == [(True, False), (False, True)]


@pytest.mark.parametrize(
    "formula, vertices, edges, agents, ell",
    [(ONE, 967, 1015, 75, 22), (TWO, 5166, 5360, 278, 39)],
)
def test_construction_sizes_frozen(formula, vertices, edges, agents, ell):
    inst, sched, _, event = build_hardness_instance(formula)
    assert (inst.graph.n, len(inst.graph.edges()), inst.n_agents) == (vertices, edges, agents)
    assert inst.n_agents == expected_agent_count(formula.n, formula.m)
    assert inst.makespan_ell == sched.length_mu == ell == 14 * formula.n + 3 * formula.m + 5
    assert event.turn == 1 and event.forced


@pytest.mark.parametrize("formula", [ONE, TWO])
def test_structure_audit_and_initial_schedule(formula):
    inst, sched, layout, _ = build_hardness_instance(formula)
    assert check_hardness_structure(layout, inst) == []
    assert not validate_instance(inst)
    assert check_feasible(inst, sched)


def test_malfunction_alone_breaks_the_schedule():
    inst, sched, _, event = build_hardness_instance(ONE)
    assert not check_feasible(inst, apply_delay1(sched, event.agents, event.turn))


@pytest.mark.parametrize("formula", [ONE, TWO, PICKY])
def test_every_assignment_behaves(formula):
    for bits in itertools.product((True, False), repeat=formula.n):
        inst, out = repaired(formula, bits)
        ok = bool(check_feasible(inst, out)) and out.length_mu == inst.makespan_ell
        assert ok == formula.satisfied_by(bits), bits


def test_audit_catches_a_missing_edge():
    inst, _, layout, _ = build_hardness_instance(ONE)
    g = inst.graph
    u, v = g.edges()[0]
    cut = Graph.from_edges(g.n, [e for e in g.edges() if e != (u, v)], g.labels)
    problems = check_hardness_structure(layout, Instance(cut, inst.agents, inst.makespan_ell))
    assert problems


def test_wrong_assignment_length():
    inst, sched, layout, event = build_hardness_instance(ONE)
    with pytest.raises(ModelError):
        repair_from_assignment(layout, inst, sched, (True, False))
