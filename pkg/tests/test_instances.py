import pytest

from mapfma.instances import gen_fig1, gen_fig2, gen_grid, grid_graph
from mapfma.model import ModelError, check_feasible, distance_lower_bound, validate_instance
from mapfma.solver import solve_optimal


def test_fig1_shape():
    inst, sched = gen_fig1()
    assert inst.graph.labels == ("u1", "u2", "u3", "u4")
    assert [a.name for a in inst.agents] == ["a1", "a2"]
    assert inst.makespan_ell == 2 and check_feasible(inst, sched)


def test_fig2_shape():
    inst, sched = gen_fig2()
    g = inst.graph
    assert g.n == 42
    assert inst.n_agents == 9
    assert sched.length_mu == inst.makespan_ell == 9
    assert distance_lower_bound(inst) == 9
    assert not validate_instance(inst)
    assert check_feasible(inst, sched)
    # triangle, and each critical vertex touches its triangle corner
    assert {(0, 1), (1, 2), (0, 2)} <= set(g.edges())
    for i in (1, 2, 3):
        c = g.vertex_id(f"c{i}")
        assert i - 1 in g.adjacency[c] and g.degree(c) == 4


def test_fig2_black_agents_wait_once_before_the_critical_vertex():
    inst, sched = gen_fig2()
    lab = inst.graph.labels
    for a in inst.agents[3:]:
        row = [lab[v] for v in sched.row(a.id)]
        assert row[5] == row[6]  # the turn-6 wait
        assert sum(x == y for x, y in zip(row, row[1:])) == 1
    # critical vertices are held by black agents during turns 7 and 8
    for t in (7, 8):
        held = {lab[sched.at(a.id, t)] for a in inst.agents[3:]}
        assert {"c1", "c2", "c3"} <= held


def test_colored_agents_on_triangle_turns_4_and_5():
    inst, sched = gen_fig2()
    lab = inst.graph.labels
    assert [lab[sched.at(a, 4)] for a in range(3)] == ["v1", "v2", "v3"]
    assert [lab[sched.at(a, 5)] for a in range(3)] == ["v3", "v1", "v2"]


def test_grid_graph():
    g = grid_graph(2, 3)
    assert g.n == 6 and len(g.edges()) == 7
    assert g.labels[4] == "r1c1"


def test_gen_grid_deterministic_and_optimal():
    a = gen_grid(3, 3, 3, seed=4)
    b = gen_grid(3, 3, 3, seed=4)
    assert a == b
    assert solve_optimal(a, 8).length_mu == a.makespan_ell
    assert not validate_instance(a)


def test_gen_grid_too_small():
    with pytest.raises(ModelError):
        gen_grid(1, 3, 2, seed=0)
