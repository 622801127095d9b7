import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mapfma.instances import gen_fig1, gen_fig2, grid_graph
from mapfma.model import AgentSpec, Graph, Instance, Schedule, check_feasible
from mapfma.solver import SearchTooLarge, joint_successors, solve_optimal, verify_optimal_witness

from helpers import enumerate_min_makespan


def test_fig1_optimum_is_two():
    inst, sched = gen_fig1()
    out = solve_optimal(inst, 6)
    assert out.length_mu == 2
    assert out == sched


def test_single_agent_on_path():
    g = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    inst = Instance(g, (AgentSpec(0, 0, 3),))
    assert solve_optimal(inst, 5).row(0) == [0, 1, 2, 3]


def test_cap_too_small_returns_none():
    inst, _ = gen_fig1()
    assert solve_optimal(inst, 1) is None


def test_corner_crossing_matches_enumeration():
    g = grid_graph(3, 3)
    inst = Instance(g, (AgentSpec(0, 0, 8), AgentSpec(1, 8, 0)))
    out = solve_optimal(inst, 6)
    assert check_feasible(inst, out)
    assert out.length_mu == enumerate_min_makespan(inst, 6) == 4


def test_start_equals_goal():
    inst = Instance(grid_graph(2, 2), (AgentSpec(0, 1, 1),))
    assert solve_optimal(inst, 3).length_mu == 0


def test_guard_refuses_large_products():
    inst, _ = gen_fig2()
    with pytest.raises(SearchTooLarge):
        solve_optimal(inst, 9)


def test_successor_order_is_id_major_vertex_minor():
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    succ = list(joint_successors(g, (0, 2)))
    assert succ == [(0, 1), (0, 2), (1, 2)]


def test_witness_verdicts():
    inst, sched = gen_fig2()
    assert verify_optimal_witness(inst, sched).status == "optimal-by-witness"
    inst1, _ = gen_fig1()
    slow = Schedule([[0, 0, 0, 1], [3, 3, 1, 2]])
    assert verify_optimal_witness(inst1, slow).status == "undetermined"
    bad = verify_optimal_witness(inst1, Schedule([[0, 1, 1], [3, 1, 2]]))
    assert bad.status == "undetermined" and bad.violation.rule == "collision"


def small_instances():
    shapes = st.sampled_from([(1, 4), (2, 2), (2, 3), (2, 4)])

    def build(shape, data):
        g = grid_graph(*shape)
        k = data.draw(st.integers(1, 2))
        verts = data.draw(st.permutations(range(g.n)))
        tgts = data.draw(st.permutations(range(g.n)))
        return Instance(g, tuple(AgentSpec(i, verts[i], tgts[i]) for i in range(k)))

    return st.tuples(shapes, st.data()).map(lambda x: build(*x))


@settings(max_examples=120, deadline=None)
@given(small_instances())
def test_solver_agrees_with_enumeration(inst):
    out = solve_optimal(inst, 6)
    want = enumerate_min_makespan(inst, 6)
    assert (out.length_mu if out else None) == want
    if out is not None:
        assert check_feasible(inst, out)


@settings(max_examples=60, deadline=None)
@given(small_instances(), st.integers(0, 5))
def test_raising_cap_never_lengthens(inst, cap):
    low = solve_optimal(inst, cap)
    high = solve_optimal(inst, cap + 2)
    if low is not None:
        assert high.length_mu == low.length_mu
