import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mapfma.instances import gen_fig1
from mapfma.model import (
    AgentSpec,
    DelayEvent,
    Graph,
    Instance,
    ModelError,
    Schedule,
    apply_delay1,
    apply_delay_sequence,
    arrival_turns,
    check_feasible,
    distance_lower_bound,
    validate_instance,
)

from helpers import definitional_delay1


@pytest.fixture
def fig1():
    return gen_fig1()


def path_instance(n_vertices, agents):
    g = Graph.from_edges(n_vertices, [(i, i + 1) for i in range(n_vertices - 1)])
    return Instance(g, tuple(AgentSpec(i, s, t) for i, (s, t) in enumerate(agents)))


def test_graph_rejects_bad_edges():
    with pytest.raises(ModelError, match="self-loop"):
        Graph.from_edges(2, [(1, 1)])
    with pytest.raises(ModelError, match="outside"):
        Graph.from_edges(2, [(0, 2)])


def test_graph_basics(fig1):
    g = fig1[0].graph
    assert g.edges() == [(0, 1), (1, 2), (1, 3)]
    assert g.degree(1) == 3
    assert g.vertex_id("u3") == 2
    assert g.bfs(0).tolist() == [0, 1, 2, 2]
    indptr, indices = g.csr()
    assert indptr.tolist() == [0, 1, 4, 5, 6]
    assert indices.tolist() == [1, 0, 2, 3, 1, 1]


def test_unreachable_vertex_has_distance_minus_one():
    g = Graph.from_edges(3, [(0, 1)])
    assert g.bfs(0).tolist() == [0, 1, -1]


def test_validate_instance_flags_shared_targets():
    inst = path_instance(3, [(0, 2), (1, 2)])
    rules = {v.rule for v in validate_instance(inst)}
    assert rules == {"distinct-targets"}


def test_fig1_schedule_is_feasible(fig1):
    inst, sched = fig1
    assert check_feasible(inst, sched)
    assert sched.length_mu == 2
    assert distance_lower_bound(inst) == 2


@pytest.mark.parametrize(
    "rows, rule, turn",
    [
        ([[1, 1, 1], [3, 1, 2]], "wrong-source", 0),
        ([[0, 2, 1], [3, 3, 2]], "non-adjacent-move", 1),
        ([[0, 1, 1], [3, 1, 2]], "collision", 1),
        ([[0, 0, 1], [3, 1, 1]], "collision", 2),
        ([[0, 0, 0], [3, 1, 2]], "wrong-target", 2),
    ],
)
def test_feasibility_rules(fig1, rows, rule, turn):
    verdict = check_feasible(fig1[0], Schedule(rows))
    assert not verdict
    assert (verdict.rule, verdict.turn) == (rule, turn)


def test_swap_is_infeasible():
    inst = path_instance(2, [(0, 1), (1, 0)])
    verdict = check_feasible(inst, Schedule([[0, 1], [1, 0]]))
    assert (verdict.rule, verdict.turn, verdict.agents) == ("swap", 1, (0, 1))


def test_rotation_on_a_cycle_is_feasible():
    g = Graph.from_edges(3, [(0, 1), (1, 2), (2, 0)])
    inst = Instance(g, tuple(AgentSpec(i, i, (i + 1) % 3) for i in range(3)))
    assert check_feasible(inst, Schedule([[0, 1], [1, 2], [2, 0]]))


def test_partial_schedule_is_a_model_error(fig1):
    with pytest.raises(ModelError):
        check_feasible(fig1[0], Schedule([[0, 0, 1]]))


def test_delay_fold_on_fig1(fig1):
    inst, sched = fig1
    out = apply_delay_sequence(sched, [DelayEvent(1, {1}), DelayEvent(2, {0})])
    assert out.positions.tolist() == [[0, 0, 0, 1], [3, 3, 1, 2]]
    assert check_feasible(inst, out)


def test_delay_on_parked_agent_prunes():
    sched = Schedule([[0, 1, 1, 1], [3, 2, 1, 0]])
    out = apply_delay1(sched, {0}, 3)
    assert out == sched


def test_delay_twice_at_same_turn_shifts_twice():
    sched = Schedule([[0, 1, 2]])
    out = apply_delay_sequence(sched, [DelayEvent(1, {0}), DelayEvent(1, {0})])
    assert out.row(0) == [0, 0, 0, 1, 2]


@pytest.mark.parametrize("turn", [0, 3])
def test_delay_turn_out_of_range(fig1, turn):
    with pytest.raises(ModelError, match="outside"):
        apply_delay1(fig1[1], {0}, turn)


def test_delay_unknown_agent(fig1):
    with pytest.raises(ModelError, match="unknown agent"):
        apply_delay1(fig1[1], {5}, 1)


def test_delay_event_validation():
    with pytest.raises(ModelError):
        DelayEvent(0, {1})
    with pytest.raises(ModelError):
        DelayEvent(1, set())


def test_schedule_is_immutable(fig1):
    with pytest.raises(ValueError):
        fig1[1].positions[0, 0] = 3


def test_arrival_turns(fig1):
    inst, sched = fig1
    assert arrival_turns(inst, sched) == [2, 2]


tables = st.integers(1, 4).flatmap(
    lambda n_agents: st.integers(1, 6).flatmap(
        lambda mu: st.lists(
            st.lists(st.integers(0, 7), min_size=mu + 1, max_size=mu + 1), min_size=n_agents, max_size=n_agents
        )
    )
)


@settings(max_examples=300, deadline=None)
@given(tables, st.data())
def test_delay1_matches_definition(rows, data):
    mu = len(rows[0]) - 1
    delayed = data.draw(st.sets(st.integers(0, len(rows) - 1), min_size=1))
    i = data.draw(st.integers(1, mu))
    out = apply_delay1(Schedule(rows), delayed, i)
    assert out.positions.tolist() == definitional_delay1(rows, delayed, i)
    # untouched prefix
    assert np.array_equal(out.positions[:, :i], np.array(rows)[:, :i])
    assert out.length_mu in (mu, mu + 1)
