import random

import pytest

from mapfma.adversary import (
    MalfunctionPlan,
    ScriptedPriorities,
    TieBreakPolicy,
    random_plan,
    scripted_plan,
    worst_case_search,
)
from mapfma.engine import run
from mapfma.instances import gen_fig1, gen_fig2
from mapfma.model import ModelError

from helpers import grid_corpus


def test_scripted_plan_resolves_names():
    inst, _ = gen_fig1()
    plan = scripted_plan([(1, "a2")], inst)
    assert plan.events == ((1, 1),) and plan.k == 1
    assert scripted_plan([]).k == 0


def test_scripted_plan_errors():
    inst, _ = gen_fig1()
    with pytest.raises(ModelError, match="unknown agent"):
        scripted_plan([(1, "a9")], inst)
    with pytest.raises(ModelError, match="sorted"):
        scripted_plan([(3, 0), (1, 1)], inst)
    with pytest.raises(ModelError):
        scripted_plan([(0, 0)], inst)


def test_random_plan_reproducible():
    inst, sched = gen_fig2()
    a = random_plan(inst, sched, 3, seed=11)
    assert a == random_plan(inst, sched, 3, seed=11)
    assert a.k == 3 and all(1 <= t <= sched.length_mu for t, _ in a.events)
    assert random_plan(inst, sched, 0, seed=1).k == 0


def test_random_plan_may_repeat_an_agent():
    inst, sched = gen_fig1()
    plans = [random_plan(inst, sched, 3, seed=s) for s in range(20)]
    assert any(len({a for _, a in p.events}) == 1 for p in plans)


def test_policies():
    d = {0: 0, 1: 2, 2: 2}
    assert TieBreakPolicy().choose([2, 1], d) == 1
    assert TieBreakPolicy("highest-d").choose([0, 1, 2], d) == 1
    rng = random.Random(5)
    pick = TieBreakPolicy("seeded-random", 5).choose([0, 1, 2], d, rng)
    assert pick == random.Random(5).choice([0, 1, 2])
    with pytest.raises(ModelError):
        TieBreakPolicy("coin")


def test_scripted_priorities_fall_back_to_policy():
    pr = ScriptedPriorities({(2, 1): 1})
    assert pr.choose(2, 1, (0, 1), [0, 0]) == 1
    assert pr.choose(3, 1, (0, 1), [0, 0]) == 0


def test_fig1_nocomm_worst_case_is_deadlock():
    inst, sched = gen_fig1()
    best = worst_case_search(inst, sched, "nocomm", 1)
    assert best.outcome == "deadlock" and best.score == float("inf")
    res = run(inst, sched, best.plan, "nocomm", adversary=ScriptedPriorities(best.priorities))
    assert res.outcome == "deadlock"


def test_fig1_cbm_worst_case_is_three():
    inst, sched = gen_fig1()
    best = worst_case_search(inst, sched, "cbm", 1)
    assert (best.outcome, best.makespan) == ("completed", 3)


@pytest.mark.parametrize("protocol", ["nocomm", "cbm", "ccbm"])
def test_zero_malfunctions_give_mu(protocol):
    inst, sched = gen_fig1()
    best = worst_case_search(inst, sched, protocol, 0)
    assert best.makespan == sched.length_mu and best.plan.k == 0


def test_search_refuses_large_instances():
    inst, sched = gen_fig2()
    with pytest.raises(ModelError, match="too large"):
        worst_case_search(inst, sched, "cbm", 1)


def test_worst_case_dominates_every_single_plan():
    """The search's value is the maximum over explicitly enumerated plans (CCBM, k <= 2)."""
    for name, inst, sched in grid_corpus()[:40:4]:
        if sched.length_mu == 0:
            continue
        best = worst_case_search(inst, sched, "ccbm", 2)
        cells = [(t, a) for t in range(1, sched.length_mu + 1) for a in range(inst.n_agents)]
        worst = sched.length_mu
        for i, e1 in enumerate(cells):
            for e2 in cells[i:]:
                res = run(inst, sched, MalfunctionPlan((e1, e2)), "ccbm")
                worst = max(worst, res.makespan)
        assert best.makespan >= worst, name
        assert best.makespan <= sched.length_mu + 2
