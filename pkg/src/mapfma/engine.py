"""Turn-by-turn execution of a schedule under malfunctions.

A turn has three phases. In the decision phase every agent announces its
next vertex from its live schedule and forced malfunctions are applied. In
the modification phase the protocol inserts delay-1 operations until the
set of movers is consistent. In the action phase the movers advance.

Live schedules are rewritten with ``apply_delay1`` only, so the executed
prefix always equals the live schedule up to the current turn.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .adversary import MalfunctionPlan, ScriptedPriorities, TieBreakPolicy
from .model import Instance, ModelError, Schedule, apply_delay1, check_feasible
from . import _kernels

PROTOCOLS = ("nocomm", "cbm", "ucbm", "ccbm")


class IntegrityError(RuntimeError):
    """A protocol invariant that a legal run can never break was broken."""


@dataclass(frozen=True)
class TurnPhaseRecord:
    turn: int
    decisions: tuple  # (agent, kind, vertex) with kind in move | stay | malfunction
    modifications: tuple  # (agent, reason)
    actions: tuple  # (agent, from_vertex, to_vertex)


@dataclass
class RunResult:
    final_schedule: Schedule
    makespan: Optional[int]
    trace: list
    outcome: str
    outcome_turn: int
    max_delay: int = 0
    delays: tuple = ()
    counter_history: list = field(default_factory=list)
    unconsumed: tuple = ()

    @property
    def completed(self) -> bool:
        return self.outcome == "completed"


def ccbm_expected_counts(instance: Instance, schedule: Schedule) -> np.ndarray:
    """``out[a, i]``: spell number of vertex ``s_i(a)`` at turn ``i``, counting ``a``'s own spell."""
    expected, _ = _kernels.spell_counts(schedule.positions, instance.graph.n)
    return expected


def ucbm_priority(d_a: int, d_b: int, policy: TieBreakPolicy, a: int = 0, b: int = 1, rng=None) -> int:
    """Winner of a contention between ``a`` and ``b``: fewer delays first, then the policy."""
    if d_a != d_b:
        return a if d_a < d_b else b
    return policy.choose((a, b), {a: d_a, b: d_b}, rng)


class Simulation:
    def __init__(
        self,
        instance: Instance,
        schedule: Schedule,
        protocol: str,
        policy: Optional[TieBreakPolicy] = None,
        adversary=None,
        budget: Optional[int] = None,
        k_hint: int = 0,
        check_input: bool = True,
    ):
        if protocol not in PROTOCOLS:
            raise ModelError(f"unknown protocol {protocol!r}")
        if check_input:
            verdict = check_feasible(instance, schedule)
            if not verdict:
                raise ModelError(f"input schedule is infeasible: {verdict.describe()}")
        self.instance = instance
        self.original = schedule
        self.protocol = protocol
        self.policy = policy or TieBreakPolicy()
        self.rng = self.policy.rng()
        self.adversary = adversary or ScriptedPriorities(policy=self.policy)
        n_vertices = instance.graph.n
        self.budget = budget if budget is not None else schedule.length_mu + k_hint + 2 * n_vertices
        self.live = schedule
        self.turn = 0
        self.delays = [0] * instance.n_agents
        self.expected = ccbm_expected_counts(instance, schedule)
        self.counters = np.zeros(n_vertices, dtype=np.int64)
        np.add.at(self.counters, schedule.positions[:, 0], 1)
        self.counter_history = [self.counters.copy()]
        self.trace = []
        self.outcome = None
        self.outcome_turn = 0
        self.idle_turns = 0
        if schedule.length_mu == 0:
            self.outcome = "completed"

    # -- state -----------------------------------------------------------
    def clone(self) -> "Simulation":
        other = object.__new__(Simulation)
        other.__dict__.update(self.__dict__)
        other.delays = list(self.delays)
        other.counters = self.counters.copy()
        other.counter_history = list(self.counter_history)
        other.trace = list(self.trace)
        other.rng = type(self.rng)()
        other.rng.setstate(self.rng.getstate())
        return other

    @property
    def done(self) -> bool:
        return self.outcome is not None

    def positions(self, turn: Optional[int] = None) -> np.ndarray:
        return self.live.positions[:, self.turn if turn is None else turn]

    def step_index(self, agent: int) -> int:
        """Index into the original schedule of the agent's next scheduled position."""
        return min(self.turn + 1 - self.delays[agent], self.original.length_mu)

    def steps(self) -> tuple:
        mu = self.original.length_mu
        return tuple(min(self.turn - d, mu) for d in self.delays)

    def state_key(self):
        """Everything the remaining run depends on, apart from the turn number."""
        if self.protocol == "cbm":
            flags = tuple(d > 0 for d in self.delays)
        elif self.protocol == "ucbm":
            flags = tuple(self.delays)
        else:
            flags = ()
        return (self.positions().tobytes(), self.steps(), flags, self.idle_turns)

    # -- one turn --------------------------------------------------------
    def intents(self, turn: int) -> np.ndarray:
        return self.live.positions[:, turn]

    def step(self, forced=(), adversary=None):
        if self.done:
            raise ModelError("simulation already finished")
        adversary = adversary or self.adversary
        t = self.turn + 1
        prev = self.positions().copy()
        steps_before = self.steps()

        # decision phase
        for a in forced:
            self.live = apply_delay1(self.live, {a}, t)
            self.delays[a] += 1
        forced_set = set(forced)
        intent = self.intents(t)
        decisions = []
        for a in range(self.instance.n_agents):
            v = int(intent[a])
            kind = "malfunction" if a in forced_set else ("stay" if v == prev[a] else "move")
            decisions.append((a, kind, v))

        # modification phase
        mods = self._modify(t, prev, intent, adversary)
        if mods:
            self.live = apply_delay1(self.live, {a for a, _ in mods}, t)
            for a, _ in mods:
                self.delays[a] += 1

        # action phase
        new = self.live.positions[:, t]
        actions = tuple((a, int(prev[a]), int(new[a])) for a in range(len(new)) if new[a] != prev[a])
        self._check_action(t, prev, new)
        for _, _, v in actions:
            self.counters[v] += 1
        self.counter_history.append(self.counters.copy())
        self.trace.append(TurnPhaseRecord(t, tuple(decisions), tuple(mods), actions))
        self.turn = t
        stalled = not forced and self.steps() == steps_before
        self.idle_turns = self.idle_turns + 1 if stalled else 0
        self._update_outcome()

    def _update_outcome(self):
        t = self.turn
        if t >= self.live.length_mu:
            self.outcome, self.outcome_turn = "completed", t
            return
        if self.detect_deadlock():
            self.outcome, self.outcome_turn = "deadlock", t
            return
        if t >= self.budget:
            self.outcome, self.outcome_turn = "budget-exhausted", t

    def detect_deadlock(self) -> bool:
        """No agent advanced along its schedule for |A|+1 malfunction-free turns.

        A stalled turn leaves positions and schedule steps unchanged. The
        only protocol state that can still evolve is the delay bookkeeping
        (CBM's delayed flag, tie-break draws); |A|+1 stalled turns in a row
        rule out each of those producing a move.
        """
        if self.outcome == "completed":
            return False
        return self.idle_turns >= self.instance.n_agents + 1

    def _check_action(self, t, prev, new):
        if len(set(new.tolist())) < len(new):
            raise IntegrityError(f"turn {t}: executed positions collide")
        where = {int(v): a for a, v in enumerate(prev)}
        for a in range(len(new)):
            if new[a] != prev[a]:
                if int(new[a]) not in self.instance.graph.adjacency[int(prev[a])]:
                    raise IntegrityError(f"turn {t}: agent {a} jumps to a non-neighbor")
                b = where.get(int(new[a]))
                if b is not None and b != a and new[b] == prev[a]:
                    raise IntegrityError(f"turn {t}: agents {a} and {b} swap")

    # -- modification --------------------------------------------------------
    def _modify(self, t, prev, intent, adversary):
        mods = []
        movers = {a for a in range(len(prev)) if intent[a] != prev[a]}
        if self.protocol == "ccbm":
            for a in sorted(movers):
                if not self.ccbm_may_count(a, int(intent[a])):
                    mods.append((a, "counter-wait"))
            movers -= {a for a, _ in mods}
        occupant = {int(v): a for a, v in enumerate(prev)}
        while True:
            delayed = self._resolve(t, prev, intent, movers, occupant, adversary)
            if not delayed:
                break
            mods.extend(delayed)
            movers -= {a for a, _ in delayed}
        return sorted(mods)

    def _resolve(self, t, prev, intent, movers, occupant, adversary):
        groups = {}
        for a in movers:
            groups.setdefault(int(intent[a]), []).append(a)
        out = []
        for v in sorted(groups):
            entrants = sorted(groups[v])
            b = occupant.get(v)
            if b is not None and b not in movers:
                out += [(a, "unhealthy-target") for a in entrants]
                continue
            if b is not None:
                swappers = [a for a in entrants if intent[b] == prev[a]]
                if swappers:
                    # both ends of a swap wait; the partner is caught next pass
                    out += [(a, "swap-blocked") for a in swappers]
                    continue
            if len(entrants) > 1:
                out += self._contention(t, v, entrants, adversary)
        return out

    def _contention(self, t, v, entrants, adversary):
        d = self.delays
        if self.protocol == "nocomm":
            win = adversary.choose(t, v, tuple(entrants), d, self.rng)
            return [(a, "adversary") for a in entrants if a != win]
        if self.protocol == "ccbm":
            raise IntegrityError(f"turn {t}: {len(entrants)} agents pass the counter check for vertex {v}")
        if self.protocol == "cbm":
            late = [a for a in entrants if d[a] > 0]
            if not late:
                return [(a, "unhealthy-target") for a in entrants]
            out = [(a, "priority-loss") for a in entrants if d[a] == 0]
            if len(late) > 1:
                win = self.policy.choose(late, d, self.rng)
                out += [(a, "tie-break") for a in late if a != win]
            return out
        least = min(d[a] for a in entrants)
        best = [a for a in entrants if d[a] == least]
        win = best[0] if len(best) == 1 else self.policy.choose(best, d, self.rng)
        return [(a, "priority-loss" if d[a] > least else "tie-break") for a in entrants if a != win]

    # -- protocol predicates ---------------------------------------------------
    def ccbm_may_count(self, agent: int, vertex: int) -> bool:
        """Counter half of the CCBM move test: the agent would be the expected-numbered visitor."""
        step = self.step_index(agent)
        if int(self.original.positions[agent, step]) != vertex:
            raise IntegrityError(f"agent {agent} live intent diverges from its original step {step}")
        need = int(self.expected[agent, step])
        have = int(self.counters[vertex])
        if have >= need:
            raise IntegrityError(f"vertex {vertex} counter {have} already reached expected {need} of agent {agent}")
        return have + 1 == need

    def result(self) -> RunResult:
        executed = Schedule(self.live.positions[:, : self.turn + 1])
        completed = self.outcome == "completed"
        return RunResult(
            final_schedule=executed if not completed else self.live,
            makespan=self.live.length_mu if completed else None,
            trace=list(self.trace),
            outcome=self.outcome or "running",
            outcome_turn=self.outcome_turn,
            max_delay=max(self.delays, default=0),
            delays=tuple(self.delays),
            counter_history=list(self.counter_history),
        )


def cbm_is_healthy(sim: Simulation, agent: int, decided_delay=frozenset()) -> bool:
    """Healthiness of ``agent``'s next vertex during the decision phase of the coming turn.

    Healthy when the vertex's occupant leaves it this turn without having
    announced a delay, or when it is empty and nobody else heads for it.
    """
    t = sim.turn + 1
    prev = sim.positions()
    intent = sim.intents(t)
    v = int(intent[agent])
    heading = {a for a in range(len(prev)) if a != agent and int(intent[a]) == v and a not in decided_delay}
    holders = [b for b in range(len(prev)) if int(prev[b]) == v and b != agent]
    if holders:
        b = holders[0]
        return int(intent[b]) != v and b not in decided_delay and not heading
    return not heading


def ccbm_may_move(sim: Simulation, agent: int, vacating=frozenset()) -> bool:
    """Counter check plus the free-vertex check; ``vacating`` lists agents leaving this turn."""
    t = sim.turn + 1
    prev = sim.positions()
    u = int(sim.intents(t)[agent])
    if u == int(prev[agent]):
        return True
    if not sim.ccbm_may_count(agent, u):
        return False
    holders = [b for b in range(len(prev)) if int(prev[b]) == u]
    return not holders or holders[0] in vacating


def run(
    instance: Instance,
    schedule: Schedule,
    plan: MalfunctionPlan = MalfunctionPlan(),
    protocol: str = "cbm",
    policy: Optional[TieBreakPolicy] = None,
    budget: Optional[int] = None,
    adversary=None,
) -> RunResult:
    sim = Simulation(instance, schedule, protocol, policy, adversary=adversary, budget=budget, k_hint=plan.k)
    events = list(plan.events)
    while not sim.done:
        t = sim.turn + 1
        forced = [a for tt, a in events if tt == t]
        sim.step(forced=forced)
    res = sim.result()
    res.unconsumed = tuple((tt, a) for tt, a in events if tt > sim.turn)
    if res.completed:
        verdict = check_feasible(instance, res.final_schedule)
        if not verdict:
            raise IntegrityError(f"completed run produced an infeasible schedule: {verdict.describe()}")
    return res
