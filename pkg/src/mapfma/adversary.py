"""Malfunction plans, tie-break policies, conflict priorities and worst-case search."""

import random
from dataclasses import dataclass, field
from typing import Optional

from .model import Instance, ModelError, Schedule

POLICY_KINDS = ("lowest-id", "highest-d", "seeded-random")


@dataclass(frozen=True)
class MalfunctionPlan:
    events: tuple = ()

    def __post_init__(self):
        events = tuple((int(t), int(a)) for t, a in self.events)
        object.__setattr__(self, "events", events)
        for (t0, _), (t1, _) in zip(events, events[1:]):
            if t1 < t0:
                raise ModelError("malfunction turns must be nondecreasing")

    @property
    def k(self) -> int:
        return len(self.events)

    def at(self, turn: int) -> list:
        return [a for t, a in self.events if t == turn]


@dataclass(frozen=True)
class TieBreakPolicy:
    kind: str = "lowest-id"
    seed: int = 0

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise ModelError(f"unknown tie-break policy {self.kind!r}")

    def rng(self) -> random.Random:
        return random.Random(self.seed)

    def choose(self, candidates, delays, rng: Optional[random.Random] = None) -> int:
        """Winner among ``candidates`` (agent ids)."""
        cands = sorted(candidates)
        if self.kind == "highest-d":
            return max(cands, key=lambda a: (delays[a], -a))
        if self.kind == "seeded-random":
            return (rng or self.rng()).choice(cands)
        return cands[0]

    def describe(self) -> str:
        return f"{self.kind} seed {self.seed}"


@dataclass
class ScriptedPriorities:
    """No-communication conflict resolution: ``(turn, vertex) -> winner``, else the policy."""

    choices: dict = field(default_factory=dict)
    policy: TieBreakPolicy = field(default_factory=TieBreakPolicy)

    def choose(self, turn, vertex, contenders, delays, rng=None):
        win = self.choices.get((turn, vertex))
        if win is not None and win in contenders:
            return win
        return self.policy.choose(contenders, delays, rng)


def scripted_plan(spec, instance: Optional[Instance] = None) -> MalfunctionPlan:
    events = []
    for turn, agent in spec:
        if isinstance(agent, str):
            if instance is None:
                raise ModelError("agent names need an instance to resolve")
            agent = instance.agent_id(agent)
        if turn < 1:
            raise ModelError(f"malfunction turn {turn} < 1")
        if instance is not None and not 0 <= agent < instance.n_agents:
            raise ModelError(f"unknown agent id {agent}")
        events.append((turn, agent))
    if any(b[0] < a[0] for a, b in zip(events, events[1:])):
        raise ModelError("malfunction events must be sorted by turn")
    return MalfunctionPlan(tuple(events))


def random_plan(instance: Instance, schedule: Schedule, k: int, seed: int) -> MalfunctionPlan:
    rng = random.Random(seed)
    mu = max(schedule.length_mu, 1)
    events = sorted((rng.randint(1, mu), rng.randrange(instance.n_agents)) for _ in range(k))
    return MalfunctionPlan(tuple(events))


@dataclass(frozen=True)
class WorstCase:
    plan: MalfunctionPlan
    priorities: dict
    outcome: str
    makespan: Optional[int]

    @property
    def score(self) -> float:
        return float("inf") if self.outcome != "completed" else float(self.makespan)


class _Recorder:
    """Adversary that replays a prefix of choices and then takes the first option."""

    def __init__(self, prefix):
        self.prefix = list(prefix)
        self.used = []
        self.options = []

    def choose(self, turn, vertex, contenders, delays, rng=None):
        opts = sorted(contenders)
        i = len(self.used)
        pick = self.prefix[i] if i < len(self.prefix) else opts[0]
        self.used.append(pick)
        self.options.append((turn, vertex, opts))
        return pick


def worst_case_search(instance, schedule, protocol, k, budget=None, policy=None, max_agents=4, max_mu=12, max_k=3):
    """Exhaustive adaptive adversary: malfunction placements and, under no
    communication, every priority choice. Deadlock ranks above any makespan.
    """
    from . import engine

    if instance.n_agents > max_agents or schedule.length_mu > max_mu or k > max_k:
        raise ModelError(
            f"instance too large for exhaustive search (|A|={instance.n_agents}, mu={schedule.length_mu}, k={k})"
        )
    policy = policy or TieBreakPolicy()
    sim0 = engine.Simulation(instance, schedule, protocol, policy, budget=budget, k_hint=k)
    memo = {}

    def better(x, y):
        # larger score wins; ties broken by lexicographically smaller plan then priorities
        if x is None:
            return y
        if y.score != x.score:
            return y if y.score > x.score else x
        kx = (x.plan.events, sorted(x.priorities.items()))
        ky = (y.plan.events, sorted(y.priorities.items()))
        return y if ky < kx else x

    def finish(sim, plan_events, prios):
        res = sim.result()
        return WorstCase(MalfunctionPlan(tuple(plan_events)), dict(prios), res.outcome, res.makespan)

    def explore(sim, left, plan_events, prios):
        if sim.done:
            return finish(sim, plan_events, prios)
        key = (sim.turn, sim.state_key(), left)
        if key in memo:
            cached = memo[key]
            return WorstCase(
                MalfunctionPlan(tuple(plan_events) + cached.plan.events),
                {**prios, **cached.priorities},
                cached.outcome,
                cached.makespan,
            )
        best = None
        turn = sim.turn + 1
        for forced in _multisets(instance.n_agents, left):
            prefixes = [[]]
            while prefixes:
                prefix = prefixes.pop()
                child = sim.clone()
                rec = _Recorder(prefix)
                child.step(forced=forced, adversary=rec)
                for i in range(len(prefix), len(rec.options)):
                    for alt in rec.options[i][2][1:]:
                        prefixes.append(rec.used[:i] + [alt])
                new_prios = dict(prios)
                for (t, v, opts), pick in zip(rec.options, rec.used):
                    new_prios[(t, v)] = pick
                events = plan_events + [(turn, a) for a in forced]
                cand = explore(child, left - len(forced), events, new_prios)
                best = better(best, cand)
        suffix = WorstCase(
            MalfunctionPlan(best.plan.events[len(plan_events) :]),
            {kk: vv for kk, vv in best.priorities.items() if kk[0] >= turn},
            best.outcome,
            best.makespan,
        )
        memo[key] = suffix
        return best

    return explore(sim0, k, [], {})


def _multisets(n_agents, left):
    out = [()]
    for size in range(1, left + 1):
        out.extend(_combos(n_agents, size))
    return out


def _combos(n, size, start=0):
    if size == 0:
        yield ()
        return
    for a in range(start, n):
        for rest in _combos(n, size - 1, a):
            yield (a,) + rest
