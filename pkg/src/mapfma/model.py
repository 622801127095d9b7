"""Problem model: graphs, instances, schedules, feasibility and delay-1 rewriting."""

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from . import _kernels


class ModelError(ValueError):
    """Raised on malformed inputs (unknown ids, partial schedules, bad turns)."""


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph over dense integer vertex ids ``0..n-1``."""

    n: int
    adjacency: tuple
    labels: tuple = ()

    @classmethod
    def from_edges(cls, n: int, edges: Iterable, labels: Sequence[str] = ()):
        nbrs = [set() for _ in range(n)]
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ModelError(f"edge ({u}, {v}) references a vertex outside 0..{n - 1}")
            if u == v:
                raise ModelError(f"self-loop on vertex {u}")
            nbrs[u].add(v)
            nbrs[v].add(u)
        labels = tuple(labels) if labels else tuple(f"v{i}" for i in range(n))
        if len(labels) != n:
            raise ModelError("label count does not match vertex count")
        return cls(n, tuple(tuple(sorted(s)) for s in nbrs), labels)

    def neighbors(self, v: int) -> tuple:
        return self.adjacency[v]

    def edges(self) -> list:
        return [(u, v) for u in range(self.n) for v in self.adjacency[u] if u < v]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def label(self, v: int) -> str:
        return self.labels[v]

    def vertex_id(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ModelError(f"unknown vertex label {label!r}") from None

    def csr(self):
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(a) for a in self.adjacency])
        indices = np.fromiter((v for a in self.adjacency for v in a), dtype=np.int64, count=int(indptr[-1]))
        return indptr, indices

    def bfs(self, source: int) -> np.ndarray:
        """Hop distances from ``source``; unreachable vertices get -1."""
        dist = np.full(self.n, -1, dtype=np.int64)
        dist[source] = 0
        queue = deque([source])
        while queue:
            u = queue.popleft()
            for w in self.adjacency[u]:
                if dist[w] < 0:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        return dist


@dataclass(frozen=True)
class AgentSpec:
    id: int
    source: int
    target: int
    label: str = ""

    @property
    def name(self) -> str:
        return self.label or f"a{self.id + 1}"


@dataclass(frozen=True)
class Instance:
    graph: Graph
    agents: tuple
    makespan_ell: int = 0

    @property
    def n_agents(self) -> int:
        return len(self.agents)

    @property
    def sources(self) -> np.ndarray:
        return np.array([a.source for a in self.agents], dtype=np.int64)

    @property
    def targets(self) -> np.ndarray:
        return np.array([a.target for a in self.agents], dtype=np.int64)

    def agent_id(self, name: str) -> int:
        for a in self.agents:
            if a.name == name:
                return a.id
        if name.isdigit() and int(name) < len(self.agents):
            return int(name)
        raise ModelError(f"unknown agent {name!r}")


class Schedule:
    """Per-agent vertex sequences of common length ``mu``.

    Stored as an immutable ``(n_agents, mu + 1)`` integer array; row ``a``
    is agent ``a``'s position at turns ``0..mu``.
    """

    __slots__ = ("positions",)

    def __init__(self, positions):
        arr = np.array(positions, dtype=np.int64)
        if arr.ndim != 2 or arr.shape[1] == 0:
            raise ModelError("schedule must be an agents x turns table with at least turn 0")
        arr.setflags(write=False)
        self.positions = arr

    @property
    def length_mu(self) -> int:
        return self.positions.shape[1] - 1

    @property
    def n_agents(self) -> int:
        return self.positions.shape[0]

    def at(self, agent: int, turn: int) -> int:
        return int(self.positions[agent, turn])

    def row(self, agent: int) -> list:
        return [int(x) for x in self.positions[agent]]

    def __eq__(self, other):
        return isinstance(other, Schedule) and self.positions.shape == other.positions.shape and bool(
            np.array_equal(self.positions, other.positions)
        )

    def __hash__(self):
        return hash((self.positions.shape, self.positions.tobytes()))

    def __repr__(self):
        return f"Schedule(mu={self.length_mu}, rows={self.positions.tolist()})"


@dataclass(frozen=True)
class DelayEvent:
    turn: int
    agents: frozenset
    forced: bool = False

    def __post_init__(self):
        object.__setattr__(self, "agents", frozenset(self.agents))
        if self.turn < 1:
            raise ModelError(f"delay turn must be >= 1, got {self.turn}")
        if not self.agents:
            raise ModelError("delay event needs at least one agent")


@dataclass(frozen=True)
class Violation:
    rule: str
    detail: str
    ids: tuple = ()


@dataclass(frozen=True)
class Verdict:
    feasible: bool
    rule: Optional[str] = None
    turn: Optional[int] = None
    agents: tuple = ()
    vertices: tuple = ()

    def __bool__(self):
        return self.feasible

    def describe(self) -> str:
        if self.feasible:
            return "feasible"
        return f"{self.rule} at turn {self.turn}: agents {list(self.agents)} vertices {list(self.vertices)}"


def validate_instance(instance: Instance) -> list:
    out = []
    g = instance.graph
    seen_ids = set()
    for i, a in enumerate(instance.agents):
        if a.id in seen_ids:
            out.append(Violation("duplicate-agent-id", f"agent id {a.id} repeated", (a.id,)))
        seen_ids.add(a.id)
        if a.id != i:
            out.append(Violation("non-dense-agent-id", f"agent at position {i} has id {a.id}", (a.id,)))
        for kind, v in (("source", a.source), ("target", a.target)):
            if not 0 <= v < g.n:
                out.append(Violation("unknown-vertex", f"{kind} {v} of agent {a.id} is not a vertex", (a.id, v)))
    for kind in ("source", "target"):
        owner = {}
        for a in instance.agents:
            v = getattr(a, kind)
            if v in owner:
                out.append(
                    Violation(f"distinct-{kind}s", f"agents {owner[v]} and {a.id} share {kind} {v}", (owner[v], a.id))
                )
            else:
                owner[v] = a.id
    for u in range(g.n):
        for v in g.adjacency[u]:
            if v == u:
                out.append(Violation("self-loop", f"vertex {u}", (u,)))
            elif u not in g.adjacency[v]:
                out.append(Violation("asymmetric-adjacency", f"{u}->{v} without reverse", (u, v)))
        if len(set(g.adjacency[u])) != len(g.adjacency[u]):
            out.append(Violation("parallel-edge", f"vertex {u} lists a neighbor twice", (u,)))
    if instance.makespan_ell < 0:
        out.append(Violation("negative-makespan", str(instance.makespan_ell)))
    return out


_RULES = {
    _kernels.BAD_SOURCE: "wrong-source",
    _kernels.BAD_MOVE: "non-adjacent-move",
    _kernels.COLLISION: "collision",
    _kernels.SWAP: "swap",
    _kernels.BAD_TARGET: "wrong-target",
}


def _require_total(instance: Instance, schedule: Schedule):
    if schedule.n_agents != instance.n_agents:
        raise ModelError(f"schedule covers {schedule.n_agents} agents, instance has {instance.n_agents}")
    pos = schedule.positions
    if pos.size and (pos.min() < 0 or pos.max() >= instance.graph.n):
        raise ModelError("schedule references a vertex outside the graph")


def check_feasible(instance: Instance, schedule: Schedule, use_numba=None) -> Verdict:
    """Check collision-freedom, stay-or-neighbor moves, no swaps, endpoints."""
    _require_total(instance, schedule)
    indptr, indices = instance.graph.csr()
    code, turn, a, b = _kernels.feasibility_scan(
        schedule.positions, instance.sources, instance.targets, indptr, indices, instance.graph.n, use_numba
    )
    if code == _kernels.OK:
        return Verdict(True)
    agents = (a,) if b < 0 else (a, b)
    pos = schedule.positions
    if code in (_kernels.BAD_MOVE, _kernels.SWAP):
        vertices = (int(pos[a, turn - 1]), int(pos[a, turn]))
    else:
        vertices = (int(pos[a, turn]),)
    return Verdict(False, _RULES[code], turn, agents, vertices)


def apply_delay1(schedule: Schedule, agents_Aprime, turn_i: int) -> Schedule:
    """Make ``agents_Aprime`` repeat their position of turn ``turn_i - 1``.

    Delayed rows become ``s'_j = s_j`` for ``j < i`` and ``s'_j = s_{j-1}``
    for ``j >= i``. The result is then amortized: if every delayed agent is
    stationary over the last turn the extra column is dropped, otherwise the
    other agents are padded with their final position. No feasibility check.
    """
    pos = schedule.positions
    n_agents, width = pos.shape
    mu = width - 1
    delayed = sorted(set(agents_Aprime))
    if not delayed:
        raise ModelError("delay-1 needs a nonempty agent set")
    for a in delayed:
        if not 0 <= a < n_agents:
            raise ModelError(f"unknown agent id {a}")
    if not 1 <= turn_i <= mu:
        raise ModelError(f"delay turn {turn_i} outside 1..{mu}")
    out = np.empty((n_agents, width + 1), dtype=np.int64)
    out[:, :width] = pos
    out[:, width] = pos[:, mu]
    out[delayed, turn_i:] = pos[delayed, turn_i - 1 :]
    if np.all(out[delayed, mu] == out[delayed, mu + 1]):
        out = out[:, :width]
    return Schedule(out)


def apply_delay_sequence(schedule: Schedule, events: Sequence[DelayEvent]) -> Schedule:
    last = 0
    for ev in events:
        if ev.turn < last:
            raise ModelError(f"delay events out of order: turn {ev.turn} after {last}")
        last = ev.turn
    for ev in events:
        schedule = apply_delay1(schedule, ev.agents, ev.turn)
    return schedule


def distance_lower_bound(instance: Instance) -> int:
    best = 0
    for a in instance.agents:
        d = int(instance.graph.bfs(a.source)[a.target])
        if d < 0:
            raise ModelError(f"target of agent {a.name} is unreachable from its source")
        best = max(best, d)
    return best


def arrival_turns(instance: Instance, schedule: Schedule) -> list:
    """First turn from which each agent stays on its target to the end."""
    pos = schedule.positions
    out = []
    for a in instance.agents:
        row = pos[a.id]
        off = np.nonzero(row != a.target)[0]
        out.append(int(off[-1]) + 1 if off.size else 0)
    return out
