"""Exact joint-state BFS solver for small instances."""

from dataclasses import dataclass
from itertools import product
from typing import Optional

from .model import Instance, ModelError, Schedule, Verdict, check_feasible, distance_lower_bound

DEFAULT_STATE_LIMIT = 2_000_000


class SearchTooLarge(ModelError):
    pass


def joint_successors(graph, config):
    """Collision-free, swap-free successor configurations in deterministic order.

    Agents vary in id-major order; each agent's options are sorted by vertex
    id (staying included).
    """
    options = [sorted((v,) + graph.adjacency[v]) for v in config]
    for nxt in product(*options):
        if len(set(nxt)) < len(nxt):
            continue
        if _has_swap(config, nxt):
            continue
        yield nxt


def _has_swap(cur, nxt):
    where = {v: a for a, v in enumerate(cur)}
    for a, (u, v) in enumerate(zip(cur, nxt)):
        if u != v:
            b = where.get(v)
            if b is not None and b != a and nxt[b] == u:
                return True
    return False


def solve_optimal(instance: Instance, horizon_cap: int, state_limit: int = DEFAULT_STATE_LIMIT) -> Optional[Schedule]:
    """Minimum-makespan feasible schedule, or ``None`` if none within ``horizon_cap``."""
    g = instance.graph
    if g.n ** instance.n_agents > state_limit:
        raise SearchTooLarge(f"|V|^|A| = {g.n}^{instance.n_agents} exceeds the limit {state_limit}")
    start = tuple(int(s) for s in instance.sources)
    goal = tuple(int(t) for t in instance.targets)
    if start == goal:
        return Schedule([[v] for v in start])
    parent = {start: None}
    frontier = [start]
    for depth in range(1, horizon_cap + 1):
        nxt_frontier = []
        for cfg in frontier:
            for nxt in joint_successors(g, cfg):
                if nxt in parent:
                    continue
                parent[nxt] = cfg
                if nxt == goal:
                    return _unwind(parent, goal)
                nxt_frontier.append(nxt)
        if not nxt_frontier:
            return None
        frontier = nxt_frontier
    return None


def _unwind(parent, goal):
    path = []
    cur = goal
    while cur is not None:
        path.append(cur)
        cur = parent[cur]
    path.reverse()
    return Schedule([[cfg[a] for cfg in path] for a in range(len(goal))])


@dataclass(frozen=True)
class WitnessVerdict:
    status: str
    violation: Optional[Verdict] = None


def verify_optimal_witness(instance: Instance, schedule: Schedule) -> WitnessVerdict:
    verdict = check_feasible(instance, schedule)
    if not verdict:
        return WitnessVerdict("undetermined", verdict)
    if schedule.length_mu == distance_lower_bound(instance):
        return WitnessVerdict("optimal-by-witness")
    return WitnessVerdict("undetermined")
