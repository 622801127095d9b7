"""Shared corpus and independent oracles for the test suite.

The oracles here deliberately avoid the package's own search and kernel
code: they are written directly from the definitions.
"""

import functools
from itertools import product

from mapfma.formats import write_instance
from mapfma.instances import gen_fig1, gen_fig2, gen_grid
from mapfma.model import ModelError
from mapfma.solver import solve_optimal

GRID_SHAPES = [(1, 3), (1, 4), (2, 2), (2, 3), (3, 3)]
SEEDS = range(24)


@functools.lru_cache(maxsize=None)
def grid_corpus():
    """Seeded grids up to 3x3 with 1-3 agents and optimum <= 6, deduplicated."""
    seen = set()
    out = []
    for rows, cols in GRID_SHAPES:
        for n_agents in (1, 2, 3):
            if rows * cols < 2 * n_agents:
                continue
            for seed in SEEDS:
                try:
                    inst = gen_grid(rows, cols, n_agents, seed, horizon_cap=6)
                except ModelError:
                    continue
                key = write_instance(inst)
                if key in seen:
                    continue
                seen.add(key)
                sched = solve_optimal(inst, 6)
                out.append((f"grid{rows}x{cols}-a{n_agents}-s{seed}", inst, sched))
    return tuple(out)


@functools.lru_cache(maxsize=None)
def corpus():
    return (("fig1",) + gen_fig1(), ("fig2",) + gen_fig2()) + grid_corpus()


# -- oracles ------------------------------------------------------------------


def definitional_delay1(rows, delayed, i):
    """apply_delay1 straight from the definition, on lists of lists."""
    mu = len(rows[0]) - 1
    out = []
    for a, row in enumerate(rows):
        if a in delayed:
            new = [row[j] if j < i else row[j - 1] for j in range(mu + 2)]
        else:
            new = list(row) + [row[mu]]
        out.append(new)
    if all(out[a][mu] == out[a][mu + 1] for a in delayed):
        out = [r[: mu + 1] for r in out]
    return out


def spell_replay(rows, n_vertices):
    """Per-turn vertex counters from an executed position table (lists)."""
    counts = [0] * n_vertices
    history = []
    for t in range(len(rows[0])):
        for row in rows:
            if t == 0 or row[t] != row[t - 1]:
                counts[row[t]] += 1
        history.append(list(counts))
    return history


def _legal_step(adj, cur, nxt):
    if len(set(nxt)) != len(nxt):
        return False
    for a, (u, v) in enumerate(zip(cur, nxt)):
        if u != v and v not in adj[u]:
            return False
        for b, (x, y) in enumerate(zip(cur, nxt)):
            if a != b and u != v and x == v and y == u:
                return False
    return True


def enumerate_min_makespan(instance, max_len):
    """Smallest L <= max_len admitting a feasible schedule, by depth-first
    enumeration of joint move sequences; ``None`` if there is none.
    """
    adj = [set(n) for n in instance.graph.adjacency]
    start = tuple(a.source for a in instance.agents)
    goal = tuple(a.target for a in instance.agents)

    @functools.lru_cache(maxsize=None)
    def reachable(cfg, steps):
        if cfg == goal:
            return True
        if steps == 0:
            return False
        options = [sorted(adj[v] | {v}) for v in cfg]
        return any(reachable(nxt, steps - 1) for nxt in product(*options) if _legal_step(adj, cfg, nxt))

    for length in range(max_len + 1):
        if reachable(start, length):
            return length
    return None
