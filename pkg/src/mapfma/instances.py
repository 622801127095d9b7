"""Fixed example instances and seeded grid instances."""

import random

from .model import AgentSpec, Graph, Instance, ModelError, Schedule
from .solver import solve_optimal


def gen_fig1():
    """Star-like 4-vertex instance whose 2-turn schedule breaks under one malfunction."""
    labels = ["u1", "u2", "u3", "u4"]
    graph = Graph.from_edges(4, [(0, 1), (1, 2), (1, 3)], labels)
    agents = (AgentSpec(0, 0, 1, "a1"), AgentSpec(1, 3, 2, "a2"))
    schedule = Schedule([[0, 0, 1], [3, 1, 2]])
    return Instance(graph, agents, 2), schedule


def gen_fig2():
    """Triangle with three arms; one malfunction costs two extra turns under no communication.

    Arm ``i`` hangs off triangle vertex ``v_i`` through the critical vertex
    ``c_i``. It carries an auxiliary path ``x_i1..x_i7, c_i, y_i1, y_i2``
    with two black agents starting on ``x_i1``/``x_i2`` and a colored branch
    ``q_i1-q_i2-q_i3-c_i``. Colored agent ``a_i`` starts on ``q_i1`` and
    ends on ``q_j1`` of arm ``j = i - 1`` (cyclically).
    """
    labels = ["v1", "v2", "v3"]
    edges = [(0, 1), (1, 2), (2, 0)]
    ids = {}

    def add(name):
        ids[name] = len(labels)
        labels.append(name)
        return ids[name]

    for i in (1, 2, 3):
        aux = [add(f"x{i}_{k}") for k in range(1, 8)]
        c = add(f"c{i}")
        y = [add(f"y{i}_1"), add(f"y{i}_2")]
        q = [add(f"q{i}_{k}") for k in range(1, 4)]
        chain = aux + [c] + y
        edges += list(zip(chain, chain[1:]))
        edges += [(q[0], q[1]), (q[1], q[2]), (q[2], c), (c, i - 1)]
    graph = Graph.from_edges(len(labels), edges, labels)

    agents = []
    rows = []
    for i in (1, 2, 3):
        j = 3 if i == 1 else i - 1
        path = [f"q{i}_1", f"q{i}_2", f"q{i}_3", f"c{i}", f"v{i}", f"v{j}", f"c{j}", f"q{j}_3", f"q{j}_2", f"q{j}_1"]
        rows.append([labels.index(p) for p in path])
        agents.append(AgentSpec(i - 1, rows[-1][0], rows[-1][-1], f"a{i}"))
    for i in (1, 2, 3):
        chain = [f"x{i}_{k}" for k in range(1, 8)] + [f"c{i}", f"y{i}_1", f"y{i}_2"]
        # bottom agent: x2 -> y2 (far end); top agent: x1 -> y1
        for name, start in ((f"b{i}_1", 1), (f"b{i}_2", 0)):
            walk = chain[start : start + 9]
            path = walk[:6] + [walk[5]] + walk[6:]
            rows.append([ids[p] for p in path])
            agents.append(AgentSpec(len(agents), rows[-1][0], rows[-1][-1], name))
    return Instance(graph, tuple(agents), 9), Schedule(rows)


def grid_graph(rows: int, cols: int) -> Graph:
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    labels = [f"r{r}c{c}" for r in range(rows) for c in range(cols)]
    return Graph.from_edges(rows * cols, edges, labels)


def gen_grid(rows: int, cols: int, num_agents: int, seed: int, horizon_cap: int = 8, retries: int = 50):
    """Random 4-connected grid instance with its optimal makespan as ``makespan_ell``."""
    if rows * cols < 2 * num_agents:
        raise ModelError("grid too small for distinct sources and targets")
    graph = grid_graph(rows, cols)
    rng = random.Random(seed)
    for _ in range(retries):
        sources = rng.sample(range(graph.n), num_agents)
        targets = rng.sample(range(graph.n), num_agents)
        agents = tuple(AgentSpec(i, s, t, f"a{i + 1}") for i, (s, t) in enumerate(zip(sources, targets)))
        inst = Instance(graph, agents, 0)
        sched = solve_optimal(inst, horizon_cap)
        if sched is not None:
            return Instance(graph, agents, sched.length_mu)
    raise ModelError(f"no solvable grid instance within cap {horizon_cap} after {retries} draws")
