"""3-SAT reduction: an instance where keeping the makespan after one malfunction
encodes a satisfying assignment.

Vertex naming (1-indexed, as labels):

* ``u{j}_{p}_{q}``  gadget copy ``j``, path ``p`` in ``1..4n+2``, position ``q`` in ``1..3``
* ``S{j}_{p}_{k}`` / ``T{j}_{p}_{k}``  blocking paths hanging off ``u{j}_{p}_1``, ``k`` counted from the attachment
* ``v{i}``  the red-agent path; ``SP{i}_{k}`` / ``TP{i}_{k}`` its blocking paths
* ``Py{i}_{k}``, ``Pn{i}_{k}``, ``Qy{i}_{k}``, ``Qn{i}_{k}``  variable-agent lead-in and lead-out paths
"""

import itertools
from dataclasses import dataclass, field

from .model import AgentSpec, DelayEvent, Graph, Instance, ModelError, Schedule, Violation


@dataclass(frozen=True)
class CnfFormula:
    n: int
    clauses: tuple

    def __post_init__(self):
        clauses = tuple(tuple((int(v), bool(pol)) for v, pol in c) for c in self.clauses)
        object.__setattr__(self, "clauses", clauses)
        for c in clauses:
            if len(c) != 3:
                raise ModelError(f"clause {c} does not have exactly 3 literals")
            for v, _ in c:
                if not 1 <= v <= self.n:
                    raise ModelError(f"variable {v} outside 1..{self.n}")

    @property
    def m(self) -> int:
        return len(self.clauses)

    def satisfied_by(self, assignment) -> bool:
        return all(any(assignment[v - 1] == pol for v, pol in c) for c in self.clauses)

    def satisfying_assignments(self):
        """Exhaustive enumeration; intended for n <= 10."""
        for bits in itertools.product((True, False), repeat=self.n):
            if self.satisfied_by(bits):
                yield bits

    @classmethod
    def from_dimacs(cls, text: str):
        n = m = None
        clauses, cur = [], []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("c") or line.startswith("%"):
                continue
            if line.startswith("p"):
                parts = line.split()
                if n is not None or len(parts) != 4 or parts[1] != "cnf" or not (parts[2] + parts[3]).isdigit():
                    raise ModelError(f"line {lineno}: malformed or repeated header {line!r}")
                n, m = int(parts[2]), int(parts[3])
                continue
            if n is None:
                raise ModelError(f"line {lineno}: clause before 'p cnf' header")
            for tok in line.split():
                try:
                    lit = int(tok)
                except ValueError:
                    raise ModelError(f"line {lineno}: non-integer literal {tok!r}") from None
                if lit == 0:
                    if len(cur) != 3:
                        raise ModelError(f"line {lineno}: clause {len(clauses) + 1} has {len(cur)} literals, need 3")
                    clauses.append(tuple(cur))
                    cur = []
                elif abs(lit) > n:
                    raise ModelError(f"line {lineno}: variable {abs(lit)} outside 1..{n}")
                else:
                    cur.append((abs(lit), lit > 0))
        if n is None:
            raise ModelError("line 0: missing 'p cnf' header")
        if cur:
            raise ModelError(f"line {lineno}: last clause is not terminated by 0")
        if len(clauses) != m:
            raise ModelError(f"line {lineno}: header declares {m} clauses, found {len(clauses)}")
        return cls(n, tuple(clauses))

    def to_dimacs(self) -> str:
        lines = [f"p cnf {self.n} {self.m}"]
        for c in self.clauses:
            lines.append(" ".join(str(v if pol else -v) for v, pol in c) + " 0")
        return "\n".join(lines) + "\n"


@dataclass
class HardnessLayout:
    n: int
    m: int
    ell: int
    u: dict = field(default_factory=dict)
    gadget_S: dict = field(default_factory=dict)
    gadget_T: dict = field(default_factory=dict)
    path_P: list = field(default_factory=list)
    path_S: dict = field(default_factory=dict)
    path_T: dict = field(default_factory=dict)
    P_yes: dict = field(default_factory=dict)
    P_no: dict = field(default_factory=dict)
    Q_yes: dict = field(default_factory=dict)
    Q_no: dict = field(default_factory=dict)
    nu: dict = field(default_factory=dict)
    mu: dict = field(default_factory=dict)
    lam: dict = field(default_factory=dict)
    tau: dict = field(default_factory=dict)
    kappa: dict = field(default_factory=dict)
    intro: int = -1
    # blocking agents: id -> (source path key, source offset, target path key, target offset)
    blocking: dict = field(default_factory=dict)
    clause_index: dict = field(default_factory=dict)
    clause_vertices: dict = field(default_factory=dict)

    @property
    def gadgets(self) -> int:
        return 2 * self.n + self.m

    def v(self, i: int) -> int:
        return self.path_P[i - 1]

    def blocking_path(self, key):
        kind, *rest = key
        table = {"gS": self.gadget_S, "gT": self.gadget_T, "PS": self.path_S, "PT": self.path_T}[kind]
        return table[tuple(rest) if len(rest) > 1 else rest[0]]


def expected_agent_count(n: int, m: int) -> int:
    g = 2 * n + m
    return 4 * n + m + 1 + 3 * g * (g + 1) // 2 + 4 * n * g + (10 * n + 3 * m) * g


def build_hardness_instance(formula: CnfFormula):
    """Return ``(instance, schedule, layout, malfunction)``; the malfunction is ``DelayEvent(1, {a})``."""
    n, m = formula.n, formula.m
    G = 2 * n + m
    ell = 14 * n + 3 * m + 5
    cols = 4 * n + 2
    lay = HardnessLayout(n, m, ell)
    labels = []
    edges = []

    def add(name):
        labels.append(name)
        return len(labels) - 1

    def chain(prefix, count):
        vs = [add(f"{prefix}_{k}") for k in range(1, count + 1)]
        edges.extend(zip(vs, vs[1:]))
        return vs

    for j in range(1, G + 1):
        for p in range(1, cols + 1):
            for q in (1, 2, 3):
                lay.u[j, p, q] = add(f"u{j}_{p}_{q}")
    for j in range(1, G + 1):
        u = lambda p, q: lay.u[j, p, q]
        for p in range(1, cols + 1):
            edges += [(u(p, 1), u(p, 2)), (u(p, 2), u(p, 3))]
        for p in range(1, cols):
            edges += [(u(p, 1), u(p + 1, 1)), (u(p, 3), u(p + 1, 3))]
        for q in range(1, 2 * n + 1):
            edges += [(u(2 * q - 1, 1), u(2 * q, 3)), (u(2 * q, 3), u(2 * q + 1, 1))]
            edges += [(u(2 * q - 1, 1), u(2 * q, 2)), (u(2 * q, 2), u(2 * q + 1, 1))]
        for p in range(1, cols):
            lay.gadget_S[j, p] = chain(f"S{j}_{p}", ell + 1)
            lay.gadget_T[j, p] = chain(f"T{j}_{p}", ell + 1)
            edges += [(u(p, 1), lay.gadget_S[j, p][0]), (u(p, 1), lay.gadget_T[j, p][0])]
    for j in range(1, G):
        for p in range(1, cols):
            edges.append((lay.u[j, p, 3], lay.u[j + 1, p, 1]))

    lay.path_P = chain("v", G + 2)
    for i in range(1, G + 1):
        edges.append((lay.v(i + 1), lay.u[i, 1, 1]))
    for i in range(1, G + 2):
        lay.path_S[i] = chain(f"SP{i}", ell + 2)
        lay.path_T[i] = chain(f"TP{i}", ell + 2)
        edges += [(lay.v(i), lay.path_S[i][0]), (lay.v(i), lay.path_T[i][0])]

    for i in range(1, n + 1):
        cy, cn = 4 * (i - 1) + 2, 4 * i
        lay.P_yes[i] = chain(f"Py{i}", 4 * n + 3)
        lay.P_no[i] = chain(f"Pn{i}", 4 * n + 3)
        edges += [(lay.P_yes[i][-1], lay.u[1, cy, 1]), (lay.P_no[i][-1], lay.u[1, cn, 1])]
        lay.Q_yes[i] = chain(f"Qy{i}", 4 * n + 2)
        lay.Q_no[i] = chain(f"Qn{i}", 4 * n + 2)
        edges += [(lay.Q_yes[i][0], lay.u[G, cy, 3]), (lay.Q_no[i][0], lay.u[G, cn, 3])]

    graph = Graph.from_edges(len(labels), edges, labels)

    agents = []
    rows = []

    def agent(name, row):
        if len(row) < ell + 1:
            row = row + [row[-1]] * (ell + 1 - len(row))
        if len(row) != ell + 1:
            raise AssertionError(f"route of {name} has {len(row) - 1} turns, expected {ell}")
        agents.append(AgentSpec(len(agents), row[0], row[-1], name))
        rows.append(row)
        return agents[-1].id

    for i in range(1, n + 1):
        for tag, col, P, Q, roster in (
            ("nu", 4 * (i - 1) + 2, lay.P_yes[i], lay.Q_yes[i], lay.nu),
            ("mu", 4 * i, lay.P_no[i], lay.Q_no[i], lay.mu),
        ):
            route = list(P)
            for j in range(1, G + 1):
                route += [lay.u[j, col, 1], lay.u[j, col, 2], lay.u[j, col, 3]]
            route += list(Q)
            roster[i] = agent(f"{tag}{i}", route)

    def red_route(start, gadget, dips, dip_level):
        route = [lay.v(start), lay.v(start + 1)]
        for l in range(2, 4 * n + 4):
            route.append(lay.u[gadget, l - 1, dip_level if l in dips else 1])
        return route

    for i in range(1, n + 1):
        lay.lam[i] = agent(f"lam{i}", red_route(i, i, {4 * (i - 1) + 3, 4 * i + 1}, 3))
    for j, clause in enumerate(formula.clauses, 1):
        idx = set()
        for var, pol in clause:
            idx.add(4 * (var - 1) + 3 if pol else 4 * var + 1)
        lay.clause_index[j] = frozenset(idx)
        lay.clause_vertices[j] = frozenset(lay.u[n + j, l - 1, 3] for l in idx)
        lay.kappa[j] = agent(f"kap{j}", red_route(n + j, n + j, idx, 3))
    for i in range(1, n + 1):
        lay.tau[i] = agent(f"tau{i}", red_route(n + m + i, n + m + i, {4 * (i - 1) + 3, 4 * i + 1}, 2))
    lay.intro = agent("a", [lay.v(G + 1), lay.v(G + 2)])

    def blocker(name, s_key, s_off, t_key, t_off, attach):
        s_path = lay.blocking_path(s_key)
        t_path = lay.blocking_path(t_key)
        route = [s_path[k - 1] for k in range(s_off, 0, -1)] + [attach] + [t_path[k - 1] for k in range(1, t_off + 1)]
        aid = agent(name, route)
        lay.blocking[aid] = (s_key, s_off, t_key, t_off)

    for j in range(1, G + 1):
        hub = lay.u[j, 4 * n + 1, 1]
        for i in range(1, 3 * j + 1):
            blocker(f"bA{j}_{i}", ("gS", j, 4 * n + 1), 4 * n + 2 + i, ("gT", j, 4 * n + 1), 10 * n + 3 * m + 3 - i, hub)
    for j in range(1, G + 1):
        for p in range(1, 4 * n + 1):
            blocker(
                f"bB{j}_{p}",
                ("gS", j, p),
                4 * n + 2 + 3 * j,
                ("gT", j, p),
                10 * n + 3 * m + 3 - 3 * j,
                lay.u[j, p, 1],
            )
    for i in range(1, G + 1):
        for q in range(1, 10 * n + 3 * m + 1):
            blocker(f"bC{i}_{q}", ("PS", i + 1), q + 2, ("PT", i + 1), 14 * n + 3 * m + 3 - q, lay.v(i + 1))

    instance = Instance(graph, tuple(agents), ell)
    return instance, Schedule(rows), lay, DelayEvent(1, {lay.intro}, forced=True)


def repair_from_assignment(layout: HardnessLayout, instance: Instance, schedule: Schedule, assignment):
    """Delay-1 operations that absorb the turn-1 malfunction of the introduce-delay agent.

    Every red agent waits one turn at the start; the variable agent of each
    chosen literal waits one turn; the select, verify and clause agents then
    park on a gadget vertex that the delayed variable agents leave free at
    the turn their gadget's blocking agents sweep through.
    """
    n, m = layout.n, layout.m
    if len(assignment) != n:
        raise ModelError(f"assignment covers {len(assignment)} variables, formula has {n}")
    waits = {}

    def hold(agent, first, last):
        for t in range(first, last + 1):
            waits.setdefault(t, set()).add(agent)

    first = {layout.nu[i] if assignment[i - 1] else layout.mu[i] for i in range(1, n + 1)}
    first |= set(layout.lam.values()) | set(layout.tau.values()) | set(layout.kappa.values())
    waits[1] = first
    for i in range(1, n + 1):
        dip = 4 * (i - 1) + 3 if assignment[i - 1] else 4 * i + 1
        hold(layout.lam[i], dip + 2, 4 * n + 2 + 3 * i)
    for j in range(1, m + 1):
        true_dips = sorted(l for l in layout.clause_index[j] if _literal_true(l, assignment))
        dip = true_dips[0] if true_dips else min(layout.clause_index[j])
        hold(layout.kappa[j], dip + 2, 4 * n + 2 + 3 * (n + j))
    for i in range(1, n + 1):
        dip = 4 * i + 1 if assignment[i - 1] else 4 * (i - 1) + 3
        hold(layout.tau[i], dip + 1, 4 * n + 2 + 3 * (n + m + i) - 1)
    return [DelayEvent(t, frozenset(ags)) for t, ags in sorted(waits.items())]


def _literal_true(dip_index: int, assignment) -> bool:
    # positive literal of x_i sits at 4(i-1)+3, negative at 4i+1
    if dip_index % 4 == 3:
        return bool(assignment[(dip_index - 3) // 4])
    return not assignment[(dip_index - 1) // 4 - 1]


def check_hardness_structure(layout: HardnessLayout, instance: Instance) -> list:
    """Audit degree bound, gadget edge families, blocking path lengths and blocking-agent offsets."""
    out = []
    g = instance.graph
    n, G, ell = layout.n, layout.gadgets, layout.ell
    cols = 4 * n + 2

    def need(u, v, family):
        if v not in g.adjacency[u]:
            out.append(Violation("missing-edge", f"{family}: {g.label(u)}-{g.label(v)}", (u, v)))

    worst = max((g.degree(v) for v in range(g.n)), default=0)
    if worst > 10:
        out.append(Violation("max-degree", f"maximum degree {worst} > 10"))
    for j in range(1, G + 1):
        u = lambda p, q: layout.u[j, p, q]
        for p in range(1, cols + 1):
            need(u(p, 1), u(p, 2), "gadget path")
            need(u(p, 2), u(p, 3), "gadget path")
        for p in range(1, cols):
            need(u(p, 1), u(p + 1, 1), "row-1 chain")
            need(u(p, 3), u(p + 1, 3), "row-3 chain")
        for q in range(1, 2 * n + 1):
            need(u(2 * q - 1, 1), u(2 * q, 3), "row-3 diagonal")
            need(u(2 * q, 3), u(2 * q + 1, 1), "row-3 diagonal")
            need(u(2 * q - 1, 1), u(2 * q, 2), "row-2 diagonal")
            need(u(2 * q, 2), u(2 * q + 1, 1), "row-2 diagonal")
        if j < G:
            for p in range(1, cols):
                need(u(p, 3), layout.u[j + 1, p, 1], "inter-gadget")
    for (j, p), path in list(layout.gadget_S.items()) + list(layout.gadget_T.items()):
        _audit_path(g, path, ell, layout.u[j, p, 1], out)
    for i, path in list(layout.path_S.items()) + list(layout.path_T.items()):
        _audit_path(g, path, ell + 1, layout.v(i), out)
    for aid, (s_key, s_off, t_key, t_off) in layout.blocking.items():
        a = instance.agents[aid]
        if layout.blocking_path(s_key)[s_off - 1] != a.source or layout.blocking_path(t_key)[t_off - 1] != a.target:
            out.append(Violation("blocking-offset", f"agent {a.name} not at its stated offsets", (aid,)))
            continue
        d = int(g.bfs(a.source)[a.target])
        if d != ell:
            out.append(Violation("blocking-distance", f"agent {a.name} at distance {d}, expected {ell}", (aid,)))
    return out


def _audit_path(g, path, length, attach, out):
    if len(path) - 1 != length:
        out.append(Violation("blocking-length", f"path at {g.label(attach)} has length {len(path) - 1} != {length}"))
    for x, y in zip(path, path[1:]):
        if y not in g.adjacency[x]:
            out.append(Violation("missing-edge", f"blocking path {g.label(x)}-{g.label(y)}", (x, y)))
    if path and path[0] not in g.adjacency[attach]:
        out.append(Violation("missing-edge", f"attachment {g.label(attach)}-{g.label(path[0])}", (attach, path[0])))
