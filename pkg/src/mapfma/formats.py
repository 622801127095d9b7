"""Line-oriented text formats: instances, schedules, run traces, diagrams.

Instance::

    # comment
    graph 4 u1 u2 u3 u4
    edge u1 u2
    agent a1 u1 u2
    makespan 2

The ``graph`` line may omit the labels; vertex tokens then receive dense
ids in order of first appearance. Schedule::

    schedule 2
    a1 u1 u1 u2
    a2 u4 u2 u3

Trace: a header of ``key value`` lines, one ``T<turn> D|M|A <agent> <detail>``
line per decision, modification and action, then an ``outcome`` footer.
"""

import hashlib
from dataclasses import dataclass, field

from .adversary import MalfunctionPlan, ScriptedPriorities, TieBreakPolicy
from .model import AgentSpec, Graph, Instance, ModelError, Schedule


class FormatError(ModelError):
    def __init__(self, line: int, reason: str, source: str = ""):
        self.line = line
        self.reason = reason
        where = f"{source}:" if source else "line "
        super().__init__(f"{where}{line}: {reason}")


def _lines(text):
    for no, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0].split()
        if body:
            yield no, body


def _int(tok, no, what, source=""):
    try:
        val = int(tok)
    except ValueError:
        raise FormatError(no, f"{what} must be an integer, got {tok!r}", source) from None
    if val < 0:
        raise FormatError(no, f"{what} must be nonnegative, got {val}", source)
    return val


# -- instances ----------------------------------------------------------------


def parse_instance(text: str, source: str = "") -> Instance:
    n = None
    labels = []
    ids = {}
    edges = []
    agents = []
    names = {}
    ell = None

    labels_fixed = False

    def vertex(tok, no):
        if tok not in ids:
            if labels_fixed:
                raise FormatError(no, f"unknown vertex {tok!r}", source)
            if len(labels) >= n:
                raise FormatError(no, f"vertex {tok!r} exceeds the declared {n} vertices", source)
            ids[tok] = len(labels)
            labels.append(tok)
        return ids[tok]

    for no, toks in _lines(text):
        kw, args = toks[0], toks[1:]
        if kw == "graph":
            if n is not None:
                raise FormatError(no, "second graph declaration", source)
            if not args:
                raise FormatError(no, "graph needs a vertex count", source)
            n = _int(args[0], no, "vertex count", source)
            if len(args) > 1:
                if len(args) - 1 != n:
                    raise FormatError(no, f"graph declares {n} vertices but lists {len(args) - 1} labels", source)
                if len(set(args[1:])) != n:
                    raise FormatError(no, "duplicate vertex label", source)
                labels[:] = args[1:]
                ids.update({lab: i for i, lab in enumerate(labels)})
                labels_fixed = True
            continue
        if n is None:
            raise FormatError(no, f"{kw!r} before the graph declaration", source)
        if kw == "edge":
            if len(args) != 2:
                raise FormatError(no, "edge needs two endpoints", source)
            u, v = vertex(args[0], no), vertex(args[1], no)
            if u == v:
                raise FormatError(no, f"self-loop on {args[0]!r}", source)
            edges.append((u, v))
        elif kw == "agent":
            if len(args) != 3:
                raise FormatError(no, "agent needs an id, a source and a target", source)
            name = args[0]
            if name in names:
                raise FormatError(no, f"duplicate agent id {name!r} (first on line {names[name]})", source)
            names[name] = no
            s, t = vertex(args[1], no), vertex(args[2], no)
            for kind, v, tok in (("source", s, args[1]), ("target", t, args[2])):
                clash = [a for a in agents if getattr(a, kind) == v]
                if clash:
                    raise FormatError(no, f"{kind} {tok!r} already used by agent {clash[0].name!r}", source)
            agents.append(AgentSpec(len(agents), s, t, name))
        elif kw == "makespan":
            if len(args) != 1:
                raise FormatError(no, "makespan needs one value", source)
            if ell is not None:
                raise FormatError(no, "second makespan declaration", source)
            ell = _int(args[0], no, "makespan", source)
        else:
            raise FormatError(no, f"unknown keyword {kw!r}", source)
    if n is None:
        raise FormatError(0, "missing graph declaration", source)
    while len(labels) < n:
        labels.append(f"_{len(labels)}")
    return Instance(Graph.from_edges(n, edges, labels), tuple(agents), ell or 0)


def write_instance(instance: Instance) -> str:
    g = instance.graph
    out = [f"graph {g.n} " + " ".join(g.labels) if g.n else "graph 0"]
    out += [f"edge {g.labels[u]} {g.labels[v]}" for u, v in g.edges()]
    out += [f"agent {a.name} {g.labels[a.source]} {g.labels[a.target]}" for a in instance.agents]
    out.append(f"makespan {instance.makespan_ell}")
    return "\n".join(out) + "\n"


def instance_hash(instance: Instance) -> str:
    return hashlib.sha256(write_instance(instance).encode()).hexdigest()


# -- schedules ----------------------------------------------------------------


def parse_schedule(text: str, instance: Instance, source: str = "") -> Schedule:
    mu = None
    rows = {}
    g = instance.graph
    index = {lab: i for i, lab in enumerate(g.labels)}
    for no, toks in _lines(text):
        if toks[0] == "schedule":
            if mu is not None:
                raise FormatError(no, "second schedule header", source)
            if len(toks) != 2:
                raise FormatError(no, "schedule header needs one length", source)
            mu = _int(toks[1], no, "schedule length", source)
            continue
        if mu is None:
            raise FormatError(no, "row before the schedule header", source)
        try:
            a = instance.agent_id(toks[0])
        except ModelError:
            raise FormatError(no, f"unknown agent {toks[0]!r}", source) from None
        if a in rows:
            raise FormatError(no, f"second row for agent {toks[0]!r}", source)
        if len(toks) - 1 != mu + 1:
            raise FormatError(no, f"row has {len(toks) - 1} positions, expected {mu + 1}", source)
        row = []
        for tok in toks[1:]:
            if tok not in index:
                raise FormatError(no, f"unknown vertex {tok!r}", source)
            row.append(index[tok])
        rows[a] = row
    if mu is None:
        raise FormatError(0, "missing schedule header", source)
    missing = [instance.agents[a].name for a in range(instance.n_agents) if a not in rows]
    if missing:
        raise FormatError(0, f"no row for agents {', '.join(missing)}", source)
    return Schedule([rows[a] for a in range(instance.n_agents)])


def write_schedule(schedule: Schedule, instance: Instance) -> str:
    lab = instance.graph.labels
    out = [f"schedule {schedule.length_mu}"]
    for a in range(schedule.n_agents):
        out.append(instance.agents[a].name + " " + " ".join(lab[v] for v in schedule.row(a)))
    return "\n".join(out) + "\n"


# -- plans and priorities -------------------------------------------------------


def parse_plan(spec: str, instance: Instance) -> MalfunctionPlan:
    """``"1:a2,4:a1"`` -> plan; events are sorted by turn (stable)."""
    events = []
    for i, item in enumerate(p for p in spec.split(",") if p.strip()):
        try:
            turn, agent = item.strip().split(":")
            turn = int(turn)
        except ValueError:
            raise ModelError(f"plan item {i + 1} {item!r}: expected turn:agent") from None
        if turn < 1:
            raise ModelError(f"plan item {i + 1} {item!r}: turn must be at least 1")
        events.append((turn, instance.agent_id(agent)))
    return MalfunctionPlan(tuple(sorted(events, key=lambda e: e[0])))


def format_plan(plan: MalfunctionPlan, instance: Instance) -> str:
    return ",".join(f"{t}:{instance.agents[a].name}" for t, a in plan.events)


def parse_priorities(spec: str, instance: Instance) -> dict:
    """``"7:c3:b3_1,8:c3:b3_2"`` -> ``{(turn, vertex): agent}``."""
    out = {}
    for i, item in enumerate(p for p in spec.split(",") if p.strip()):
        parts = item.strip().split(":")
        if len(parts) != 3 or not parts[0].isdigit():
            raise ModelError(f"priority item {i + 1} {item!r}: expected turn:vertex:agent")
        out[(int(parts[0]), instance.graph.vertex_id(parts[1]))] = instance.agent_id(parts[2])
    return out


def format_priorities(prios: dict, instance: Instance) -> str:
    lab = instance.graph.labels
    return ",".join(f"{t}:{lab[v]}:{instance.agents[a].name}" for (t, v), a in sorted(prios.items()))


# -- traces -----------------------------------------------------------------------


@dataclass
class TraceFile:
    header: dict
    records: list  # (turn, tag, agent name, detail)
    footer: dict = field(default_factory=dict)


HEADER_KEYS = ("instance", "protocol", "policy", "seed", "plan", "priorities", "budget")


def trace_records(result, instance: Instance) -> list:
    lab = instance.graph.labels
    name = [a.name for a in instance.agents]
    out = []
    for rec in result.trace:
        for a, kind, v in rec.decisions:
            out.append((rec.turn, "D", name[a], f"{kind} {lab[v]}"))
        for a, reason in rec.modifications:
            out.append((rec.turn, "M", name[a], reason))
        for a, u, v in rec.actions:
            out.append((rec.turn, "A", name[a], f"{lab[u]} {lab[v]}"))
    return out


def build_trace(result, instance, protocol, policy: TieBreakPolicy, plan, priorities=None, budget=None) -> TraceFile:
    header = {
        "instance": instance_hash(instance),
        "protocol": protocol,
        "policy": policy.kind,
        "seed": str(policy.seed),
        "plan": format_plan(plan, instance) or "-",
        "priorities": format_priorities(priorities or {}, instance) or "-",
        "budget": "-" if budget is None else str(budget),
    }
    footer = {"outcome": f"{result.outcome} {result.outcome_turn}", "makespan": str(result.makespan or "-")}
    return TraceFile(header, trace_records(result, instance), footer)


def write_trace(trace: TraceFile) -> str:
    out = ["# mapfma trace"]
    out += [f"{k} {trace.header[k]}" for k in HEADER_KEYS]
    out += [f"T{t} {tag} {agent} {detail}" for t, tag, agent, detail in trace.records]
    out += [f"outcome {trace.footer['outcome']}", f"makespan {trace.footer['makespan']}"]
    return "\n".join(out) + "\n"


def parse_trace(text: str, source: str = "") -> TraceFile:
    header, records, footer = {}, [], {}
    for no, toks in _lines(text):
        head = toks[0]
        if head.startswith("T") and head[1:].isdigit():
            if footer:
                raise FormatError(no, "record after the footer", source)
            if len(toks) < 4 or toks[1] not in ("D", "M", "A"):
                raise FormatError(no, "record must be T<turn> D|M|A <agent> <detail>", source)
            records.append((int(head[1:]), toks[1], toks[2], " ".join(toks[3:])))
        elif head in HEADER_KEYS:
            if records or footer:
                raise FormatError(no, f"header key {head!r} after the records", source)
            header[head] = " ".join(toks[1:])
        elif head in ("outcome", "makespan"):
            footer[head] = " ".join(toks[1:])
        else:
            raise FormatError(no, f"unknown trace line {head!r}", source)
    missing = [k for k in HEADER_KEYS if k not in header]
    if missing:
        raise FormatError(0, f"trace header lacks {', '.join(missing)}", source)
    if set(footer) != {"outcome", "makespan"}:
        raise FormatError(0, "trace footer must give outcome and makespan", source)
    return TraceFile(header, records, footer)


def replay_settings(trace: TraceFile, instance: Instance):
    """Protocol, policy, plan, adversary and budget encoded in a trace header."""
    h = trace.header
    if h["instance"] != instance_hash(instance):
        raise ModelError("trace was recorded on a different instance (hash mismatch)")
    policy = TieBreakPolicy(h["policy"], int(h["seed"]))
    plan = parse_plan("" if h["plan"] == "-" else h["plan"], instance)
    prios = parse_priorities("" if h["priorities"] == "-" else h["priorities"], instance)
    budget = None if h["budget"] == "-" else int(h["budget"])
    return h["protocol"], policy, plan, ScriptedPriorities(prios, policy), budget


def first_divergence(expected: str, actual: str):
    """``(line number, turn or None, expected line, actual line)`` of the first difference, or None."""
    a, b = expected.splitlines(), actual.splitlines()
    for i in range(max(len(a), len(b))):
        x = a[i] if i < len(a) else "<end of trace>"
        y = b[i] if i < len(b) else "<end of trace>"
        if x != y:
            turn = None
            for line in (x, y):
                tok = line.split(" ", 1)[0]
                if tok.startswith("T") and tok[1:].isdigit():
                    turn = int(tok[1:])
                    break
            return i + 1, turn, x, y
    return None


# -- diagrams -----------------------------------------------------------------


def emit_spacetime(result, instance: Instance) -> str:
    """Agents by turns grid of vertex labels.

    ``!`` marks a turn lost to a forced malfunction, ``*`` one lost to a
    protocol delay-1.
    """
    lab = instance.graph.labels
    sched = result.final_schedule
    marks = {}
    for rec in result.trace:
        for a, kind, _ in rec.decisions:
            if kind == "malfunction":
                marks[(a, rec.turn)] = "!"
        for a, _ in rec.modifications:
            marks.setdefault((a, rec.turn), "*")
    cols = sched.length_mu + 1
    cells = [[lab[v] + marks.get((a, t), "") for t, v in enumerate(sched.row(a))] for a in range(sched.n_agents)]
    names = [a.name for a in instance.agents]
    width = max([len(c) for row in cells for c in row] + [len(str(cols - 1))])
    left = max(len(n) for n in names) if names else 0
    lines = [" " * left + " | " + " ".join(str(t).rjust(width) for t in range(cols))]
    lines.append("-" * len(lines[0]))
    for n, row in zip(names, cells):
        lines.append(n.ljust(left) + " | " + " ".join(c.rjust(width) for c in row))
    return "\n".join(lines) + "\n"
