"""Command-line interface. Exit status: 0 success, 1 domain failure, 2 usage or input error."""

import argparse
import sys
from pathlib import Path

from . import formats
from .adversary import POLICY_KINDS, ScriptedPriorities, TieBreakPolicy, worst_case_search
from .engine import PROTOCOLS, run
from .hardness import CnfFormula, build_hardness_instance, check_hardness_structure, repair_from_assignment
from .instances import gen_fig1, gen_fig2, gen_grid
from .model import ModelError, apply_delay1, apply_delay_sequence, check_feasible, distance_lower_bound
from .solver import solve_optimal, verify_optimal_witness

OK, FAIL, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _read(path):
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _emit(text, path, out):
    if path:
        Path(path).write_text(text, encoding="utf-8", newline="\n")
    else:
        out.write(text)


def _load(args):
    instance = formats.parse_instance(_read(args.instance), args.instance)
    schedule = None
    if getattr(args, "schedule", None):
        schedule = formats.parse_schedule(_read(args.schedule), instance, args.schedule)
    return instance, schedule


def _policy(args):
    return TieBreakPolicy(args.policy, args.seed)


# -- subcommands ----------------------------------------------------------------


def cmd_gen(args, out):
    if args.kind == "fig1":
        instance, schedule = gen_fig1()
    elif args.kind == "fig2":
        instance, schedule = gen_fig2()
    else:
        instance = gen_grid(args.rows, args.cols, args.agents, args.seed, horizon_cap=args.cap)
        schedule = solve_optimal(instance, args.cap)
    inst_text = formats.write_instance(instance)
    sched_text = formats.write_schedule(schedule, instance)
    if args.instance_out or args.schedule_out:
        _emit(inst_text, args.instance_out, out)
        _emit(sched_text, args.schedule_out, out)
    else:
        out.write(inst_text + "\n" + sched_text)
    return OK


def cmd_solve(args, out):
    instance, _ = _load(args)
    cap = args.cap if args.cap is not None else max(instance.makespan_ell, distance_lower_bound(instance)) + 8
    schedule = solve_optimal(instance, cap)
    if schedule is None:
        out.write(f"no schedule within cap {cap}\n")
        return FAIL
    out.write(f"makespan {schedule.length_mu}\n")
    _emit(formats.write_schedule(schedule, instance), args.schedule_out, out)
    return OK


def _run(args, instance, schedule):
    plan = formats.parse_plan(args.plan or "", instance)
    prios = formats.parse_priorities(args.priorities or "", instance)
    policy = _policy(args)
    result = run(instance, schedule, plan, args.protocol, policy, args.budget, ScriptedPriorities(prios, policy))
    trace = formats.build_trace(result, instance, args.protocol, policy, plan, prios, args.budget)
    return result, formats.write_trace(trace)


def _report(result, out):
    out.write(f"outcome {result.outcome} at turn {result.outcome_turn}\n")
    out.write(f"makespan {result.makespan if result.completed else '-'}\n")


def cmd_simulate(args, out):
    instance, schedule = _load(args)
    verdict = check_feasible(instance, schedule)
    if not verdict:
        out.write(f"input schedule infeasible: {verdict.describe()}\n")
        return FAIL
    result, trace_text = _run(args, instance, schedule)
    if result.unconsumed:
        late = ",".join(f"{t}:{instance.agents[a].name}" for t, a in result.unconsumed)
        out.write(f"note: plan events after the run ended were not applied: {late}\n")
    _report(result, out)
    if args.diagram:
        out.write(formats.emit_spacetime(result, instance))
    if args.trace:
        _emit(trace_text, args.trace, out)
    return OK if result.completed else FAIL


def cmd_worstcase(args, out):
    instance, schedule = _load(args)
    policy = _policy(args)
    best = worst_case_search(instance, schedule, args.protocol, args.k, budget=args.budget, policy=policy)
    plan_text = formats.format_plan(best.plan, instance) or "-"
    prio_text = formats.format_priorities(best.priorities, instance) or "-"
    out.write(f"plan {plan_text}\npriorities {prio_text}\n")
    result = run(
        instance, schedule, best.plan, args.protocol, policy, args.budget, ScriptedPriorities(best.priorities, policy)
    )
    if result.outcome != best.outcome or result.makespan != best.makespan:
        raise AssertionError("worst-case witness does not replay to the searched outcome")
    _report(result, out)
    if args.trace:
        trace = formats.build_trace(result, instance, args.protocol, policy, best.plan, best.priorities, args.budget)
        _emit(formats.write_trace(trace), args.trace, out)
    return OK if result.completed else FAIL


def cmd_verify(args, out):
    instance, schedule = _load(args)
    if args.trace is None:
        verdict = check_feasible(instance, schedule)
        out.write(f"{verdict.describe()}\n")
        if not verdict:
            return FAIL
        out.write(f"{verify_optimal_witness(instance, schedule).status}\n")
        return OK
    recorded = _read(args.trace)
    trace = formats.parse_trace(recorded, args.trace)
    protocol, policy, plan, prios, budget = formats.replay_settings(trace, instance)
    result = run(instance, schedule, plan, protocol, policy, budget, prios)
    replayed = formats.write_trace(formats.build_trace(result, instance, protocol, policy, plan, prios.choices, budget))
    diff = formats.first_divergence(recorded, replayed)
    if diff is None:
        out.write("trace reproduced\n")
        return OK
    line, turn, want, got = diff
    where = f"turn {turn}" if turn is not None else "header/footer"
    out.write(f"divergence at line {line} ({where})\n  recorded: {want}\n  replayed: {got}\n")
    return FAIL


def _formula(args):
    return CnfFormula.from_dimacs(_read(args.cnf))


def cmd_sat_reduce(args, out):
    formula = _formula(args)
    instance, schedule, layout, event = build_hardness_instance(formula)
    problems = check_hardness_structure(layout, instance)
    g = instance.graph
    out.write(
        f"vertices {g.n} edges {len(g.edges())} agents {instance.n_agents} makespan {instance.makespan_ell}\n"
        f"malfunction {event.turn}:{instance.agents[next(iter(event.agents))].name}\n"
    )
    _emit(formats.write_instance(instance), args.instance_out, out)
    _emit(formats.write_schedule(schedule, instance), args.schedule_out, out)
    for v in problems:
        out.write(f"audit {v.rule}: {v.detail}\n")
    out.write("audit ok\n" if not problems else f"audit failed ({len(problems)} problems)\n")
    return OK if not problems else FAIL


def _assignment(text, n):
    toks = text.replace(",", " ").split()
    if len(toks) == n and all(t in "01TFtf" and len(t) == 1 for t in toks):
        return tuple(t in "1Tt" for t in toks)
    lits = [int(t) for t in toks if t.lstrip("-").isdigit()]
    if len(lits) != len(toks) or sorted(abs(x) for x in lits) != list(range(1, n + 1)):
        raise UsageError(f"assignment must give each of the {n} variables once, e.g. '1 -2' or '1,0'")
    return tuple(x > 0 for x in sorted(lits, key=abs))


def cmd_sat_repair(args, out):
    formula = _formula(args)
    if args.assignment is not None:
        assignment = _assignment(args.assignment, formula.n)
    else:
        assignment = next(formula.satisfying_assignments(), None)
        if assignment is None:
            out.write("formula is unsatisfiable\n")
            return FAIL
    instance, schedule, layout, event = build_hardness_instance(formula)
    broken = apply_delay1(schedule, event.agents, event.turn)
    repaired = apply_delay_sequence(broken, repair_from_assignment(layout, instance, broken, assignment))
    verdict = check_feasible(instance, repaired)
    target = instance.makespan_ell
    bits = " ".join(("" if b else "-") + str(i) for i, b in enumerate(assignment, 1))
    out.write(f"assignment {bits} satisfies {str(formula.satisfied_by(assignment)).lower()}\n")
    out.write(f"{verdict.describe()}\nmakespan {repaired.length_mu} target {target}\n")
    _emit(formats.write_schedule(repaired, instance), args.schedule_out, out)
    return OK if verdict and repaired.length_mu == target else FAIL


# -- parser --------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="mapfma", description="MAPF with malfunctioning agents")
    sub = p.add_subparsers(dest="command", required=True)

    def run_flags(sp, with_plan=True):
        sp.add_argument("instance")
        sp.add_argument("schedule")
        sp.add_argument("--protocol", choices=PROTOCOLS, default="cbm")
        sp.add_argument("--policy", choices=POLICY_KINDS, default="lowest-id")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--budget", type=int, default=None, help="turn limit (default mu + k + 2|V|)")
        sp.add_argument("--trace", help="write the run trace here")
        if with_plan:
            sp.add_argument("--plan", default="", help="malfunctions as turn:agent,...")
            sp.add_argument("--priorities", default="", help="no-communication winners as turn:vertex:agent,...")
            sp.add_argument("--diagram", action="store_true", help="print a space-time diagram")

    g = sub.add_parser("gen", help="write a built-in or random grid instance and schedule")
    g.add_argument("kind", choices=("fig1", "fig2", "grid"))
    g.add_argument("--rows", type=int, default=3)
    g.add_argument("--cols", type=int, default=3)
    g.add_argument("--agents", type=int, default=2)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--cap", type=int, default=8, help="solver horizon for grid instances")
    g.add_argument("--instance-out")
    g.add_argument("--schedule-out")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="minimum-makespan schedule by joint BFS")
    s.add_argument("instance")
    s.add_argument("--cap", type=int, default=None)
    s.add_argument("--schedule-out")
    s.set_defaults(func=cmd_solve)

    sim = sub.add_parser("simulate", help="execute a schedule under malfunctions")
    run_flags(sim)
    sim.set_defaults(func=cmd_simulate)

    w = sub.add_parser("worstcase", help="exhaustive adversary over k malfunctions")
    run_flags(w, with_plan=False)
    w.add_argument("--k", type=int, default=1)
    w.set_defaults(func=cmd_worstcase)

    v = sub.add_parser("verify", help="check a schedule, or replay a trace")
    v.add_argument("instance")
    v.add_argument("schedule")
    v.add_argument("--trace")
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("sat-reduce", help="build the hardness instance of a DIMACS 3-CNF")
    r.add_argument("cnf")
    r.add_argument("--instance-out")
    r.add_argument("--schedule-out")
    r.set_defaults(func=cmd_sat_reduce)

    rp = sub.add_parser("sat-repair", help="repair the hardness schedule from an assignment")
    rp.add_argument("cnf")
    rp.add_argument("--assignment", help="e.g. '1 -2' or '1,0'; default: first satisfying assignment")
    rp.add_argument("--schedule-out")
    rp.set_defaults(func=cmd_sat_repair)
    return p


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    try:
        return args.func(args, out)
    except (UsageError, ModelError) as exc:
        print(f"mapfma {args.command}: error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
