"""
Command-line front end.

    check   PROGRAM PROTOCOL     type-check a program against its protocol
    project PROTOCOL             print object and method types
    run     PROGRAM              execute once and print the trace
    verify  PROGRAM PROTOCOL     check generated traces against the protocol
    graph   PROGRAM PROTOCOL     print the completed causality graph

Human-readable output goes to stderr with a [Component] prefix; JSON and
DOT go to stdout or the named file.
"""

import argparse
import functools
import json
import sys
from pathlib import Path

# Add project root to Python path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

import config
from causality.admissibility import admissible
from causality.dot import export_dot
from constraints.adherence import AdherenceSummary, check_one, verify_exhaustive, verify_seeds
from constraints.translate import translate_global
from logic.validity import check_validity
from projection.wellformed import project_all
from runtime.runner import Limits, LimitExceeded, Stuck, read_trace, run, write_trace
from runtime.scheduler import make_scheduler
from syntax.parser import parse_global_type, parse_program
from syntax.pretty import pretty
from typecheck.checker import ProgramChecker
from utils.decorators import command, command_registry, policy_registry
from utils.errors import AsyncstError
from utils.logger import Logger
from utils.reporting import EXIT_OK, EXIT_REJECTED, EXIT_UNKNOWN, EXIT_USAGE, Report

_COLORS = {"ok": "32", "fail": "31", "warn": "33"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def say(component, message, tone=None):
    prefix = f"[{component}]"
    if config.COLOR and tone in _COLORS:
        prefix = f"\033[{_COLORS[tone]}m{prefix}\033[0m"
    print(f"{prefix} {message}", file=sys.stderr)


def emit(text, path=None):
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _read(path):
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}")


def _validity():
    return functools.partial(check_validity, bound=config.VALIDITY_BOUND)


def _limits(args):
    return Limits(max_steps=args.max_steps, max_loop_iters=args.max_loop_iters)


def _print_report(component, report):
    for d in report.diagnostics:
        say(component, d.render(), "fail")
    for w in report.warnings:
        say(component, f"warning: {w}", "warn")


# ----------------------------------
# Subcommands
# ----------------------------------

@command("check")
def check_command(args):
    program = parse_program(_read(args.program))
    g = parse_global_type(_read(args.protocol))
    report = ProgramChecker(program, g, _validity()).run()
    _print_report("Typecheck", report)
    if args.json_report:
        emit(report.to_json(), None if args.json_report == "-" else args.json_report)
    if report.ok:
        say("Typecheck", f"{args.program} adheres to {args.protocol}", "ok")
    elif report.exit_code() == EXIT_UNKNOWN:
        say("Typecheck", "some premises are outside the decidable fragment", "warn")
    return report.exit_code()


@command("project")
def project_command(args):
    g = parse_global_type(_read(args.protocol))
    projection = project_all(g, _validity())
    objects = [args.object] if args.object else sorted(projection.propagated)
    out = {}
    for obj in objects:
        if obj not in projection.propagated:
            raise UsageError(f"{obj} is not a role of the protocol")
        if args.method:
            types = projection.method_types(obj, args.method)
            if not types:
                raise UsageError(f"{obj} has no method type for {args.method}")
            out[obj] = {args.method: [pretty(t) for t in types]}
        else:
            out[obj] = {
                "object": pretty(projection.objects[obj]),
                "propagated": pretty(projection.propagated[obj]),
            }
    if args.json:
        emit(json.dumps(out, indent=2))
        return EXIT_OK
    for obj, entry in out.items():
        for name, text in entry.items():
            if isinstance(text, list):
                for k, t in enumerate(text, 1):
                    emit(f"{obj}.{name} [{k}]: {t}")
            else:
                emit(f"{obj} {name}: {text}")
    return EXIT_OK


@command("run")
def run_command(args):
    program = parse_program(_read(args.program))
    result = run(program, make_scheduler(args.policy, args.seed), _limits(args))
    trace = result.trace if isinstance(result, (Stuck, LimitExceeded)) else result
    if args.trace:
        logger = Logger(args.trace)
        logger.reset()
        write_trace(trace, logger, seed=args.seed)
    emit(trace.show() if len(trace) else "(empty trace)")
    if isinstance(result, Stuck):
        say("Runtime", f"stuck after {len(trace)} events: {result.reason}", "fail")
        return EXIT_REJECTED
    if isinstance(result, LimitExceeded):
        say("Runtime", f"stopped after {len(trace)} events: {result.reason}", "warn")
        return EXIT_UNKNOWN
    say("Runtime", f"terminated after {len(trace)} events", "ok")
    return EXIT_OK


@command("verify")
def verify_command(args):
    if args.trace and (args.exhaustive or args.runs is not None):
        raise UsageError("--trace cannot be combined with --exhaustive or --runs")
    program = parse_program(_read(args.program))
    constraint = translate_global(parse_global_type(_read(args.protocol)))
    if args.trace:
        verdicts = [check_one(read_trace(args.trace), constraint)]
    elif args.exhaustive:
        say("Verify", f"exploring every schedule (max {args.max_steps} steps)")
        verdicts = verify_exhaustive(program, constraint, _limits(args))
    else:
        runs = args.runs if args.runs is not None else config.RUNS
        workers = args.workers if args.workers is not None else config.WORKERS
        if workers < 1:
            raise UsageError("--workers must be at least 1")
        say("Verify", f"{runs} seeded runs from seed {args.seed} on {workers} workers")
        seeds = range(args.seed, args.seed + runs)
        verdicts = verify_seeds(program, constraint, seeds, _limits(args), args.policy, workers)
    summary = AdherenceSummary.merge(verdicts)
    if config.TRACE_LOG:
        logger = Logger(config.TRACE_LOG)
        for v in summary.verdicts:
            logger.write(seed=v.seed, outcome=v.outcome, events=v.events, failed=v.failed)
    if args.json:
        emit(json.dumps(summary.to_dict(), indent=2))
    failure = summary.first_failure
    if failure is not None:
        say("Verify", f"run {failure.seed} {failure.outcome}: {failure.failed}", "fail")
        say("Verify", f"trace: {failure.trace}", "fail")
    say("Verify", summary.describe(), "ok" if summary.ok else "fail")
    return EXIT_OK if summary.ok else EXIT_REJECTED


@command("graph")
def graph_command(args):
    program = parse_program(_read(args.program))
    g = parse_global_type(_read(args.protocol))
    checker = ProgramChecker(program, g, _validity())
    report = checker.run()
    if checker.graph is None:
        _print_report("Causality", report)
        return report.exit_code() or EXIT_REJECTED
    if args.json:
        emit(json.dumps(checker.graph.to_dict(), indent=2), args.dot)
    else:
        emit(export_dot(checker.graph), args.dot)
    verdict = admissible(checker.graph)
    _print_report("Causality", verdict)
    say("Causality", "admissible" if verdict.ok else "not admissible", "ok" if verdict.ok else "fail")
    return verdict.exit_code()


# ----------------------------------
# Argument parsing
# ----------------------------------

def build_parser():
    parser = _Parser(prog="asyncst", description="Stateful session types for active objects")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def limits(p):
        p.add_argument("--max-steps", type=int, default=config.MAX_STEPS)
        p.add_argument("--max-loop-iters", type=int, default=config.MAX_LOOP_ITERS)

    p = sub.add_parser("check", help="type-check a program against a protocol")
    p.add_argument("program")
    p.add_argument("protocol")
    p.add_argument("--json-report", metavar="PATH", help="write the JSON report ('-' for stdout)")

    p = sub.add_parser("project", help="print projected types")
    p.add_argument("protocol")
    p.add_argument("--object")
    p.add_argument("--method")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("run", help="execute the program once")
    p.add_argument("program")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--policy", choices=sorted(policy_registry), default="random")
    p.add_argument("--trace", metavar="PATH", help="write the trace as JSONL")
    limits(p)

    p = sub.add_parser("verify", help="check generated traces against the protocol")
    p.add_argument("program")
    p.add_argument("protocol")
    p.add_argument("--runs", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, help="threads for seeded runs")
    p.add_argument("--policy", choices=sorted(policy_registry), default="random")
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--trace", metavar="PATH", help="check a recorded JSONL trace instead of running")
    p.add_argument("--json", action="store_true")
    limits(p)

    p = sub.add_parser("graph", help="print the causality graph")
    p.add_argument("program")
    p.add_argument("protocol")
    p.add_argument("--dot", metavar="PATH", help="write the output to PATH")
    p.add_argument("--json", action="store_true")
    return parser


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required")
        return command_registry[args.command](args)
    except UsageError as exc:
        say("Usage", str(exc), "fail")
        return EXIT_USAGE
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_OK
    except AsyncstError as exc:
        say(type(exc).__name__, str(exc), "fail")
        report = Report()
        report.add_error(type(exc).__name__, exc)
        return report.exit_code()


if __name__ == "__main__":
    sys.exit(main())
