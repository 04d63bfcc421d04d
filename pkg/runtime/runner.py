"""
Big-step execution: whole runs under a scheduler, and exhaustive
exploration of every schedule of a small program.
"""

import json
from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

from runtime.configuration import Configuration, config_from_json, config_to_json
from runtime.events import NoEvent, event_from_json, event_to_json, show_event
from runtime.scheduler import Scheduler
from runtime.semantics import Semantics, StepId
from syntax import program_ast as A
from utils.errors import EvaluationError, ParseError
from utils.logger import Logger

DEFAULT_MAX_STEPS = 500
DEFAULT_MAX_LOOP_ITERS = 4


@dataclass(frozen=True)
class Limits:
    max_steps: int = DEFAULT_MAX_STEPS
    max_loop_iters: int = DEFAULT_MAX_LOOP_ITERS


@dataclass(frozen=True)
class TracePair:
    """An event with the configuration it leads to and the one it fires in."""
    event: object
    config: Configuration
    before: Configuration


@dataclass
class Trace:
    pairs: List[TracePair] = field(default_factory=list)

    @property
    def events(self):
        return [p.event for p in self.pairs]

    @property
    def final(self) -> Optional[Configuration]:
        return self.pairs[-1].config if self.pairs else None

    def __len__(self) -> int:
        return len(self.pairs)

    def show(self) -> str:
        return " . ".join(show_event(e) for e in self.events)


@dataclass
class Stuck:
    """A configuration where unfinished processes exist but nothing can move."""
    config: Configuration
    trace: Trace
    reason: str = "no enabled step"


@dataclass
class LimitExceeded:
    trace: Trace
    reason: str


RunResult = Union[Trace, Stuck, LimitExceeded]


@dataclass
class Exploration:
    traces: List[Trace] = field(default_factory=list)
    stuck: List[Stuck] = field(default_factory=list)
    exceeded: List[LimitExceeded] = field(default_factory=list)


def _over_limit(cfg: Configuration, steps: int, limits: Limits) -> Optional[str]:
    if steps >= limits.max_steps:
        return f"more than {limits.max_steps} steps"
    for p in cfg.processes:
        if p.iterations > limits.max_loop_iters:
            return f"{p.obj}.{p.method} iterated more than {limits.max_loop_iters} times"
    return None


def _advance(sem: Semantics, cfg: Configuration, s: StepId, pairs: List[TracePair]) -> Configuration:
    event, nxt = sem.step(cfg, s)
    if not isinstance(event, NoEvent):
        pairs.append(TracePair(event, nxt, cfg))
    return nxt


def run(program: A.Program, scheduler: Scheduler, limits: Limits = Limits()) -> RunResult:
    """
    One run of program under scheduler.

    Returns:
        Trace if every process terminates, Stuck on a deadlock or a faulty
        statement, LimitExceeded if a bound is hit first
    """
    sem = Semantics(program)
    cfg = sem.initial()
    pairs: List[TracePair] = []
    steps = 0
    while True:
        if cfg.terminated:
            return Trace(pairs)
        reason = _over_limit(cfg, steps, limits)
        if reason:
            return LimitExceeded(Trace(pairs), reason)
        enabled = sem.enabled(cfg)
        if not enabled:
            return Stuck(cfg, Trace(pairs))
        try:
            cfg = _advance(sem, cfg, scheduler.choose(cfg, enabled), pairs)
        except EvaluationError as exc:
            return Stuck(cfg, Trace(pairs), str(exc))
        steps += 1


class Explorer:
    """
    Depth-first search over all schedules.

    With `reduce` on, a process whose next statement is internal runs it
    before anything else is considered; internal steps only touch the
    active process of one object.
    """

    def __init__(self, program: A.Program, limits: Limits = Limits(), reduce: bool = True):
        self.sem = Semantics(program)
        self.limits = limits
        self.reduce = reduce
        self.result = Exploration()

    def explore(self) -> Exploration:
        self._visit(self.sem.initial(), [], 0)
        return self.result

    def _choices(self, cfg: Configuration, enabled: List[StepId]) -> List[StepId]:
        if self.reduce:
            for s in enabled:
                if self.sem.is_internal(cfg, s):
                    return [s]
        return enabled

    def _visit(self, cfg: Configuration, pairs: List[TracePair], steps: int) -> None:
        # internal steps are iterated, only branching points recurse
        while True:
            if cfg.terminated:
                self.result.traces.append(Trace(list(pairs)))
                return
            reason = _over_limit(cfg, steps, self.limits)
            if reason:
                self.result.exceeded.append(LimitExceeded(Trace(list(pairs)), reason))
                return
            enabled = self.sem.enabled(cfg)
            if not enabled:
                self.result.stuck.append(Stuck(cfg, Trace(list(pairs))))
                return
            choices = self._choices(cfg, enabled)
            if len(choices) > 1:
                break
            try:
                cfg = _advance(self.sem, cfg, choices[0], pairs)
            except EvaluationError as exc:
                self.result.stuck.append(Stuck(cfg, Trace(list(pairs)), str(exc)))
                return
            steps += 1

        for s in choices:
            branch = list(pairs)
            try:
                nxt = _advance(self.sem, cfg, s, branch)
            except EvaluationError as exc:
                self.result.stuck.append(Stuck(cfg, Trace(branch), str(exc)))
                continue
            self._visit(nxt, branch, steps + 1)


def enumerate_runs(program: A.Program, limits: Limits = Limits(), reduce: bool = True) -> Exploration:
    """All terminating traces and all stuck states reachable within limits."""
    return Explorer(program, limits, reduce).explore()


# ----------------------------------
# JSONL
# ----------------------------------

def pair_to_json(pair: TracePair) -> dict:
    return {
        "event": event_to_json(pair.event),
        "config": config_to_json(pair.config),
        "before": config_to_json(pair.before),
    }


def write_trace(trace: Trace, logger: Logger, **extra) -> None:
    """One record per trace pair."""
    for k, pair in enumerate(trace.pairs):
        logger.write(index=k, **extra, **pair_to_json(pair))


def trace_from_records(records: List[dict]) -> Trace:
    """
    Raises:
        ParseError: if the records do not come from a single run
    """
    seeds = {rec.get("seed") for rec in records}
    if len(seeds) > 1:
        raise ParseError(f"records of several runs (seeds {sorted(seeds, key=str)})")
    indexes = [rec.get("index", 0) for rec in records]
    if sorted(indexes) != list(range(len(records))):
        raise ParseError("trace records must be numbered 0..n-1 without gaps or repeats")
    pairs = []
    for rec in sorted(records, key=lambda r: r.get("index", 0)):
        config = config_from_json(rec["config"])
        before = config_from_json(rec["before"]) if "before" in rec else config
        pairs.append(TracePair(event_from_json(rec["event"]), config, before))
    return Trace(pairs)


def read_trace(path: str) -> Trace:
    with open(path) as f:
        records = [json.loads(line) for line in f if line.strip()]
    return trace_from_records(records)


def resolved_fetches(trace: Trace) -> List[Tuple[Tuple[str, str, int], Tuple[str, str]]]:
    """(get site, actual resolver) for every fetch of the trace."""
    resolvers = {}
    out = []
    for pair in trace.pairs:
        ev = pair.event
        tag = ev.tag
        if tag == "fEv":
            resolvers[ev.future] = (ev.obj, ev.method)
        elif tag == "fREv" and ev.site is not None:
            out.append((ev.site, resolvers[ev.future]))
    return out
