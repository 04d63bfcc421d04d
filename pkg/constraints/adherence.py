"""
Protocol adherence of concrete runs: every generated trace must be a model
of the protocol's constraint.

Runs are checked one seed at a time so the CLI and the flyte workflow share
the same unit of work and merge results in seed order. Locally the seeds
are spread over a thread pool.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, List, Optional

from constraints.constraint_ast import Constraint
from constraints.evaluation import check_trace
from runtime.runner import Limits, LimitExceeded, Stuck, Trace, enumerate_runs, run
from runtime.scheduler import make_scheduler
from syntax import program_ast as A

OK = "ok"
VIOLATED = "violated"
STUCK = "stuck"
LIMIT = "limit"


@dataclass
class RunVerdict:
    seed: int
    outcome: str
    events: int
    failed: str = ""
    trace: str = ""


def _verdict(seed: int, result, constraint: Constraint) -> RunVerdict:
    if isinstance(result, Stuck):
        return RunVerdict(seed, STUCK, len(result.trace), result.reason, result.trace.show())
    if isinstance(result, LimitExceeded):
        return RunVerdict(seed, LIMIT, len(result.trace), result.reason, result.trace.show())
    return check_one(result, constraint, seed)


def check_one(trace: Trace, constraint: Constraint, seed: int = 0) -> RunVerdict:
    verdict = check_trace(trace, constraint)
    if verdict.ok:
        return RunVerdict(seed, OK, len(trace), trace=trace.show())
    return RunVerdict(seed, VIOLATED, len(trace), verdict.failed or "", trace.show())


def verify_seed(program: A.Program, constraint: Constraint, seed: int,
                limits: Limits = Limits(), policy: str = "random") -> RunVerdict:
    """One scheduled run, checked against the constraint."""
    result = run(program, make_scheduler(policy, seed), limits)
    return _verdict(seed, result, constraint)


def verify_seeds(program: A.Program, constraint: Constraint, seeds: Iterable[int],
                 limits: Limits = Limits(), policy: str = "random", workers: int = 1) -> List[RunVerdict]:
    """Seeded runs spread over a pool of workers; verdicts come back in seed order."""
    seeds = list(seeds)
    if workers <= 1 or len(seeds) <= 1:
        return [verify_seed(program, constraint, s, limits, policy) for s in seeds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda s: verify_seed(program, constraint, s, limits, policy), seeds))


def verify_exhaustive(program: A.Program, constraint: Constraint, limits: Limits = Limits()) -> List[RunVerdict]:
    """Every schedule within limits; verdicts are numbered in exploration order."""
    explored = enumerate_runs(program, limits)
    results = list(explored.traces) + list(explored.stuck) + list(explored.exceeded)
    return [_verdict(k, r, constraint) for k, r in enumerate(results)]


@dataclass
class AdherenceSummary:
    verdicts: List[RunVerdict] = field(default_factory=list)

    @classmethod
    def merge(cls, verdicts: Iterable[RunVerdict]) -> "AdherenceSummary":
        return cls(sorted(verdicts, key=lambda v: v.seed))

    def count(self, outcome: str) -> int:
        return sum(1 for v in self.verdicts if v.outcome == outcome)

    @property
    def ok(self) -> bool:
        return self.count(VIOLATED) == 0 and self.count(STUCK) == 0

    @property
    def first_failure(self) -> Optional[RunVerdict]:
        for v in self.verdicts:
            if v.outcome in (VIOLATED, STUCK):
                return v
        return None

    def describe(self) -> str:
        traces = self.count(OK) + self.count(VIOLATED)
        if self.ok:
            text = f"all {traces} traces adhere"
        else:
            text = f"{self.count(VIOLATED)} of {traces} traces violate the protocol, {self.count(STUCK)} runs stuck"
        if self.count(LIMIT):
            text += f" ({self.count(LIMIT)} runs cut off by limits)"
        return text

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "summary": self.describe(),
            "counts": {o: self.count(o) for o in (OK, VIOLATED, STUCK, LIMIT)},
            "runs": [
                {"seed": v.seed, "outcome": v.outcome, "events": v.events, "failed": v.failed}
                for v in self.verdicts
            ],
        }
