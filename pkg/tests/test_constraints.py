"""
Trace constraints: translation of protocols and evaluation on traces.

Run with: pytest tests/test_constraints.py -v
"""

import random

import pytest

from constraints.adherence import (
    LIMIT,
    OK,
    STUCK,
    VIOLATED,
    AdherenceSummary,
    RunVerdict,
    check_one,
    verify_exhaustive,
    verify_seed,
    verify_seeds,
)
from constraints.constraint_ast import (
    ExistsPos,
    EventMatch,
    FirstTerm,
    Repetition,
    PosCompare,
    Restricted,
    Restriction,
    conj,
    expand,
    fetch,
    free_vars,
    invocation,
    reaction,
    relativize,
)
from constraints.evaluation import check_trace, holds, restrict_trace, unify
from constraints.translate import GlobalTranslator, translate_global, translate_local
from logic import formulas as F
from projection.wellformed import object_type
from runtime.runner import Limits, Trace, enumerate_runs, run
from runtime.scheduler import make_scheduler
from syntax import session_types as S
from syntax.parser import parse_formula, parse_global_type, parse_program
from tests.conftest import PAIRS, load_mutant, load_pair, read

ONE_ROUND = read("repeat.async").replace("while (i < 3)", "while (i < 1)")

ONE_CALL = "main -> A.m\nA -> B.n\nend\n"

THREE_CALLS = """
object A {
  Unit m() {
    Fut<Unit> a = B!n();
    Fut<Unit> b = B!n();
    Fut<Unit> c = B!n();
    return unit;
  }
}

object B {
  Unit n() {
    return unit;
  }
}

main { A!m(); }
"""


def fifo_trace(program):
    return run(program, make_scheduler("fifo"))


class TestConstraintTerms:
    """Construction helpers."""

    def test_01_relativize_adds_guards(self):
        r = Restriction("n", PosCompare("n", "<", "c"))
        c = relativize(ExistsPos("i", EventMatch("i", fetch("U"))), r)
        assert c.guards == (r,)

    def test_02_anchored_quantifiers_are_left_alone(self):
        r = Restriction("n", PosCompare("n", "<", "c"))
        c = ExistsPos("i", EventMatch("i", fetch("U")), anchored=True)
        assert relativize(c, r) == c

    def test_03_relativize_reaches_terminations(self):
        r = Restriction("n", PosCompare("n", "<", "c"))
        assert relativize(FirstTerm("k", "U"), r).guards == (r,)

    def test_04_free_vars(self):
        c = ExistsPos("i", PosCompare("i", "<", "c"))
        assert free_vars(c) == {"c"}

    def test_05_unify(self):
        ev = fifo_trace(load_pair("gui")[0]).events[1]
        assert ev.tag == "iEv"
        bound = unify(invocation("U", "I", None, "cmp"), ev, {})
        assert bound == {}
        assert unify(invocation("U", "S"), ev, {}) is None
        assert unify(reaction("U"), ev, {}) is None


class TestGlobalAdherence:
    """Traces of well-typed programs are models of their protocol."""

    @pytest.mark.parametrize("name", sorted(PAIRS))
    def test_01_every_schedule_adheres(self, name):
        program, g = load_pair(name)
        constraint = translate_global(g)
        for trace in enumerate_runs(program).traces:
            verdict = check_trace(trace, constraint)
            assert verdict.ok, verdict.failed

    def test_02_false_postcondition_is_violated(self):
        program, g = load_mutant("gui__false_post")
        verdict = check_trace(fifo_trace(program), translate_global(g))
        assert not verdict.ok
        assert verdict.failed

    def test_03_wrong_state_is_violated(self):
        program, g = load_mutant("gui__wrong_state")
        assert not holds(fifo_trace(program), translate_global(g))

    def test_04_outcome_must_match_reaction(self):
        program, g = load_mutant("branch_high__swapped_reaction")
        assert not holds(fifo_trace(program), translate_global(g))

    def test_05_empty_trace_fails_main(self):
        _, g = load_pair("gui")
        assert not holds(Trace([]), translate_global(g))

    def test_06_other_program_does_not_adhere(self):
        program, _ = load_pair("pipeline")
        _, g = load_pair("gui")
        assert not holds(fifo_trace(program), translate_global(g))

    def test_07_undescribed_calls_are_rejected(self):
        constraint = translate_global(parse_global_type(ONE_CALL))
        traces = enumerate_runs(parse_program(THREE_CALLS)).traces
        assert traces
        assert not any(holds(t, constraint) for t in traces)

    def test_08_described_call_adheres(self):
        constraint = translate_global(parse_global_type(ONE_CALL))
        once = THREE_CALLS.replace("    Fut<Unit> b = B!n();\n    Fut<Unit> c = B!n();\n", "")
        traces = enumerate_runs(parse_program(once)).traces
        assert traces
        assert all(holds(t, constraint) for t in traces)

    def test_09_extra_call_mutant_is_violated(self):
        program, g = load_mutant("gui__extra_call")
        assert not holds(fifo_trace(program), translate_global(g))


class TestRepetition:
    """Cut-point search against brute force over cut-point sets."""

    def repetition(self):
        g = parse_global_type(read("repeat.proto"))
        rep = next(i for i in g.body if isinstance(i, S.GRepeat))
        return GlobalTranslator(g).item(rep, {"U": "run", "S": "comp"})

    def test_01_translation(self):
        c = self.repetition()
        assert isinstance(c, Repetition)
        assert c.patterns
        assert not isinstance(expand(c), Repetition)

    def test_02_search_agrees_with_brute_force(self):
        trace = fifo_trace(parse_program(ONE_ROUND))
        c = self.repetition()
        assert holds(trace, c)
        assert holds(trace, c, segment=False)

    def test_03_broken_invariant_fails_both_ways(self):
        trace = fifo_trace(parse_program(ONE_ROUND))
        c = self.repetition()
        broken = Repetition(parse_formula("U.expect == Nil"), c.inner, c.patterns)
        assert not holds(trace, broken)
        assert not holds(trace, broken, segment=False)

    def test_04_three_rounds(self):
        program, _ = load_pair("repeat")
        assert holds(fifo_trace(program), self.repetition())

    def test_05_window_closing_on_the_last_iteration(self):
        trace = fifo_trace(parse_program(ONE_ROUND))
        last = max(k for k, e in enumerate(trace.events) if e.tag == "fREv")
        windowed = Restricted(self.repetition(), Restriction("n", PosCompare("n", "<=", last)))
        assert holds(trace, windowed)
        assert holds(trace, windowed, segment=False)

    def test_06_random_windows_agree_with_brute_force(self):
        rng = random.Random(17)
        base = self.repetition()
        invariants = [base.invariant, parse_formula("U.expect == Nil"), F.TOP]
        programs = {
            k: parse_program(read("repeat.async").replace("while (i < 3)", f"while (i < {k})"))
            for k in (1, 2, 3)
        }
        verdicts = set()
        for _ in range(200):
            trace = run(programs[rng.choice((1, 2, 3))], make_scheduler("random", seed=rng.randrange(1000)))
            n = len(trace.events)
            lo = rng.randrange(n)
            hi = min(n - 1, lo + rng.randrange(5))
            patterns = base.patterns if rng.random() < 0.5 else ()
            c = Repetition(rng.choice(invariants), base.inner, patterns)
            window = Restriction("n", conj(PosCompare(lo, "<=", "n"), PosCompare("n", "<=", hi)))
            windowed = Restricted(c, window)
            verdict = holds(trace, windowed)
            assert verdict == holds(trace, windowed, segment=False), (lo, hi, c.invariant)
            verdicts.add(verdict)
        assert verdicts == {True, False}


class TestLocalAdherence:
    """Each object's events follow its own object type."""

    @pytest.mark.parametrize("name", ["gui", "pipeline", "repeat"])
    def test_01_restricted_traces(self, name):
        program, g = load_pair(name)
        trace = fifo_trace(program)
        for obj in sorted(S.roles(g)):
            local = translate_local(object_type(g, obj), obj)
            assert holds(restrict_trace(trace, obj), local), obj

    def test_02_restriction_keeps_all_terminations(self):
        trace = fifo_trace(load_pair("gui")[0])
        restricted = restrict_trace(trace, "U")
        assert {e.obj for e in restricted.events if e.tag != "fEv"} == {"U"}
        assert sum(e.tag == "fEv" for e in restricted.events) == 4

    def test_03_missing_read_violates(self):
        program, _ = load_mutant("gui__dropped_get")
        _, g = load_pair("gui")
        trace = fifo_trace(program)
        local = translate_local(object_type(g, "U"), "U")
        assert not holds(restrict_trace(trace, "U"), local)

    @pytest.mark.parametrize("name", ["branch_high", "branch_low"])
    def test_04_choice_participants(self, name):
        program, g = load_pair(name)
        trace = fifo_trace(program)
        for obj in ("X1", "X2"):
            local = translate_local(object_type(g, obj), obj)
            assert holds(restrict_trace(trace, obj), local), obj


class TestAdherenceRuns:
    """Seeded and exhaustive adherence checks."""

    def test_01_seeded(self):
        program, g = load_pair("gui")
        verdict = verify_seed(program, translate_global(g), 5)
        assert (verdict.seed, verdict.outcome) == (5, OK)
        assert verdict.trace.startswith("iREv(U")

    def test_02_exhaustive(self):
        program, g = load_pair("pipeline")
        summary = AdherenceSummary.merge(verify_exhaustive(program, translate_global(g)))
        assert summary.ok
        assert summary.describe() == f"all {summary.count(OK)} traces adhere"

    def test_03_violation_summary(self):
        program, g = load_mutant("gui__false_post")
        verdict = check_one(fifo_trace(program), translate_global(g), seed=2)
        assert verdict.outcome == VIOLATED
        summary = AdherenceSummary.merge([verdict, RunVerdict(1, OK, 10)])
        assert not summary.ok
        assert summary.first_failure is verdict
        assert summary.describe() == "1 of 2 traces violate the protocol, 0 runs stuck"

    def test_04_limits_are_counted_separately(self):
        program, g = load_pair("repeat")
        verdict = verify_seed(program, translate_global(g), 0, Limits(max_loop_iters=1))
        assert verdict.outcome == LIMIT
        summary = AdherenceSummary.merge([verdict])
        assert summary.ok
        assert summary.describe() == "all 0 traces adhere (1 runs cut off by limits)"

    def test_05_stuck_runs_fail(self):
        summary = AdherenceSummary.merge([RunVerdict(0, STUCK, 2, "no enabled step")])
        assert not summary.ok
        assert summary.to_dict()["counts"][STUCK] == 1

    def test_06_pooled_runs_match_sequential(self):
        program, g = load_pair("gui")
        constraint = translate_global(g)
        sequential = verify_seeds(program, constraint, range(10, 18))
        pooled = verify_seeds(program, constraint, range(10, 18), workers=4)
        assert [v.seed for v in pooled] == list(range(10, 18))
        assert pooled == sequential
