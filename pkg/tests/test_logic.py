"""
State logic: validity, weakening, weakest preconditions and evaluation.

Run with: pytest tests/test_logic.py -v
"""

import itertools
import random

import pytest

from logic import formulas as F
from logic.evaluation import EvalContext, eval_formula
from logic.validity import NotValid, Unknown, Valid, check_validity, is_valid
from logic.weakening import at_heap, is_object_formula, result_facts, weaken
from logic.wp import PostFacts, eliminate_modalities, wp
from runtime.semantics import Semantics
from syntax import program_ast as A
from syntax.parser import parse_formula, parse_program
from syntax.pretty import pretty_formula
from utils.errors import EvaluationError, UnsupportedStatement

VARS = ("x", "y", "z")
SMALL = range(-2, 3)

# a Semantics over an empty object runs the expressions of random histories
RUNNER = Semantics(parse_program("object A {\n  Unit m() { return unit; }\n}\nmain { A!m(); }\n"))


def valid(text):
    return check_validity(eliminate_modalities(parse_formula(text)))


def random_int_expr(rng, depth=2):
    if depth == 0 or rng.random() < 0.4:
        return rng.choice(VARS + ("0", "1", "2"))
    if rng.random() < 0.2:
        return f"2 * {random_int_expr(rng, 0)}"
    op = rng.choice("+-")
    return f"({random_int_expr(rng, depth - 1)} {op} {random_int_expr(rng, depth - 1)})"


def random_guard(rng, depth=1):
    if depth > 0 and rng.random() < 0.3:
        op = rng.choice(("&&", "||"))
        return f"({random_guard(rng, depth - 1)} {op} {random_guard(rng, depth - 1)})"
    op = rng.choice((">", ">=", "==", "!=", "<", "<="))
    return f"{random_int_expr(rng, 1)} {op} {random_int_expr(rng, 1)}"


def random_statement(rng, depth=1):
    if depth > 0 and rng.random() < 0.3:
        then = " ".join(random_statement(rng, depth - 1) for _ in range(rng.randint(1, 2)))
        orelse = " ".join(random_statement(rng, depth - 1) for _ in range(rng.randint(1, 2)))
        return f"if ({random_guard(rng)}) {{ {then} }} else {{ {orelse} }}"
    return f"{rng.choice(VARS)} = {random_int_expr(rng)};"


def execute(stmts, store):
    for s in stmts:
        if isinstance(s, A.Assign):
            store = {**store, s.target.name: RUNNER.eval(s.expr, "A", {}, store)}
        elif isinstance(s, A.If):
            store = execute(s.then if RUNNER.eval(s.guard, "A", {}, store) else s.orelse, store)
    return store


def random_linear_atom(rng):
    term = rng.choice(("x", "y", "x + y", "x - y", "2 * x", "x + 2 * y", "y - 2 * x"))
    op = rng.choice((">", ">=", "==", "!=", "<", "<="))
    return f"{term} {op} {rng.choice(SMALL)}"


def random_linear_formula(rng, depth=2):
    if depth == 0 or rng.random() < 0.3:
        atom = random_linear_atom(rng)
        return f"!({atom})" if rng.random() < 0.2 else atom
    op = rng.choice(("&&", "||"))
    return f"({random_linear_formula(rng, depth - 1)} {op} {random_linear_formula(rng, depth - 1)})"


class TestValidity:
    """The decision procedure on its supported fragment."""

    @pytest.mark.parametrize("text", [
        "x > 0 || 0 >= x",
        "!(x > y && y > x)",
        "!(x == y && y == z) || x == z",
        "!(exists Int a. a > 0 && i > a) || i > 1",
        "cons(1, Nil) != Nil",
        "!(result == -1 && result > 0)",
    ])
    def test_01_valid(self, text):
        assert isinstance(valid(text), Valid)

    def test_02_counterexample(self):
        verdict = valid("x > 0")
        assert isinstance(verdict, NotValid)
        assert "x" in verdict.counterexample
        assert int(verdict.counterexample["x"]) <= 0

    def test_03_field_counterexample(self):
        verdict = valid("U.intern == 1")
        assert isinstance(verdict, NotValid)
        assert "U.intern" in verdict.counterexample

    def test_04_nonlinear_is_unknown(self):
        assert isinstance(valid("x * y >= 0"), Unknown)

    def test_05_modalities_must_be_eliminated(self):
        assert isinstance(check_validity(parse_formula("[skip;] true")), Unknown)

    def test_06_verdicts_are_truthy_only_when_valid(self):
        assert valid("x == x")
        assert not valid("x > 0")
        assert not valid("x * y >= 0")
        assert is_valid(parse_formula("x >= x"))

    def test_07_agrees_with_brute_force(self):
        rng = random.Random(5)
        decided = {Valid: 0, NotValid: 0}
        for _ in range(200):
            phi = parse_formula(random_linear_formula(rng))
            verdict = check_validity(phi)
            falsified = [
                (x, y) for x, y in itertools.product(SMALL, SMALL)
                if not eval_formula(phi, EvalContext(store={"x": x, "y": y}))
            ]
            if isinstance(verdict, Valid):
                assert not falsified, pretty_formula(phi)
            elif isinstance(verdict, NotValid):
                cex = {v: int(verdict.counterexample.get(v, "0")) for v in ("x", "y")}
                assert not eval_formula(phi, EvalContext(store=cex)), pretty_formula(phi)
            else:
                continue
            decided[type(verdict)] += 1
        assert decided[Valid] and decided[NotValid]


class TestWeakening:
    """Restriction of formulas to what one object can observe."""

    def test_01_foreign_fields_become_existentials(self):
        phi = parse_formula("X.f > 0 && i > X.f")
        expected = parse_formula("exists Int a. a > 0 && i > a")
        assert F.alpha_equal(weaken(phi, "Y"), expected)

    def test_02_own_fields_stay(self):
        phi = parse_formula("X.f > 0 && i > X.f")
        assert weaken(phi, "X") == phi
        assert is_object_formula(phi, "X")
        assert not is_object_formula(phi, "Y")

    def test_03_weakening_is_implied(self):
        phi = parse_formula("X.f > 0 && i > X.f")
        assert is_valid(F.implies(phi, weaken(phi, "Y")))

    def test_04_at_heap_forgets_locals_and_result(self):
        phi = at_heap(parse_formula("X.f == x && result > 0 && Y.g == 2"), "X")
        assert not F.mentions_result(phi)
        assert not any(not v.logical for v in F.free_vars(phi))
        assert F.field("X", "f") in F.field_selects(phi)
        assert F.field("Y", "g") not in F.field_selects(phi)

    def test_05_result_facts(self):
        phi = result_facts(parse_formula("result > 0 && X.f == 3"))
        assert F.field_selects(phi) == set()
        assert F.mentions_result(phi)

    def test_06_sound_on_random_states(self):
        rng = random.Random(9)
        terms = ("X.f", "Y.g", "i", "X.f + Y.g", "Y.g - i")
        for _ in range(100):
            text = " && ".join(
                f"{rng.choice(terms)} {rng.choice(('>', '>=', '==', '!='))} {rng.choice(terms)}"
                for _ in range(rng.randint(1, 3))
            )
            phi = parse_formula(text)
            weakened = {obj: weaken(phi, obj) for obj in ("X", "Y", "Z")}
            for f, g, i in itertools.product(SMALL, repeat=3):
                ctx = EvalContext(heaps={"X": {"f": f}, "Y": {"g": g}}, store={"i": i}, ints=tuple(SMALL))
                if eval_formula(phi, ctx):
                    for obj, psi in weakened.items():
                        assert eval_formula(psi, ctx), (text, obj)

    def test_07_idempotent(self):
        rng = random.Random(13)
        for _ in range(50):
            phi = parse_formula(f"X.f > {rng.choice(SMALL)} && i > X.f && Y.g != X.f + i")
            for obj in ("X", "Y", "Z"):
                once = weaken(phi, obj)
                assert F.alpha_equal(weaken(once, obj), once)


class TestWeakestPreconditions:
    """wp over loop-free histories."""

    def test_01_assignment(self):
        assert isinstance(valid("!(exists Int a. a > 0 && i > a) || [j = i * 2;] j > 0"), Valid)

    def test_02_field_store(self):
        assert isinstance(valid("[this.f = x + 1;] this.f > x"), Valid)

    def test_03_branches(self):
        assert isinstance(valid("[if (x > 0) { y = x; } else { y = 0 - x; }] y >= 0"), Valid)
        assert isinstance(valid("[if (x > 0) { y = x; } else { y = x; }] y >= 0"), NotValid)

    def test_04_boolean_assignment(self):
        assert isinstance(valid("[b = x > 3;] (b == true || 3 >= x)"), Valid)

    def test_05_get_uses_site_facts(self):
        modal = parse_formula("[Int v = x.get;] v > 0")
        get = modal.stmts[0]
        bare = wp(modal.stmts, modal.body, PostFacts())
        assert isinstance(check_validity(bare), NotValid)
        ctx = PostFacts()
        ctx.add(get, parse_formula("result > 0"))
        assert isinstance(check_validity(wp(modal.stmts, modal.body, ctx)), Valid)

    def test_06_loops_are_rejected(self):
        with pytest.raises(UnsupportedStatement):
            eliminate_modalities(parse_formula("[while (x > 0) { x = x - 1; }] x == 0"))

    @pytest.mark.parametrize("x", range(-3, 6))
    def test_07_agrees_with_execution(self, x):
        """wp evaluated before the history equals the postcondition evaluated after it."""
        modal = parse_formula("[y = x * 2; if (y > 4) { z = y - 4; } else { z = 0; }] z > 1")
        pre = wp(modal.stmts, modal.body)
        y = x * 2
        z = y - 4 if y > 4 else 0
        assert eval_formula(pre, EvalContext(store={"x": x})) == (z > 1)

    def test_08_random_programs_agree_with_execution(self):
        rng = random.Random(3)
        for _ in range(50):
            history = " ".join(random_statement(rng) for _ in range(rng.randint(1, 5)))
            modal = parse_formula(f"[{history}] {random_guard(rng)}")
            pre = wp(modal.stmts, modal.body)
            for values in itertools.product(SMALL, repeat=len(VARS)):
                start = dict(zip(VARS, values))
                after = execute(modal.stmts, start)
                expected = eval_formula(modal.body, EvalContext(store=after))
                assert eval_formula(pre, EvalContext(store=start)) == expected, (history, start)


class TestEvaluation:
    """Direct evaluation of formulas in a state."""

    def test_01_fields_and_locals(self):
        ctx = EvalContext(heaps={"U": {"intern": 1}}, store={"x": 4})
        assert eval_formula(parse_formula("U.intern == 1 && x > 3"), ctx)
        assert not eval_formula(parse_formula("U.intern == 2"), ctx)

    def test_02_self_needs_frame(self):
        ctx = EvalContext(heaps={"U": {"intern": 1}})
        with pytest.raises(EvaluationError):
            eval_formula(parse_formula("this.intern == 1"), ctx)
        framed = EvalContext(heaps={"U": {"intern": 1}}, self_obj="U")
        assert eval_formula(parse_formula("this.intern == 1"), framed)

    def test_03_result(self):
        ctx = EvalContext(result=5)
        assert eval_formula(parse_formula("result > 0"), ctx)
        with pytest.raises(EvaluationError):
            eval_formula(parse_formula("result > 0"), EvalContext())

    def test_04_exists_over_domain(self):
        ctx = EvalContext(store={"i": 3}, ints=(3,))
        assert eval_formula(parse_formula("exists Int a. a > 0 && i > a"), ctx)
        ctx = EvalContext(store={"i": 1}, ints=(1,))
        assert not eval_formula(parse_formula("exists Int a. a > 0 && i > a"), ctx)

    def test_05_lists(self):
        ctx = EvalContext(heaps={"U": {"expect": (1,)}})
        assert eval_formula(parse_formula("U.expect != Nil && head(U.expect) == 1"), ctx)
