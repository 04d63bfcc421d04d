"""
Projection of protocols onto objects and methods.

Run with: pytest tests/test_projection.py -v
"""

import random
from pathlib import Path

import pytest

from logic import formulas as F
from logic.validity import Valid, check_validity, is_valid
from projection.methods import project_on_method, segments_in_order
from projection.objects import RULE_CALLER, cs_check, project_on_object, types_equal
from projection.propagation import propagate
from projection.wellformed import RULE_DIST, object_type, project_all, reassemble, well_formed
from syntax import session_types as S
from syntax.parser import parse_formula, parse_global_type, parse_local_type
from tests.conftest import mutant_files, read
from utils.errors import ProjectionUndefined

GOLDEN = Path(__file__).parent / "golden"


def protocol(name):
    return parse_global_type(read(name))


def kinds(local):
    return [type(i).__name__ for i in local.items]


def random_gui(rng):
    def cmp():
        return f"{rng.choice(('>', '>=', '==', '!='))} {rng.randrange(-2, 3)}"

    return (
        f"main -> U.start {{post: U.intern {cmp()}}}\n"
        "U -> I.cmp\n"
        f"I -[f]-> S.cmp {{pre: i == I.dat, post: result {cmp()}}}\n"
        f"I -> U.resume {{pre: x == I.f && I.f {cmp()}, post: result {cmp()}}}\n"
        "U reads x\n"
        "end\n"
    )


def random_repeat(rng):
    invariant = rng.choice(("U.expect != Nil", "U.expect == Nil", "top"))
    post = rng.choice(("U.expect != Nil", "U.expect == Nil", "top"))
    return (
        f"main -> U.run {{post: {post}}}\n"
        "U -> S.comp\n"
        "repeat {\n"
        "  S -[x]-> U.up\n"
        "  S reads x\n"
        f"}} invariant {invariant}\n"
        "end\n"
    )


def sample_protocols(seed):
    """The corpus protocols plus randomly annotated variants of two of them."""
    rng = random.Random(seed)
    texts = [read(name) for name in ("gui.proto", "repeat.proto", "branch.proto", "pipeline.proto")]
    texts += [random_gui(rng), random_repeat(rng)]
    return [parse_global_type(text) for text in texts]


def paired(before, after):
    """Items of a type and its propagated version, matched position by position."""
    for a, b in zip(S.normalize(before), S.normalize(after)):
        yield a, b
        if isinstance(a, S.LRepeat):
            yield from paired(a.body, b.body)
        elif isinstance(a, S.Select):
            for x, y in zip(a.branches, b.branches):
                yield from paired(x, y)
        elif isinstance(a, S.Offer):
            for x, y in zip(a.branches, b.branches):
                yield from paired(x.body, y.body)


def golden(name):
    return parse_local_type((GOLDEN / name).read_text())


class TestObjectTypes:
    """Object types of the corpus protocols."""

    def test_01_gui_object_type(self):
        local = project_on_object(protocol("gui.proto"), "U")
        assert kinds(local) == ["Receive", "Send", "Put", "Receive", "LRead", "Put", "LEnd"]
        assert local.items[2].post == parse_formula("U.intern == 1")
        resume = local.items[3]
        assert resume.method == "resume"
        assert isinstance(resume.pre, F.Exists)
        assert F.free_vars(resume.pre) == {F.Var("x")}
        assert is_valid(F.implies(parse_formula("x == I.f"), resume.pre))

    def test_02_uninvolved_call_is_skipped(self):
        local = project_on_object(protocol("gui.proto"), "S")
        assert kinds(local) == ["Receive", "Put", "LEnd"]
        assert local.items[-2].post == parse_formula("result > 0", "S")

    def test_03_caller_must_be_active(self):
        _, text = mutant_files("gui__inactive_caller")
        with pytest.raises(ProjectionUndefined) as exc:
            project_on_object(parse_global_type(text), "S")
        assert exc.value.rule == RULE_CALLER

    def test_04_caller_precondition_must_be_visible(self):
        g = parse_global_type("main -> A.m\nA -> B.n {pre: C.f > 0}\nend")
        with pytest.raises(ProjectionUndefined) as exc:
            project_on_object(g, "A")
        assert exc.value.rule == RULE_CALLER

    def test_05_reactor_offers(self):
        local = project_on_object(protocol("branch.proto"), "X1")
        offer = next(i for i in local.items if isinstance(i, S.Offer))
        assert offer.source == ("X2", "acc")
        guards = [b.guard for b in offer.branches]
        assert F.alpha_equal(guards[0], parse_formula("result == -1"))
        assert F.alpha_equal(guards[1], parse_formula("result > 0"))

    def test_06_chooser_selects(self):
        local = project_on_object(protocol("branch.proto"), "X2")
        select = next(i for i in local.items if isinstance(i, S.Select))
        assert len(select.branches) == 2

    def test_07_passive_object_follows_the_acting_branch(self):
        local = project_on_object(protocol("branch.proto"), "S")
        receive = next(i for i in local.items if isinstance(i, S.Receive))
        assert receive.method == "log"

    def test_08_repeat_entered_by_callee(self):
        local = project_on_object(protocol("repeat.proto"), "U")
        repeat = next(i for i in local.items if isinstance(i, S.LRepeat))
        assert F.alpha_equal(repeat.invariant, parse_formula("U.expect != Nil"))
        assert isinstance(repeat.body[0], S.Receive) and repeat.body[0].method == "up"


class TestPropagation:
    """Guarantees carried from one process to the next."""

    def test_01_post_reaches_next_receive(self):
        local = object_type(protocol("gui.proto"), "U")
        resume = next(i for i in local.items if isinstance(i, S.Receive) and i.method == "resume")
        assert is_valid(F.implies(resume.pre, parse_formula("U.intern == 1")))

    def test_02_items_are_numbered(self):
        local = object_type(protocol("gui.proto"), "U")
        origins = [i.origin for i in S.local_items(local.items) if hasattr(i, "origin")]
        assert origins and all(o[0] == "U" for o in origins)
        assert len(set(origins)) == len(origins)

    def test_03_invariant_strengthens_put(self):
        local = object_type(protocol("repeat.proto"), "U")
        k = next(n for n, i in enumerate(local.items) if isinstance(i, S.LRepeat))
        before = local.items[k - 1]
        assert isinstance(before, S.Put)
        assert is_valid(F.implies(before.post, parse_formula("U.expect != Nil")))

    @pytest.mark.parametrize("seed", range(10))
    def test_04_idempotent(self, seed):
        for g in sample_protocols(seed):
            for obj in sorted(S.roles(g)):
                once = propagate(project_on_object(g, obj), obj)
                assert types_equal(propagate(once, obj).items, once.items), obj

    @pytest.mark.parametrize("seed", range(10))
    def test_05_preconditions_only_get_stronger(self, seed):
        for g in sample_protocols(seed):
            for obj in sorted(S.roles(g)):
                before = project_on_object(g, obj)
                after = propagate(before, obj)
                for a, b in paired(before.items, after.items):
                    assert type(a) is type(b)
                    if isinstance(a, S.Receive):
                        assert isinstance(check_validity(F.implies(b.pre, a.pre)), Valid), (obj, a.method)


class TestMethodTypes:
    """Splitting object types into method types."""

    def test_01_gui_methods(self):
        projection = project_all(protocol("gui.proto"))
        assert sorted(projection.methods["U"]) == ["resume", "start"]
        (resume,) = projection.method_types("U", "resume")
        assert isinstance(resume.items[0], S.Receive)
        assert any(isinstance(i, S.LRead) and i.expr == F.Var("x") for i in resume.items)

    def test_02_offer_is_preceded_by_its_read(self):
        (start,) = project_all(protocol("branch.proto")).method_types("X1", "start")
        k = next(n for n, i in enumerate(start.items) if isinstance(i, S.Offer))
        assert isinstance(start.items[k - 1], S.LRead)

    def test_03_repeated_callee_gets_loop_method(self):
        projection = project_all(protocol("repeat.proto"))
        assert projection.method_types("U", "up")
        (comp,) = projection.method_types("S", "comp")
        assert any(isinstance(i, S.LRepeat) for i in comp.items)

    def test_04_reassemble_inverts_splitting(self):
        local = object_type(protocol("gui.proto"), "I")
        segments = segments_in_order(local)
        assert types_equal(reassemble(segments), local.items)

    def test_05_project_on_method(self):
        propagated = project_all(protocol("gui.proto")).propagated["S"]
        (cmp,) = project_on_method(propagated, "cmp")
        assert kinds(cmp)[:2] == ["Receive", "Put"]
        assert project_on_method(propagated, "resume") == []

    @pytest.mark.parametrize("obj", ["U", "I", "S"])
    def test_06_reassembled_types_end(self, obj):
        local = object_type(protocol("gui.proto"), obj)
        items = reassemble(segments_in_order(local))
        assert isinstance(items[-1], S.LEnd)
        assert types_equal(items, local.items)


class TestWellFormedness:
    """Well-formedness reports."""

    @pytest.mark.parametrize("name", ["gui.proto", "repeat.proto", "branch.proto", "pipeline.proto"])
    def test_01_corpus_is_well_formed(self, name):
        report = well_formed(protocol(name))
        assert report.ok, [d.render() for d in report.diagnostics]

    def test_02_overlapping_preconditions(self):
        g = parse_global_type("main -> A.m\nA -> B.n\nA -> B.n\nend")
        report = well_formed(g)
        assert [d.rule for d in report.diagnostics] == [RULE_DIST]

    def test_03_separated_preconditions(self):
        g = parse_global_type("main -> A.m\nA -> B.n {pre: v > 0}\nA -> B.n {pre: 0 > v}\nend")
        assert well_formed(g).ok

    def test_04_undefined_projection_is_reported(self):
        _, text = mutant_files("gui__inactive_caller")
        report = well_formed(parse_global_type(text))
        assert RULE_CALLER in [d.rule for d in report.diagnostics]

    def test_05_cs_check(self):
        assert cs_check(parse_formula("X.f > 0 && Y.g > 0"))
        assert not cs_check(parse_formula("X.f > Y.g"))


class TestGoldenTypes:
    """gui.proto projected onto U, compared with stored types modulo bound names."""

    def test_01_object_type(self):
        local = project_on_object(protocol("gui.proto"), "U")
        assert types_equal(local.items, golden("gui_U_object.txt").items)

    def test_02_propagated_type(self):
        local = object_type(protocol("gui.proto"), "U")
        assert types_equal(local.items, golden("gui_U_propagated.txt").items)

    def test_03_resume_method_type(self):
        (resume,) = project_all(protocol("gui.proto")).method_types("U", "resume")
        assert types_equal(resume.items, golden("gui_U_resume.txt").items)

    def test_04_resume_post_reaches_the_put(self):
        (resume,) = project_all(protocol("gui.proto")).method_types("U", "resume")
        assert resume.items[-1].post == parse_formula("result > 0")
