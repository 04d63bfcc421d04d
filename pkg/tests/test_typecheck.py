"""
The type system end to end: well-typed corpus pairs are accepted, every
mutant is rejected by the rule that catches its change.

Run with: pytest tests/test_typecheck.py -v
"""

import pytest

from logic import formulas as F
from projection.objects import RULE_CALLER
from syntax.parser import parse_global_type, parse_program
from tests.conftest import load_mutant, load_pair, mutant_stems, read
from typecheck.checker import RULE_MAIN, RULE_OBJECT, ProgramChecker, check_object, check_program
from typecheck.context import PostDatabase
from typecheck.statements import (
    RULE_CALL,
    RULE_CALL_2,
    RULE_GET,
    RULE_OFFER,
    RULE_RETURN,
    RULE_SELECT,
    RULE_SHAPE,
    RULE_WHILE,
    partitions,
)
from utils.reporting import EXIT_OK, EXIT_REJECTED, EXIT_UNKNOWN

# mutant -> rules any of which may report it
REJECTED_BY = {
    "gui__extra_call": {RULE_CALL, RULE_CALL_2, RULE_SHAPE},
    "gui__reordered": {RULE_CALL, RULE_CALL_2, RULE_GET, RULE_SHAPE},
    "gui__dropped_get": {RULE_RETURN, RULE_SHAPE},
    "gui__wrong_state": {RULE_RETURN},
    "gui__wrong_main": {RULE_MAIN},
    "gui__false_post": {RULE_RETURN},
    "gui__inactive_caller": {RULE_CALLER},
    "repeat__broken_invariant": {RULE_RETURN, RULE_WHILE},
    "branch_high__wrong_guard": {RULE_SELECT},
    "branch_high__swapped_reaction": {RULE_OFFER},
    "pipeline__missing_method": {RULE_OBJECT, RULE_CALL},
}


def rules(report):
    return {d.rule for d in report.diagnostics}


def nonlinear_protocol():
    """gui.proto with a nonlinear postcondition for S.cmp and none for U.resume."""
    text = read("gui.proto").replace("post: result > 0", "post: result * result >= 0", 1)
    return text.replace(", post: result > 0}", "}")


class TestCorpus:
    """Well-typed pairs"""

    def test_01_pairs_are_accepted(self, pair_name):
        report = check_program(*load_pair(pair_name))
        assert report.ok, "\n".join(d.render() for d in report.diagnostics)
        assert report.exit_code() == EXIT_OK

    def test_02_graph_is_complete(self, pair_name):
        checker = ProgramChecker(*load_pair(pair_name))
        checker.run()
        assert checker.graph is not None
        assert checker.projection is not None

    def test_03_reads_are_resolved(self):
        checker = ProgramChecker(*load_pair("gui"))
        checker.run()
        assert list(checker.reads.values()) == [{("S", "cmp")}]

    def test_04_every_mutant_is_listed(self):
        assert set(mutant_stems()) == set(REJECTED_BY)


class TestMutants:
    """Each mutant fails for the reason its change introduces"""

    @pytest.mark.parametrize("stem", sorted(REJECTED_BY))
    def test_01_rejected(self, stem):
        report = check_program(*load_mutant(stem))
        assert not report.ok
        assert rules(report) & REJECTED_BY[stem], [d.render() for d in report.diagnostics]
        assert report.exit_code() == EXIT_REJECTED

    def test_02_wrong_main_names_the_call(self):
        report = check_program(*load_mutant("gui__wrong_main"))
        main = [d for d in report.diagnostics if d.rule == RULE_MAIN]
        assert main[0].location == "main"
        assert "I.cmp" in main[0].message

    def test_03_false_post_counterexample(self):
        report = check_program(*load_mutant("gui__false_post"))
        failed = [d for d in report.diagnostics if d.rule == RULE_RETURN]
        assert failed
        assert failed[0].formula
        assert failed[0].counterexample is not None
        assert not failed[0].unknown

    def test_04_missing_method_warns(self):
        report = check_program(*load_mutant("pipeline__missing_method"))
        assert "C.drop is never called by the protocol" in report.warnings

    def test_05_projection_failure_stops_early(self):
        checker = ProgramChecker(*load_mutant("gui__inactive_caller"))
        checker.run()
        assert checker.graph is None

    @pytest.mark.parametrize("stem, rule", [
        ("branch_high__wrong_guard", RULE_SELECT),
        ("branch_high__swapped_reaction", RULE_OFFER),
    ])
    def test_06_branch_failure_names_its_rule(self, stem, rule):
        report = check_program(*load_mutant(stem))
        failed = [d for d in report.diagnostics if d.rule == rule]
        assert failed, [d.render() for d in report.diagnostics]
        assert "no partition of the branches fits" in failed[0].message
        assert "{1}|{2}" in failed[0].message


class TestUnknown:
    """Premises outside the decidable fragment"""

    def test_01_nonlinear_post(self):
        program = parse_program(read("gui.async"))
        report = check_program(program, parse_global_type(nonlinear_protocol()))
        assert not report.ok
        assert report.unknown
        assert report.exit_code() == EXIT_UNKNOWN

    def test_02_report_json(self):
        program = parse_program(read("gui.async"))
        data = check_program(program, parse_global_type(nonlinear_protocol())).to_dict()
        assert data["version"] == 1
        assert data["ok"] is False
        assert data["unknown"] is True
        assert all(d["unknown"] for d in data["diagnostics"])


class TestCheckObject:
    """T-Object on a single role"""

    def test_01_well_typed_role(self):
        program, g = load_pair("gui")
        for obj in ("U", "I", "S"):
            assert check_object(program, g, obj).ok

    def test_02_broken_role(self):
        program, g = load_mutant("gui__wrong_state")
        assert rules(check_object(program, g, "U")) == {RULE_RETURN}
        assert check_object(program, g, "S").ok

    def test_03_unknown_object(self):
        program, g = load_pair("gui")
        report = check_object(program, g, "Z")
        assert rules(report) == {RULE_OBJECT}
        assert report.diagnostics[0].location == "Z"

    def test_04_diagnostic_location(self):
        program, g = load_mutant("gui__wrong_state")
        diagnostic = check_object(program, g, "U").diagnostics[0]
        assert diagnostic.location.startswith("U.start")


class TestPosts:
    """The postcondition database"""

    def test_01_posts_by_method(self):
        db = PostDatabase.from_global(parse_global_type(read("gui.proto")))
        assert len(db.posts[("S", "cmp")]) == 1
        assert db.fact(("S", "nothing")) == F.TOP
        assert db.facts([]) == F.TOP

    def test_02_partitions(self):
        splits = list(partitions(3))
        assert len(splits) == 6
        for left, right in splits:
            assert left and right
            assert sorted(left + right) == [0, 1, 2]
        assert list(partitions(1)) == []
