"""
Command-line front end: exit codes and output channels.

Run with: pytest tests/test_cli.py -v
"""

import json
from pathlib import Path

from projection.objects import types_equal
from runtime.runner import run, write_trace
from runtime.scheduler import make_scheduler
from syntax.parser import parse_local_type, parse_program
from tests.conftest import CORPUS, MUTANTS
from utils.logger import Logger
from utils.reporting import EXIT_OK, EXIT_REJECTED, EXIT_USAGE
from workflows.cli import main

GUI = str(CORPUS / "gui.async")
GUI_PROTO = str(CORPUS / "gui.proto")
PIPELINE = str(CORPUS / "pipeline.async")

SELF_GET = """
object A {
  Int m() {
    Fut<Int> f = A!n();
    Int v = f.get;
    return v;
  }
  Int n() { return 1; }
}
main { A!m(); }
"""


class TestUsage:
    """Argument errors exit with 64"""

    def test_01_missing_subcommand(self, capsys):
        assert main([]) == EXIT_USAGE
        assert "[Usage]" in capsys.readouterr().err

    def test_02_unreadable_file(self, capsys):
        assert main(["check", "no/such.async", GUI_PROTO]) == EXIT_USAGE
        assert "cannot read no/such.async" in capsys.readouterr().err

    def test_03_unknown_policy(self):
        assert main(["run", GUI, "--policy", "lifo"]) == EXIT_USAGE

    def test_04_trace_excludes_runs(self, tmp_path):
        trace = tmp_path / "t.jsonl"
        assert main(["verify", GUI, GUI_PROTO, "--trace", str(trace), "--runs", "2"]) == EXIT_USAGE

    def test_05_help(self, capsys):
        assert main(["--help"]) == EXIT_OK
        assert "check" in capsys.readouterr().out

    def test_06_syntax_error_is_a_rejection(self, tmp_path, capsys):
        bad = tmp_path / "bad.async"
        bad.write_text("object A {")
        assert main(["run", str(bad)]) == EXIT_REJECTED
        assert "[ParseError]" in capsys.readouterr().err


class TestCheck:
    """The check subcommand"""

    def test_01_accepts_corpus_pair(self, capsys):
        assert main(["check", GUI, GUI_PROTO]) == EXIT_OK
        assert "adheres to" in capsys.readouterr().err

    def test_02_rejects_mutant(self, capsys):
        assert main(["check", str(MUTANTS / "gui__wrong_state.async"), GUI_PROTO]) == EXIT_REJECTED
        assert "T-Return" in capsys.readouterr().err

    def test_03_json_report_on_stdout(self, capsys):
        assert main(["check", GUI, GUI_PROTO, "--json-report", "-"]) == EXIT_OK
        data = json.loads(capsys.readouterr().out)
        assert data["version"] == 1
        assert data["ok"] is True
        assert data["diagnostics"] == []

    def test_04_json_report_to_file(self, tmp_path):
        path = tmp_path / "report.json"
        main(["check", str(MUTANTS / "gui__wrong_main.async"), GUI_PROTO, "--json-report", str(path)])
        data = json.loads(path.read_text())
        assert data["ok"] is False
        assert data["diagnostics"][0]["rule"] == "T-Main"


class TestProject:
    """The project subcommand"""

    def test_01_object_types(self, capsys):
        assert main(["project", GUI_PROTO, "--object", "U"]) == EXIT_OK
        out = capsys.readouterr().out
        assert out.startswith("U object: ")
        assert "U propagated: " in out

    def test_02_method_types(self, capsys):
        assert main(["project", GUI_PROTO, "--object", "U", "--method", "resume"]) == EXIT_OK
        assert capsys.readouterr().out.startswith("U.resume [1]: ")

    def test_03_json(self, capsys):
        assert main(["project", GUI_PROTO, "--json"]) == EXIT_OK
        data = json.loads(capsys.readouterr().out)
        assert sorted(data) == ["I", "S", "U"]
        assert set(data["S"]) == {"object", "propagated"}

    def test_04_unknown_role(self):
        assert main(["project", GUI_PROTO, "--object", "Z"]) == EXIT_USAGE

    def test_05_projection_failure(self, capsys):
        proto = str(MUTANTS / "gui__inactive_caller.proto")
        assert main(["project", proto]) == EXIT_REJECTED
        assert "projection rule 1" in capsys.readouterr().err

    def test_06_printed_method_type_matches_golden(self, capsys):
        main(["project", GUI_PROTO, "--object", "U", "--method", "resume"])
        printed = capsys.readouterr().out.strip().split(": ", 1)[1]
        expected = (Path(__file__).parent / "golden" / "gui_U_resume.txt").read_text()
        assert types_equal(parse_local_type(printed).items, parse_local_type(expected).items)


class TestRun:
    """The run subcommand"""

    def test_01_prints_trace(self, capsys):
        assert main(["run", GUI, "--seed", "3"]) == EXIT_OK
        captured = capsys.readouterr()
        assert "iREv" in captured.out
        assert "terminated after" in captured.err

    def test_02_stuck_program(self, tmp_path, capsys):
        path = tmp_path / "self_get.async"
        path.write_text(SELF_GET)
        assert main(["run", str(path)]) == EXIT_REJECTED
        assert "stuck after" in capsys.readouterr().err

    def test_03_recorded_trace_verifies(self, tmp_path):
        trace = tmp_path / "gui.jsonl"
        assert main(["run", GUI, "--seed", "5", "--trace", str(trace)]) == EXIT_OK
        assert trace.read_text()
        assert main(["verify", GUI, GUI_PROTO, "--trace", str(trace)]) == EXIT_OK

    def test_04_trace_file_is_rewritten(self, tmp_path):
        trace = tmp_path / "t.jsonl"
        assert main(["run", GUI, "--seed", "1", "--trace", str(trace)]) == EXIT_OK
        assert main(["run", PIPELINE, "--seed", "3", "--trace", str(trace)]) == EXIT_OK
        assert {json.loads(line)["seed"] for line in trace.read_text().splitlines()} == {3}
        assert main(["verify", GUI, GUI_PROTO, "--trace", str(trace)]) == EXIT_REJECTED

    def test_05_mixed_trace_file(self, tmp_path, capsys):
        trace = tmp_path / "t.jsonl"
        logger = Logger(str(trace))
        program = parse_program((CORPUS / "gui.async").read_text())
        for seed in (1, 3):
            write_trace(run(program, make_scheduler("random", seed)), logger, seed=seed)
        assert main(["verify", GUI, GUI_PROTO, "--trace", str(trace)]) == EXIT_REJECTED
        assert "[ParseError]" in capsys.readouterr().err


class TestVerify:
    """The verify subcommand"""

    def test_01_seeded_runs(self, capsys):
        assert main(["verify", GUI, GUI_PROTO, "--runs", "3"]) == EXIT_OK
        assert "all 3 traces adhere" in capsys.readouterr().err

    def test_02_false_post_is_violated(self, capsys):
        proto = str(MUTANTS / "gui__false_post.proto")
        assert main(["verify", GUI, proto, "--runs", "2", "--json"]) == EXIT_REJECTED
        data = json.loads(capsys.readouterr().out)
        assert data["ok"] is False
        assert data["counts"]["violated"] == 2

    def test_03_exhaustive(self, capsys):
        assert main(["verify", GUI, GUI_PROTO, "--exhaustive"]) == EXIT_OK
        assert "exploring every schedule" in capsys.readouterr().err

    def test_04_workers_do_not_change_the_result(self, capsys):
        main(["verify", GUI, GUI_PROTO, "--runs", "6", "--workers", "1", "--json"])
        alone = json.loads(capsys.readouterr().out)
        assert main(["verify", GUI, GUI_PROTO, "--runs", "6", "--workers", "3", "--json"]) == EXIT_OK
        pooled = json.loads(capsys.readouterr().out)
        assert pooled == alone
        assert [r["seed"] for r in pooled["runs"]] == list(range(6))

    def test_05_workers_must_be_positive(self):
        assert main(["verify", GUI, GUI_PROTO, "--workers", "0"]) == EXIT_USAGE


class TestGraph:
    """The graph subcommand"""

    def test_01_dot_on_stdout(self, capsys):
        assert main(["graph", GUI, GUI_PROTO]) == EXIT_OK
        captured = capsys.readouterr()
        assert captured.out.startswith("digraph causality {")
        assert "admissible" in captured.err

    def test_02_json_to_file(self, tmp_path):
        path = tmp_path / "gui.json"
        assert main(["graph", GUI, GUI_PROTO, "--json", "--dot", str(path)]) == EXIT_OK
        data = json.loads(path.read_text())
        assert {e["kind"] for e in data["edges"]} >= {"seq", "call", "get"}

    def test_03_projection_failure(self):
        proto = str(MUTANTS / "gui__inactive_caller.proto")
        assert main(["graph", GUI, proto]) == EXIT_REJECTED
