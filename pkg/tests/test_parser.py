"""
Parsing of programs, protocols, formulas and local types.

Run with: pytest tests/test_parser.py -v
"""

import random

import pytest

from logic import formulas as F
from syntax import program_ast as A
from syntax import session_types as S
from syntax.parser import parse_formula, parse_global_type, parse_local_type, parse_program
from syntax.pretty import pretty, pretty_formula
from tests.conftest import CORPUS, PAIRS, mutant_files, mutant_stems, read
from utils.errors import AsyncstError, ParseError, ResolutionError


def program(body, main="main { A!m(); }"):
    return f"object A {{\n{body}\n}}\n{main}\n"


class ProgramGenerator:
    """Random programs over two objects that pass resolution."""

    def __init__(self, rng):
        self.rng = rng
        self.futures = 0

    def int_expr(self, depth=2):
        rng = self.rng
        if depth == 0 or rng.random() < 0.4:
            return rng.choice(("x", "y", "this.f", "0", "1", "7", "length(this.l)"))
        if rng.random() < 0.2:
            return f"-{self.int_expr(0)}"
        op = rng.choice(("+", "-", "*"))
        return f"({self.int_expr(depth - 1)} {op} {self.int_expr(depth - 1)})"

    def guard(self, depth=1):
        rng = self.rng
        if depth > 0 and rng.random() < 0.3:
            if rng.random() < 0.3:
                return f"!({self.guard(depth - 1)})"
            op = rng.choice(("&&", "||"))
            return f"({self.guard(depth - 1)} {op} {self.guard(depth - 1)})"
        if rng.random() < 0.1:
            return rng.choice(("true", "false", "this.b"))
        op = rng.choice((">", ">=", "==", "!=", "<", "<="))
        return f"{self.int_expr(1)} {op} {self.int_expr(1)}"

    def statements(self, depth):
        return " ".join(self.statement(depth) for _ in range(self.rng.randint(1, 3)))

    def statement(self, depth=2):
        rng = self.rng
        roll = rng.random()
        if depth > 0 and roll < 0.15:
            return f"if ({self.guard()}) {{ {self.statements(depth - 1)} }} else {{ {self.statements(depth - 1)} }}"
        if depth > 0 and roll < 0.25:
            return f"while ({self.guard()}) {{ {self.statements(depth - 1)} }}"
        if roll < 0.35:
            return "skip;"
        if roll < 0.45:
            return f"this.l = cons({self.int_expr(1)}, this.l);"
        if roll < 0.55:
            return f"this.b = {self.guard(0)};"
        return f"{rng.choice(('y', 'this.f'))} = {self.int_expr()};"

    def call(self):
        self.futures += 1
        name = f"r{self.futures}"
        text = f"Fut<Int> {name} = B!n({self.int_expr(1)});"
        if self.rng.random() < 0.7:
            text += f" y = {name}.get;"
        return text

    def program(self):
        body = []
        for _ in range(self.rng.randint(0, 5)):
            body.append(self.call() if self.rng.random() < 0.3 else self.statement())
        return (
            "object A {\n"
            "  Int f = 0;\n"
            "  Bool b = false;\n"
            "  List<Int> l = Nil;\n"
            "  Int m(Int x) {\n"
            "    Int y = 0;\n"
            f"    {' '.join(body)}\n"
            f"    return {self.int_expr()};\n"
            "  }\n"
            "}\n"
            "object B {\n"
            "  Int n(Int v) { return v; }\n"
            "}\n"
            f"main {{ A!m({self.rng.randrange(10)}); }}\n"
        )


class TestCorpus:
    """Every corpus file parses and survives a print/parse round trip."""

    @pytest.mark.parametrize("name", sorted({p for p, _ in PAIRS.values()}))
    def test_01_programs_round_trip(self, name):
        parsed = parse_program(read(name))
        assert parse_program(pretty(parsed)) == parsed

    @pytest.mark.parametrize("name", sorted({g for _, g in PAIRS.values()} | {"mutual_get.proto"}))
    def test_02_protocols_round_trip(self, name):
        parsed = parse_global_type(read(name))
        assert parse_global_type(pretty(parsed)) == parsed

    @pytest.mark.parametrize("stem", mutant_stems())
    def test_03_mutants_parse(self, stem):
        program_text, protocol_text = mutant_files(stem)
        parse_program(program_text)
        parse_global_type(protocol_text)

    def test_04_gui_shape(self):
        """Objects, the main call and the protocol items of the gui pair."""
        prog = parse_program(read("gui.async"))
        assert prog.object_names == ("U", "I", "S")
        assert prog.main.callee == "U" and prog.main.method == "start"
        assert prog.object("U").field_names == ("intern",)

        g = parse_global_type(read("gui.proto"))
        assert g.main.callee == "U"
        assert isinstance(g.body[-1], S.GEnd)
        call = g.body[1]
        assert (call.caller, call.callee, call.method, call.loc) == ("I", "S", "cmp", "f")
        assert F.alpha_equal(call.pre, parse_formula("i == I.dat"))
        read_item = g.body[3]
        assert isinstance(read_item, S.GRead) and read_item.obj == "U"

    def test_05_protocol_self_binds_to_callee(self):
        g = parse_global_type("main -> X.m {post: self.f == 1}\nend")
        assert g.main.post == F.Eq(F.field("X", "f"), F.int_lit(1))


class TestProgramErrors:
    """Syntax and resolution errors carry a position where one exists."""

    def test_01_syntax_error_line(self):
        text = "object A {\n  Unit m() {\n    return unit\n  }\n}\nmain { A!m(); }\n"
        with pytest.raises(ParseError) as exc:
            parse_program(text)
        assert exc.value.line == 4

    def test_02_unresolved_variable(self):
        with pytest.raises(ResolutionError, match="unresolved variable 'y'"):
            parse_program(program("  Int m() { return y; }"))

    def test_03_return_must_be_last(self):
        with pytest.raises(ResolutionError, match="final statement"):
            parse_program(program("  Int m() { return 1; skip; }"))

    def test_04_missing_return(self):
        with pytest.raises(ResolutionError, match="does not end with a return"):
            parse_program(program("  Int m() { if (true) { return 1; } else { skip; } }"))

    def test_05_unresolved_method(self):
        with pytest.raises(ResolutionError, match="unresolved method 'A.n'"):
            parse_program(program("  Unit m() { return unit; }", "main { A!n(); }"))

    def test_06_duplicate_object(self):
        text = "object A { }\nobject A { }\nmain { A!m(); }\n"
        with pytest.raises(ResolutionError, match="duplicate object"):
            parse_program(text)

    def test_07_call_target_needs_future(self):
        body = "  Unit m() { Int x = A!m(); return unit; }"
        with pytest.raises(ResolutionError, match="future type"):
            parse_program(program(body))

    def test_08_errors_are_value_errors(self):
        with pytest.raises(ValueError):
            parse_program("object")


class TestProtocolErrors:
    """Protocol shape rules enforced at parse time."""

    def test_01_must_start_with_main(self):
        with pytest.raises(ParseError, match="main call"):
            parse_global_type("A -> B.m\nend")

    def test_02_must_end(self):
        with pytest.raises(ParseError, match="end"):
            parse_global_type("main -> A.m\nA -> B.n")

    def test_03_nothing_after_end(self):
        with pytest.raises(ParseError, match="follow"):
            parse_global_type("main -> A.m\nend\nA -> B.n\nend")

    def test_04_no_self_calls(self):
        with pytest.raises(ParseError, match="itself"):
            parse_global_type("main -> A.m\nA -> A.n\nend")

    def test_05_no_choice_in_repeat(self):
        text = """
        main -> A.m
        repeat {
          choice A { branch {post: true} => { end } }
        } invariant true
        end
        """
        with pytest.raises(ParseError):
            parse_global_type(text)

    def test_06_no_modalities_in_annotations(self):
        with pytest.raises(ParseError, match="modalities"):
            parse_global_type("main -> A.m {post: [skip;] true}\nend")

    def test_07_main_has_no_precondition(self):
        with pytest.raises(ParseError, match="precondition"):
            parse_global_type("main -> A.m {pre: true}\nend")


class TestFormulas:
    """Formula parsing and printing."""

    def test_01_comparisons_normalize(self):
        assert parse_formula("x < 3") == F.Gt(F.int_lit(3), F.Var("x"))
        assert parse_formula("x <= 3") == F.Geq(F.int_lit(3), F.Var("x"))
        assert parse_formula("x != 3") == F.Not(F.Eq(F.Var("x"), F.int_lit(3)))

    def test_02_quantifier_binds_logical_variable(self):
        phi = parse_formula("exists Int a. a > 0")
        assert phi == F.Exists("Int", "a", F.Gt(F.Var("a", True), F.int_lit(0)))

    def test_03_bare_boolean_term(self):
        assert parse_formula("!result") == F.Not(F.Eq(F.RESULT, F.TRUE_LIT))

    def test_04_modality(self):
        phi = parse_formula("[j = i * 2;] j > 0")
        assert isinstance(phi, F.Modal)
        assert isinstance(phi.stmts[0], A.Assign)

    @pytest.mark.parametrize("text", [
        "x > 0 && y == 1",
        "exists Int a. a > 0 && i > a",
        "X.f == cons(1, Nil) || !(result == 2)",
    ])
    def test_05_print_parse(self, text):
        phi = parse_formula(text)
        assert F.alpha_equal(parse_formula(pretty_formula(phi)), phi)


class TestLocalTypes:
    """The local type notation used by tests and the project command."""

    def test_01_items(self):
        t = parse_local_type("m?<true>.X!n[f]<x == 1>.Read<f>.Put<result > 0>.end")
        kinds = [type(i) for i in t.items]
        assert kinds == [S.Receive, S.Send, S.LRead, S.Put, S.LEnd]
        assert t.items[1].loc == "f"

    def test_02_repeat_and_offer(self):
        t = parse_local_type("(X!m<true>.Read<x>)*<true>.&X.m{<result> end | <!result> end}")
        assert isinstance(t.items[0], S.LRepeat)
        offer = t.items[1]
        assert offer.source == ("X", "m") and len(offer.branches) == 2

    def test_03_pretty_round_trip(self):
        t = parse_local_type("m?<true>.+{X!a<true>.Put<true>.end | Put<false>.end}")
        assert parse_local_type(pretty(t)) == t


class TestRobustness:
    """Damaged input is reported, never crashes the parser."""

    def test_01_character_deletions(self):
        rng = random.Random(7)
        text = read("gui.async")
        for _ in range(60):
            k = rng.randrange(len(text))
            damaged = text[:k] + text[k + 1:]
            try:
                parse_program(damaged)
            except AsyncstError:
                pass

    def test_02_random_bytes(self):
        rng = random.Random(11)
        alphabet = "abcXYZ019 {}()<>[];.,!=-+*&|?\n"
        for _ in range(60):
            junk = "".join(rng.choice(alphabet) for _ in range(rng.randrange(1, 40)))
            for parse in (parse_program, parse_global_type, parse_formula):
                try:
                    parse(junk)
                except AsyncstError:
                    pass

    def test_03_random_byte_strings(self):
        rng = random.Random(23)
        for _ in range(10_000):
            junk = bytes(rng.randrange(256) for _ in range(rng.randrange(1, 64))).decode("latin-1")
            for parse in (parse_program, parse_global_type, parse_formula, parse_local_type):
                try:
                    parse(junk)
                except AsyncstError:
                    pass


class TestGeneratedPrograms:
    """Random well-formed programs survive a print/parse round trip."""

    def test_01_round_trip(self):
        rng = random.Random(29)
        for _ in range(1000):
            text = ProgramGenerator(rng).program()
            parsed = parse_program(text)
            assert parse_program(pretty(parsed)) == parsed, text
