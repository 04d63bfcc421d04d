"""
Parsers for Async programs, protocol files, formulas and local types.

One lark grammar serves all four entry points so that formulas read the
same everywhere. Parse trees are turned into ASTs by a Transformer, then a
resolution pass checks names and return positions for programs and binds
`self` for protocol formulas.
"""

from dataclasses import replace
from itertools import count
from typing import Dict, FrozenSet, List, Optional, Tuple

from lark import Lark, Token, Transformer, v_args
from lark.exceptions import LarkError, UnexpectedEOF, UnexpectedInput, VisitError

from logic import formulas as F
from syntax import program_ast as A
from syntax import session_types as S
from syntax.expressions import ExprTranslator
from utils.errors import AsyncstError, ParseError, ResolutionError

GRAMMAR = r"""
// ---------- programs
program: object_decl* main_block

object_decl: "object" NAME "{" member* "}"
?member: field_decl | method_decl
field_decl: type NAME "=" expr ";"
method_decl: type NAME "(" params ")" block
params: [param ("," param)*]
param: type NAME
main_block: "main" "{" NAME "!" NAME "(" args ")" ";" "}"

type: NAME ("<" type ">")?
block: "{" stmt* "}"

?stmt: decl_stmt | assign_stmt | call_stmt | get_stmt | skip_stmt
     | if_stmt | while_stmt | return_stmt
decl_stmt: type NAME "=" rhs ";"
assign_stmt: lhs "=" rhs ";"
call_stmt: call ";"
get_stmt: getexpr ";"
skip_stmt: "skip" ";"
if_stmt: "if" "(" expr ")" block ("else" block)?
while_stmt: "while" "(" expr ")" block
return_stmt: "return" expr ";"

?rhs: call | getexpr | expr
call: NAME "!" NAME "(" args ")"
getexpr: unary "." "get"
?lhs: NAME                  -> local_lhs
    | "this" "." NAME       -> field_lhs
args: [expr ("," expr)*]

// ---------- expressions and formulas
?expr: quant | or_expr
?quant: "exists" NAME NAME "." expr   -> quant_sorted
      | "exists" NAME "." expr        -> quant_plain
?or_expr: and_expr | and_expr "||" or_expr -> or_
?and_expr: not_expr | not_expr "&&" and_expr -> and_
?not_expr: cmp_expr
         | "!" not_expr               -> not_
         | "[" stmt* "]" not_expr     -> modal
?cmp_expr: sum
         | sum "==" sum -> eq
         | sum "!=" sum -> ne
         | sum ">=" sum -> ge
         | sum ">" sum  -> gt
         | sum "<=" sum -> le
         | sum "<" sum  -> lt
?sum: product | sum "+" product -> add | sum "-" product -> sub
?product: unary | product "*" unary -> mul
?unary: atom | "-" unary -> neg
?atom: INT                    -> int_lit
     | "true"                 -> true_lit
     | "false"                -> false_lit
     | "Nil"                  -> nil_lit
     | "unit"                 -> unit_lit
     | "top"                  -> top_lit
     | "result"               -> result_ref
     | "self"                 -> self_lit
     | "this" "." NAME        -> this_field
     | "self" "." NAME        -> self_field
     | NAME "." NAME          -> qualified
     | NAME                   -> var_ref
     | NAME "(" args ")"      -> apply
     | "(" expr ")"

formula: expr

// ---------- protocols
protocol: "main" "->" NAME "." NAME annot? gseq
gseq: (gitem "."?)*
?gitem: NAME "->" NAME "." NAME annot?              -> gcall_plain
      | NAME "-[" NAME "]->" NAME "." NAME annot?   -> gcall_loc
      | NAME "reads" expr                           -> gread
      | "repeat" "{" gseq "}" "invariant" expr      -> grepeat
      | "choice" NAME "{" branch+ "}"               -> gchoice
      | "end"                                       -> gend
annot: "{" annot_entry ("," annot_entry)* "}"
?annot_entry: "pre" ":" expr   -> pre_entry
            | "post" ":" expr  -> post_entry
branch: "branch" "{" "post" ":" expr reacts? "}" "=>" "{" gseq "}"
reacts: "," "reacts" ":" "[" [reaction ("," reaction)*] "]"
reaction: NAME "{" "post" ":" expr "}"

// ---------- local types
local_type: litem ("." litem)*
?litem: NAME "?" "<" expr ">"                           -> l_receive
      | NAME "!" NAME ("[" NAME "]")? "<" expr ">"      -> l_send
      | "Put" "<" expr ">"                              -> l_put
      | "Read" "<" expr ">"                             -> l_read
      | "skip"                                          -> l_skip
      | "(" local_type ")" "*" "<" expr ">"             -> l_repeat
      | "+" "{" local_type ("|" local_type)* "}"        -> l_select
      | "&" NAME "." NAME "{" offer_branch ("|" offer_branch)* "}" -> l_offer
      | "end"                                           -> l_end
offer_branch: "<" expr ">" local_type

NAME: /[A-Za-z_][A-Za-z0-9_]*/
INT: /[0-9]+/
COMMENT: /\/\/[^\n]*/

%import common.WS
%ignore WS
%ignore COMMENT
"""


# ----------------------------------
# Parse-tree markers
# ----------------------------------

class _CallRhs:
    def __init__(self, callee: str, method: str, args: Tuple[A.Expr, ...]):
        self.callee, self.method, self.args = callee, method, args


class _GetRhs:
    def __init__(self, future: A.Expr):
        self.future = future


def _pos(meta) -> Optional[Tuple[int, int]]:
    if getattr(meta, "empty", True):
        return None
    return (meta.line, meta.column)


def _names(children) -> List[str]:
    return [str(c) for c in children if isinstance(c, Token)]


@v_args(meta=True)
class AsyncTransformer(Transformer):
    """Builds unresolved ASTs; protocol items stay raw until binding."""

    # ---------- programs
    def program(self, meta, children):
        return ("program", tuple(children[:-1]), children[-1])

    def object_decl(self, meta, children):
        name = str(children[0])
        members = children[1:]
        fields = tuple(m for m in members if isinstance(m, A.FieldDecl))
        methods = tuple(m for m in members if isinstance(m, A.MethodDecl))
        return (name, fields, methods, _pos(meta))

    def field_decl(self, meta, children):
        return A.FieldDecl(children[0], str(children[1]), children[2])

    def method_decl(self, meta, children):
        ret, name, params, body = children
        return A.MethodDecl(ret, str(name), params, body, _pos(meta))

    def params(self, meta, children):
        return tuple(c for c in children if c is not None)

    def param(self, meta, children):
        return A.Param(children[0], str(children[1]))

    def main_block(self, meta, children):
        return (str(children[0]), str(children[1]), children[2], _pos(meta))

    def type(self, meta, children):
        return A.TypeRef(str(children[0]), children[1] if len(children) > 1 else None)

    def block(self, meta, children):
        return tuple(children)

    def args(self, meta, children):
        return tuple(c for c in children if c is not None)

    # ---------- statements
    def _bind(self, target, rhs, declared, meta):
        if isinstance(rhs, _CallRhs):
            return A.Call(target, rhs.callee, rhs.method, rhs.args, declared, _pos(meta))
        if isinstance(rhs, _GetRhs):
            return A.Get(target, rhs.future, declared, _pos(meta))
        return A.Assign(target, rhs, declared, _pos(meta))

    def decl_stmt(self, meta, children):
        declared, name, rhs = children
        return self._bind(A.Location("local", str(name)), rhs, declared, meta)

    def assign_stmt(self, meta, children):
        return self._bind(children[0], children[1], None, meta)

    def local_lhs(self, meta, children):
        return A.Location("local", str(children[0]))

    def field_lhs(self, meta, children):
        return A.Location("field", str(children[0]))

    def call(self, meta, children):
        return _CallRhs(str(children[0]), str(children[1]), children[2])

    def getexpr(self, meta, children):
        return _GetRhs(children[0])

    def call_stmt(self, meta, children):
        return self._bind(None, children[0], None, meta)

    def get_stmt(self, meta, children):
        return self._bind(None, children[0], None, meta)

    def skip_stmt(self, meta, children):
        return A.Skip(_pos(meta))

    def if_stmt(self, meta, children):
        orelse = children[2] if len(children) > 2 else ()
        return A.If(children[0], children[1], orelse, _pos(meta))

    def while_stmt(self, meta, children):
        return A.While(children[0], children[1], _pos(meta))

    def return_stmt(self, meta, children):
        return A.Return(children[0], _pos(meta))

    # ---------- expressions
    def quant_sorted(self, meta, children):
        return A.Quant(str(children[0]), str(children[1]), children[2])

    def quant_plain(self, meta, children):
        return A.Quant(None, str(children[0]), children[1])

    def _bin(op):
        def build(self, meta, children):
            return A.BinOp(op, children[0], children[1])
        return build

    or_ = _bin("||")
    and_ = _bin("&&")
    eq = _bin("==")
    ne = _bin("!=")
    ge = _bin(">=")
    gt = _bin(">")
    le = _bin("<=")
    lt = _bin("<")
    add = _bin("+")
    sub = _bin("-")
    mul = _bin("*")

    def not_(self, meta, children):
        return A.UnOp("!", children[0])

    def modal(self, meta, children):
        return A.ModalExpr(tuple(children[:-1]), children[-1])

    def neg(self, meta, children):
        inner = children[0]
        if isinstance(inner, A.IntLit):
            return A.IntLit(-inner.value)
        return A.UnOp("-", inner)

    def int_lit(self, meta, children):
        return A.IntLit(int(children[0]))

    def true_lit(self, meta, children):
        return A.BoolLit(True)

    def false_lit(self, meta, children):
        return A.BoolLit(False)

    def nil_lit(self, meta, children):
        return A.NilLit()

    def unit_lit(self, meta, children):
        return A.UnitLit()

    def top_lit(self, meta, children):
        return A.TopLit()

    def result_ref(self, meta, children):
        return A.ResultRef()

    def self_lit(self, meta, children):
        return A.SelfLit()

    def this_field(self, meta, children):
        return A.FieldRef(str(children[0]))

    def self_field(self, meta, children):
        return A.QualifiedRef("self", str(children[0]))

    def qualified(self, meta, children):
        return A.QualifiedRef(str(children[0]), str(children[1]))

    def var_ref(self, meta, children):
        return A.VarRef(str(children[0]))

    def apply(self, meta, children):
        return A.Apply(str(children[0]), children[1])

    def formula(self, meta, children):
        return children[0]

    # ---------- protocols (raw, bound later)
    def protocol(self, meta, children):
        callee, method = _names(children)
        annot = children[2] if len(children) > 3 else {}
        return ("protocol", callee, method, annot, children[-1])

    def gseq(self, meta, children):
        return tuple(children)

    def gcall_plain(self, meta, children):
        caller, callee, method = _names(children)
        annot = children[3] if len(children) > 3 else {}
        return ("call", caller, None, callee, method, annot, _pos(meta))

    def gcall_loc(self, meta, children):
        caller, loc, callee, method = _names(children)
        annot = children[4] if len(children) > 4 else {}
        return ("call", caller, loc, callee, method, annot, _pos(meta))

    def gread(self, meta, children):
        return ("read", str(children[0]), children[1], _pos(meta))

    def grepeat(self, meta, children):
        return ("repeat", children[0], children[1], _pos(meta))

    def gchoice(self, meta, children):
        return ("choice", str(children[0]), tuple(children[1:]), _pos(meta))

    def gend(self, meta, children):
        return ("end", _pos(meta))

    def annot(self, meta, children):
        entries: Dict[str, A.Expr] = {}
        for key, value in children:
            if key in entries:
                raise ParseError(f"duplicate '{key}' annotation", *(_pos(meta) or (None, None)))
            entries[key] = value
        return entries

    def pre_entry(self, meta, children):
        return ("pre", children[0])

    def post_entry(self, meta, children):
        return ("post", children[0])

    def branch(self, meta, children):
        post = children[0]
        reactions = children[1] if len(children) > 2 else ()
        return (post, reactions, children[-1], _pos(meta))

    def reacts(self, meta, children):
        return tuple(c for c in children if c is not None)

    def reaction(self, meta, children):
        return (str(children[0]), children[1])

    # ---------- local types (formulas keep `self`)
    def local_type(self, meta, children):
        return tuple(children)

    def _f(self, e):
        return ExprTranslator("self").formula(e)

    def l_receive(self, meta, children):
        return S.Receive(str(children[0]), self._f(children[1]))

    def l_send(self, meta, children):
        names = _names(children)
        loc = names[2] if len(names) > 2 else None
        return S.Send(names[0], names[1], self._f(children[-1]), loc)

    def l_put(self, meta, children):
        return S.Put(self._f(children[0]))

    def l_read(self, meta, children):
        return S.LRead(ExprTranslator("self").term(children[0]))

    def l_skip(self, meta, children):
        return S.LSkip()

    def l_repeat(self, meta, children):
        return S.LRepeat(children[0], self._f(children[1]))

    def l_select(self, meta, children):
        return S.Select(tuple(children))

    def l_offer(self, meta, children):
        return S.Offer((str(children[0]), str(children[1])), tuple(children[2:]))

    def offer_branch(self, meta, children):
        return S.OfferBranch(self._f(children[0]), children[1])

    def l_end(self, meta, children):
        return S.LEnd()


_lark = Lark(
    GRAMMAR,
    start=["program", "protocol", "formula", "local_type"],
    parser="earley",
    lexer="basic",
    propagate_positions=True,
)
_transformer = AsyncTransformer()


def _parse(text: str, start: str):
    try:
        tree = _lark.parse(text, start=start)
        return _transformer.transform(tree)
    except VisitError as exc:
        if isinstance(exc.orig_exc, AsyncstError):
            raise exc.orig_exc from None
        raise ParseError(f"malformed input: {exc.orig_exc}") from None
    except UnexpectedEOF:
        raise ParseError("unexpected end of input") from None
    except UnexpectedInput as exc:
        line = exc.line if exc.line and exc.line > 0 else None
        column = exc.column if exc.column and exc.column > 0 else None
        raise ParseError("syntax error", line, column) from None
    except LarkError as exc:
        raise ParseError(f"syntax error: {exc}") from None
    except RecursionError:
        raise ParseError("input nested too deeply") from None


# ----------------------------------
# Program resolution
# ----------------------------------

BUILTINS = {"cons": 2, "head": 1, "tail": 1, "length": 1}
PROGRAM_TYPES = ("Int", "Bool", "Unit", "List", "Fut")


class _ProgramResolver:
    """Checks names and return positions; fills field-location owners."""

    def __init__(self, objects: Dict[str, tuple]):
        self.objects = objects
        self.signatures = {
            name: {m.name: m for m in methods}
            for name, (_, methods, _) in objects.items()
        }

    def fail(self, message: str, pos=None):
        raise ResolutionError(message, *(pos or (None, None)))

    def check_type(self, t: A.TypeRef, pos=None):
        if t.name not in PROGRAM_TYPES:
            self.fail(f"unknown type '{t.name}'", pos)
        if t.name in ("List", "Fut") and t.arg is None:
            self.fail(f"type '{t.name}' needs an argument", pos)
        if t.name not in ("List", "Fut") and t.arg is not None:
            self.fail(f"type '{t.name}' takes no argument", pos)
        if t.arg is not None:
            self.check_type(t.arg, pos)

    def expr(self, e: A.Expr, scope: FrozenSet[str], fields: FrozenSet[str], pos):
        if isinstance(e, (A.IntLit, A.BoolLit, A.NilLit, A.UnitLit)):
            return
        if isinstance(e, A.VarRef):
            if e.name not in scope and e.name not in self.objects:
                self.fail(f"unresolved variable '{e.name}'", pos)
            return
        if isinstance(e, A.FieldRef):
            if e.name not in fields:
                self.fail(f"unresolved field 'this.{e.name}'", pos)
            return
        if isinstance(e, A.BinOp):
            self.expr(e.left, scope, fields, pos)
            self.expr(e.right, scope, fields, pos)
            return
        if isinstance(e, A.UnOp):
            self.expr(e.operand, scope, fields, pos)
            return
        if isinstance(e, A.Apply):
            if e.fn not in BUILTINS:
                self.fail(f"unknown function '{e.fn}'", pos)
            if len(e.args) != BUILTINS[e.fn]:
                self.fail(f"'{e.fn}' expects {BUILTINS[e.fn]} argument(s)", pos)
            for a in e.args:
                self.expr(a, scope, fields, pos)
            return
        self.fail(f"{type(e).__name__} is only allowed in formulas", pos)

    def call(self, callee: str, method: str, n_args: int, pos):
        if callee not in self.objects:
            self.fail(f"unresolved object '{callee}'", pos)
        decl = self.signatures[callee].get(method)
        if decl is None:
            self.fail(f"unresolved method '{callee}.{method}'", pos)
        if len(decl.params) != n_args:
            self.fail(f"'{callee}.{method}' expects {len(decl.params)} argument(s)", pos)

    def location(self, loc: Optional[A.Location], obj: str, fields, scope, pos):
        if loc is None:
            return None
        if loc.is_field:
            if loc.name not in fields:
                self.fail(f"unresolved field 'this.{loc.name}'", pos)
            return A.Location("field", loc.name, obj)
        if loc.name not in scope:
            self.fail(f"unresolved variable '{loc.name}'", pos)
        return loc

    def block(self, stmts, obj, fields, scope, tail: bool):
        out = []
        for i, s in enumerate(stmts):
            at_tail = tail and i == len(stmts) - 1
            out.append(self.stmt(s, obj, fields, scope, at_tail))
        return tuple(out)

    def stmt(self, s: A.Stmt, obj, fields, scope, tail: bool):
        pos = s.pos
        if getattr(s, "declared", None) is not None:
            self.check_type(s.declared, pos)
        if isinstance(s, A.Assign):
            self.expr(s.expr, scope, fields, pos)
            return replace(s, target=self.location(s.target, obj, fields, scope, pos))
        if isinstance(s, A.Call):
            if s.declared is not None and not s.declared.is_future:
                self.fail("call target must be declared with a future type", pos)
            self.call(s.callee, s.method, len(s.args), pos)
            for a in s.args:
                self.expr(a, scope, fields, pos)
            return replace(s, target=self.location(s.target, obj, fields, scope, pos))
        if isinstance(s, A.Get):
            self.expr(s.future, scope, fields, pos)
            return replace(s, target=self.location(s.target, obj, fields, scope, pos))
        if isinstance(s, A.If):
            self.expr(s.guard, scope, fields, pos)
            return replace(
                s,
                then=self.block(s.then, obj, fields, scope, tail),
                orelse=self.block(s.orelse, obj, fields, scope, tail),
            )
        if isinstance(s, A.While):
            self.expr(s.guard, scope, fields, pos)
            return replace(s, body=self.block(s.body, obj, fields, scope, False))
        if isinstance(s, A.Return):
            if not tail:
                self.fail("return must be the final statement of a method", pos)
            self.expr(s.expr, scope, fields, pos)
            return s
        return s

    def method(self, obj: str, fields, m: A.MethodDecl) -> A.MethodDecl:
        self.check_type(m.return_type, m.pos)
        names = [p.name for p in m.params]
        if len(set(names)) != len(names):
            self.fail(f"duplicate parameter in '{obj}.{m.name}'", m.pos)
        for p in m.params:
            self.check_type(p.type, m.pos)
        declared = {
            s.target.name
            for s in A.walk_statements(m.body)
            if getattr(s, "declared", None) is not None and s.target is not None
        }
        scope = frozenset(names) | frozenset(declared)
        body = self.block(m.body, obj, fields, scope, True)
        if not _ends_with_return(m.body):
            self.fail(f"method '{obj}.{m.name}' does not end with a return on every path", m.pos)
        return replace(m, body=body)


def _ends_with_return(block) -> bool:
    if not block:
        return False
    last = block[-1]
    if isinstance(last, A.Return):
        return True
    if isinstance(last, A.If):
        return _ends_with_return(last.then) and _ends_with_return(last.orelse)
    return False


def parse_program(text: str) -> A.Program:
    """
    Parse and resolve an Async program.

    Raises:
        ParseError: on syntax errors (with line and column)
        ResolutionError: on duplicate or unresolved names and misplaced returns
    """
    _, raw_objects, raw_main = _parse(text, "program")
    objects: Dict[str, tuple] = {}
    for name, fields, methods, pos in raw_objects:
        if name in objects:
            raise ResolutionError(f"duplicate object '{name}'", *(pos or (None, None)))
        field_names = [f.name for f in fields]
        if len(set(field_names)) != len(field_names):
            raise ResolutionError(f"duplicate field in object '{name}'", *(pos or (None, None)))
        method_names = [m.name for m in methods]
        if len(set(method_names)) != len(method_names):
            raise ResolutionError(f"duplicate method in object '{name}'", *(pos or (None, None)))
        objects[name] = (fields, methods, pos)

    resolver = _ProgramResolver(objects)
    decls = []
    for name, (fields, methods, pos) in objects.items():
        fnames = frozenset(f.name for f in fields)
        for f in fields:
            resolver.check_type(f.type, pos)
            resolver.expr(f.init, frozenset(), frozenset(), pos)
        resolved = tuple(resolver.method(name, fnames, m) for m in methods)
        decls.append(A.ObjectDecl(name, tuple(fields), resolved))

    callee, method, args, pos = raw_main
    resolver.call(callee, method, len(args), pos)
    for a in args:
        resolver.expr(a, frozenset(), frozenset(), pos)
    return A.Program(tuple(decls), A.MainCall(callee, method, args))


# ----------------------------------
# Protocol binding
# ----------------------------------

def _formula(e: A.Expr, self_owner: Optional[str], pos=None) -> F.Formula:
    try:
        phi = ExprTranslator(self_owner).formula(e)
    except ParseError as exc:
        raise ParseError(str(exc), *(pos or (None, None))) from None
    if not F.is_modality_free(phi):
        raise ParseError("modalities are not allowed in protocol annotations", *(pos or (None, None)))
    return phi


def _bind_sequence(raw_items, ids, inside_repeat: bool) -> Tuple[S.GItem, ...]:
    items: List[S.GItem] = []
    for n, raw in enumerate(raw_items):
        kind, pos = raw[0], raw[-1]
        if items and isinstance(items[-1], (S.GEnd, S.GChoice)):
            raise ParseError("nothing may follow 'end' or a choice", *(pos or (None, None)))
        if kind == "call":
            _, caller, loc, callee, method, annot, _ = raw
            if caller == callee:
                raise ParseError("an object cannot call itself", *(pos or (None, None)))
            pre = _formula(annot["pre"], caller, pos) if "pre" in annot else F.TOP
            post = _formula(annot["post"], callee, pos) if "post" in annot else F.TOP
            items.append(S.GCall(caller, callee, method, pre, post, loc, next(ids)))
        elif kind == "read":
            _, obj, expr, _ = raw
            try:
                term = ExprTranslator(obj).term(expr)
            except ParseError:
                raise ParseError("a read expects a location", *(pos or (None, None))) from None
            items.append(S.GRead(obj, term))
        elif kind == "repeat":
            _, body, inv, _ = raw
            if not body:
                raise ParseError("repeat body is empty", *(pos or (None, None)))
            inner = _bind_sequence(body, ids, True)
            items.append(S.GRepeat(inner, _formula(inv, None, pos)))
        elif kind == "choice":
            if inside_repeat:
                raise ParseError("choices are not allowed inside repeat", *(pos or (None, None)))
            _, chooser, raw_branches, _ = raw
            branches = []
            for post, reactions, body, bpos in raw_branches:
                reacts = tuple(S.Reaction(obj, _formula(p, obj, bpos)) for obj, p in reactions)
                inner = _bind_sequence(body, ids, False)
                if not inner or not isinstance(inner[-1], (S.GEnd, S.GChoice)):
                    raise ParseError("branch body must end with 'end'", *(bpos or (None, None)))
                branches.append(S.Branch(_formula(post, chooser, bpos), reacts, inner))
            items.append(S.GChoice(chooser, tuple(branches)))
        else:
            if inside_repeat:
                raise ParseError("'end' is not allowed inside repeat", *(pos or (None, None)))
            items.append(S.GEnd())
    return tuple(items)


def parse_global_type(text: str) -> S.GlobalType:
    """
    Parse a protocol file.

    `self` in an annotation names the object the annotation is about: the
    caller for `pre`, the callee for `post`, the chooser or reactor in
    branches, the reader in reads. Invariants must name objects explicitly.
    """
    stripped = text.lstrip()
    if stripped and not stripped.startswith("main") and not stripped.startswith("//"):
        raise ParseError("protocol must start with a main call", 1, 1)
    _, callee, method, annot, body = _parse(text, "protocol")
    if "pre" in annot:
        raise ParseError("the main call takes no precondition")
    post = _formula(annot["post"], callee) if "post" in annot else F.TOP
    ids = count(1)
    items = _bind_sequence(body, ids, False)
    if not items or not isinstance(items[-1], (S.GEnd, S.GChoice)):
        raise ParseError("protocol must end with 'end'")
    return S.GlobalType(S.MainCallType(callee, method, post, 0), items)


def parse_formula(text: str, self_owner: Optional[str] = "self") -> F.Formula:
    """Parse a formula; modalities are allowed here."""
    return ExprTranslator(self_owner).formula(_parse(text, "formula"))


def parse_local_type(text: str) -> S.LocalType:
    return S.LocalType(_parse(text, "local_type"))
