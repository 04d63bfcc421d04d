"""
Pretty printer for programs, protocols, local types and formulas.

Output is valid input for the parsers and reparses to an equal AST. Terms
over an updated heap (store chains) only occur inside the checker and are
printed in a readable but non-parseable select/store form.
"""

from functools import singledispatch
from typing import List

from logic import formulas as F
from logic.values import ObjectRef, show_value
from syntax import program_ast as A
from syntax import session_types as S

INDENT = "    "

# precedence levels shared by formulas and expressions
P_QUANT, P_OR, P_AND, P_NOT, P_CMP, P_SUM, P_MUL, P_UNARY, P_ATOM = range(9)


def _wrap(text: str, own: int, ctx: int) -> str:
    return f"({text})" if own < ctx else text


# ----------------------------------
# Terms and formulas
# ----------------------------------

def pretty_term(t: F.Term, ctx: int = P_QUANT) -> str:
    if isinstance(t, F.Var):
        return t.name
    if isinstance(t, F.Lit):
        if isinstance(t.value, ObjectRef):
            return t.value.name
        text = show_value(t.value)
        return _wrap(text, P_UNARY, ctx) if t.sort == "Int" and t.value < 0 else text
    if isinstance(t, F.Fn):
        if t.symbol in ("+", "-"):
            text = f"{pretty_term(t.args[0], P_SUM)} {t.symbol} {pretty_term(t.args[1], P_MUL)}"
            return _wrap(text, P_SUM, ctx)
        if t.symbol == "*":
            text = f"{pretty_term(t.args[0], P_MUL)} * {pretty_term(t.args[1], P_UNARY)}"
            return _wrap(text, P_MUL, ctx)
        if t.symbol == "neg":
            return _wrap(f"-{pretty_term(t.args[0], P_UNARY)}", P_UNARY, ctx)
        return f"{t.symbol}({', '.join(pretty_term(a) for a in t.args)})"
    if isinstance(t, F.FieldSelect):
        if t.heap == F.HEAP:
            return f"{t.owner}.{t.field}"
        return f"select({pretty_term(t.heap)}, {t.owner}.{t.field})"
    if isinstance(t, F.Store):
        return f"store({pretty_term(t.heap)}, {t.owner}.{t.field}, {pretty_term(t.value)})"
    if isinstance(t, F.Heap):
        return "heap"
    if isinstance(t, F.Result):
        return "result"
    if isinstance(t, F.SelfRef):
        return "self"
    return str(t)


def pretty_formula(phi: F.Formula, ctx: int = P_QUANT) -> str:
    if isinstance(phi, F.Top):
        return "top"
    if isinstance(phi, F.Not):
        if isinstance(phi.body, F.Eq):
            body = phi.body
            text = f"{pretty_term(body.left, P_SUM)} != {pretty_term(body.right, P_SUM)}"
            return _wrap(text, P_CMP, ctx)
        return _wrap(f"!{pretty_formula(phi.body, P_NOT)}", P_NOT, ctx)
    if isinstance(phi, F.Or):
        text = f"{pretty_formula(phi.left, P_AND)} || {pretty_formula(phi.right, P_OR)}"
        return _wrap(text, P_OR, ctx)
    if isinstance(phi, F.And):
        text = f"{pretty_formula(phi.left, P_NOT)} && {pretty_formula(phi.right, P_AND)}"
        return _wrap(text, P_AND, ctx)
    if isinstance(phi, (F.Eq, F.Geq, F.Gt)):
        op = {F.Eq: "==", F.Geq: ">=", F.Gt: ">"}[type(phi)]
        text = f"{pretty_term(phi.left, P_SUM)} {op} {pretty_term(phi.right, P_SUM)}"
        return _wrap(text, P_CMP, ctx)
    if isinstance(phi, F.Pred):
        return f"{phi.name}({', '.join(pretty_term(a) for a in phi.args)})"
    if isinstance(phi, F.Exists):
        sort = f"{phi.sort} " if phi.sort else ""
        return _wrap(f"exists {sort}{phi.var}. {pretty_formula(phi.body)}", P_QUANT, ctx)
    if isinstance(phi, F.Modal):
        stmts = " ".join(line.strip() for s in phi.stmts for line in _stmt_lines(s, 0))
        return _wrap(f"[{stmts}] {pretty_formula(phi.body, P_NOT)}", P_NOT, ctx)
    return str(phi)


# ----------------------------------
# Program expressions and statements
# ----------------------------------

_BIN_PREC = {
    "||": P_OR, "&&": P_AND,
    "==": P_CMP, "!=": P_CMP, ">=": P_CMP, ">": P_CMP, "<=": P_CMP, "<": P_CMP,
    "+": P_SUM, "-": P_SUM, "*": P_MUL,
}


def pretty_expr(e: A.Expr, ctx: int = P_QUANT) -> str:
    if isinstance(e, A.IntLit):
        return _wrap(str(e.value), P_UNARY, ctx) if e.value < 0 else str(e.value)
    if isinstance(e, A.BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, A.NilLit):
        return "Nil"
    if isinstance(e, A.UnitLit):
        return "unit"
    if isinstance(e, A.TopLit):
        return "top"
    if isinstance(e, A.ResultRef):
        return "result"
    if isinstance(e, A.SelfLit):
        return "self"
    if isinstance(e, A.VarRef):
        return e.name
    if isinstance(e, A.FieldRef):
        return f"this.{e.name}"
    if isinstance(e, A.QualifiedRef):
        return f"{e.owner}.{e.name}"
    if isinstance(e, A.Apply):
        return f"{e.fn}({', '.join(pretty_expr(a) for a in e.args)})"
    if isinstance(e, A.UnOp):
        if e.op == "!":
            return _wrap(f"!{pretty_expr(e.operand, P_NOT)}", P_NOT, ctx)
        return _wrap(f"-{pretty_expr(e.operand, P_UNARY)}", P_UNARY, ctx)
    if isinstance(e, A.BinOp):
        prec = _BIN_PREC[e.op]
        if e.op in ("||", "&&"):
            left_ctx, right_ctx = prec + 1, prec
        elif prec == P_CMP:
            left_ctx = right_ctx = P_SUM
        else:
            left_ctx, right_ctx = prec, prec + 1
        text = f"{pretty_expr(e.left, left_ctx)} {e.op} {pretty_expr(e.right, right_ctx)}"
        return _wrap(text, prec, ctx)
    if isinstance(e, A.Quant):
        sort = f"{e.sort} " if e.sort else ""
        return _wrap(f"exists {sort}{e.var}. {pretty_expr(e.body)}", P_QUANT, ctx)
    if isinstance(e, A.ModalExpr):
        stmts = " ".join(line.strip() for s in e.stmts for line in _stmt_lines(s, 0))
        return _wrap(f"[{stmts}] {pretty_expr(e.body, P_NOT)}", P_NOT, ctx)
    return str(e)


def _location(loc: A.Location) -> str:
    return f"this.{loc.name}" if loc.is_field else loc.name


def _lhs(s) -> str:
    if s.target is None:
        return ""
    if s.declared is not None:
        return f"{s.declared} {s.target.name} = "
    return f"{_location(s.target)} = "


def _block_lines(stmts, depth: int) -> List[str]:
    lines: List[str] = []
    for s in stmts:
        lines.extend(_stmt_lines(s, depth))
    return lines


def _stmt_lines(s: A.Stmt, depth: int) -> List[str]:
    pad = INDENT * depth
    if isinstance(s, A.Assign):
        return [f"{pad}{_lhs(s)}{pretty_expr(s.expr)};"]
    if isinstance(s, A.Call):
        args = ", ".join(pretty_expr(a) for a in s.args)
        return [f"{pad}{_lhs(s)}{s.callee}!{s.method}({args});"]
    if isinstance(s, A.Get):
        return [f"{pad}{_lhs(s)}{pretty_expr(s.future, P_UNARY)}.get;"]
    if isinstance(s, A.Skip):
        return [f"{pad}skip;"]
    if isinstance(s, A.Return):
        return [f"{pad}return {pretty_expr(s.expr)};"]
    if isinstance(s, A.If):
        lines = [f"{pad}if ({pretty_expr(s.guard)}) {{"]
        lines += _block_lines(s.then, depth + 1)
        if s.orelse:
            lines.append(f"{pad}}} else {{")
            lines += _block_lines(s.orelse, depth + 1)
        lines.append(f"{pad}}}")
        return lines
    if isinstance(s, A.While):
        lines = [f"{pad}while ({pretty_expr(s.guard)}) {{"]
        lines += _block_lines(s.body, depth + 1)
        lines.append(f"{pad}}}")
        return lines
    if isinstance(s, A.Assume):
        return [f"{pad}assume({pretty_formula(s.formula)});"]
    if isinstance(s, A.Havoc):
        return [f"{pad}havoc {_location(s.target)};"]
    return [f"{pad}{s};"]


def pretty_program(p: A.Program) -> str:
    lines: List[str] = []
    for obj in p.objects:
        lines.append(f"object {obj.name} {{")
        for fd in obj.fields:
            lines.append(f"{INDENT}{fd.type} {fd.name} = {pretty_expr(fd.init)};")
        for m in obj.methods:
            params = ", ".join(f"{prm.type} {prm.name}" for prm in m.params)
            lines.append(f"{INDENT}{m.return_type} {m.name}({params}) {{")
            lines += _block_lines(m.body, 2)
            lines.append(f"{INDENT}}}")
        lines.append("}")
        lines.append("")
    args = ", ".join(pretty_expr(a) for a in p.main.args)
    lines.append(f"main {{ {p.main.callee}!{p.main.method}({args}); }}")
    return "\n".join(lines) + "\n"


# ----------------------------------
# Protocols and local types
# ----------------------------------

def _annot(pre: F.Formula, post: F.Formula) -> str:
    return f"{{ pre: {pretty_formula(pre)}, post: {pretty_formula(post)} }}"


def _global_lines(items, depth: int) -> List[str]:
    pad = INDENT * depth
    lines: List[str] = []
    for item in items:
        if isinstance(item, S.GCall):
            arrow = f"-[{item.loc}]->" if item.loc else "->"
            lines.append(f"{pad}{item.caller} {arrow} {item.callee}.{item.method} {_annot(item.pre, item.post)}")
        elif isinstance(item, S.GRead):
            lines.append(f"{pad}{item.obj} reads {pretty_term(item.expr)}")
        elif isinstance(item, S.GRepeat):
            lines.append(f"{pad}repeat {{")
            lines += _global_lines(item.body, depth + 1)
            lines.append(f"{pad}}} invariant {pretty_formula(item.invariant)}")
        elif isinstance(item, S.GChoice):
            lines.append(f"{pad}choice {item.chooser} {{")
            for b in item.branches:
                head = f"post: {pretty_formula(b.post)}"
                if b.reactions:
                    reacts = ", ".join(f"{r.obj} {{ post: {pretty_formula(r.post)} }}" for r in b.reactions)
                    head += f", reacts: [{reacts}]"
                lines.append(f"{pad}{INDENT}branch {{ {head} }} => {{")
                lines += _global_lines(b.body, depth + 2)
                lines.append(f"{pad}{INDENT}}}")
            lines.append(f"{pad}}}")
        elif isinstance(item, S.GEnd):
            lines.append(f"{pad}end")
    return lines


def pretty_global(g: S.GlobalType) -> str:
    head = f"main -> {g.main.callee}.{g.main.method} {{ post: {pretty_formula(g.main.post)} }}"
    return "\n".join([head] + _global_lines(g.body, 0)) + "\n"


def pretty_items(items) -> str:
    return ". ".join(_local_item(i) for i in items)


def _local_item(item: S.LItem) -> str:
    if isinstance(item, S.Receive):
        return f"{item.method}?<{pretty_formula(item.pre)}>"
    if isinstance(item, S.Send):
        loc = f"[{item.loc}]" if item.loc else ""
        return f"{item.callee}!{item.method}{loc}<{pretty_formula(item.pre)}>"
    if isinstance(item, S.Put):
        return f"Put<{pretty_formula(item.post)}>"
    if isinstance(item, S.LRead):
        return f"Read<{pretty_term(item.expr)}>"
    if isinstance(item, S.LSkip):
        return "skip"
    if isinstance(item, S.LRepeat):
        return f"({pretty_items(item.body)})*<{pretty_formula(item.invariant)}>"
    if isinstance(item, S.Select):
        return "+{" + " | ".join(pretty_items(b) for b in item.branches) + "}"
    if isinstance(item, S.Offer):
        obj, method = item.source
        branches = " | ".join(f"<{pretty_formula(b.guard)}> {pretty_items(b.body)}" for b in item.branches)
        return f"&{obj}.{method}{{{branches}}}"
    if isinstance(item, S.LEnd):
        return "end"
    return str(item)


# ----------------------------------
# Entry point
# ----------------------------------

@singledispatch
def pretty(x) -> str:
    if isinstance(x, tuple) and all(isinstance(i, tuple(S.LItem.__args__)) for i in x):
        return pretty_items(x)
    if isinstance(x, tuple(F.Formula.__args__)):
        return pretty_formula(x)
    if isinstance(x, tuple(F.Term.__args__)):
        return pretty_term(x)
    if isinstance(x, tuple(A.Stmt.__args__)):
        return "\n".join(_stmt_lines(x, 0)).rstrip(";")
    if isinstance(x, tuple(S.LItem.__args__)):
        return _local_item(x)
    return pretty_expr(x)


@pretty.register
def _(x: A.Program) -> str:
    return pretty_program(x)


@pretty.register
def _(x: S.GlobalType) -> str:
    return pretty_global(x)


@pretty.register
def _(x: S.LocalType) -> str:
    return pretty_items(x.items)
