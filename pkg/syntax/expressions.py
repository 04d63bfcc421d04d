"""
Translation of surface expressions into logic terms and formulas.

Programs and formulas share one expression grammar. Whether `f(x)` is a
predicate or a function, or whether a bare boolean variable is an atom,
depends on the position it is translated in.
"""

from typing import FrozenSet, Optional

from logic import formulas as F
from logic.values import ObjectRef
from syntax import program_ast as A
from utils.errors import ParseError

COMPARISONS = ("==", "!=", ">=", ">", "<=", "<")


def is_boolean_expr(e: A.Expr) -> bool:
    if isinstance(e, A.BoolLit) or isinstance(e, A.TopLit):
        return True
    if isinstance(e, A.BinOp):
        return e.op in ("&&", "||") or e.op in COMPARISONS
    if isinstance(e, A.UnOp):
        return e.op == "!"
    return isinstance(e, (A.Quant, A.ModalExpr))


class ExprTranslator:
    """
    Translates expressions in a fixed naming context.

    Args:
        self_owner: object `self.f` (and `this.f`) refers to; None forbids `self`
        objects: object names that evaluate to references when not shadowed
        locals_: names that stay program variables even if they clash with objects
    """

    def __init__(
        self,
        self_owner: Optional[str] = "self",
        objects: FrozenSet[str] = frozenset(),
        locals_: FrozenSet[str] = frozenset(),
    ):
        self.self_owner = self_owner
        self.objects = objects
        self.locals = locals_

    def _owner(self) -> str:
        if self.self_owner is None:
            raise ParseError("'self' has no meaning here")
        return self.self_owner

    # ----------------------------------
    # Terms
    # ----------------------------------

    def term(self, e: A.Expr, bound: FrozenSet[str] = frozenset()) -> F.Term:
        if isinstance(e, A.IntLit):
            return F.int_lit(e.value)
        if isinstance(e, A.BoolLit):
            return F.TRUE_LIT if e.value else F.FALSE_LIT
        if isinstance(e, A.NilLit):
            return F.NIL_LIT
        if isinstance(e, A.UnitLit):
            return F.UNIT_LIT
        if isinstance(e, A.VarRef):
            if e.name in bound:
                return F.Var(e.name, True)
            if e.name in self.objects and e.name not in self.locals:
                return F.Lit(ObjectRef(e.name), "Obj")
            return F.Var(e.name)
        if isinstance(e, A.FieldRef):
            return F.field(self._owner(), e.name)
        if isinstance(e, A.QualifiedRef):
            owner = self._owner() if e.owner == "self" else e.owner
            return F.field(owner, e.name)
        if isinstance(e, A.ResultRef):
            return F.RESULT
        if isinstance(e, A.SelfLit):
            owner = self._owner()
            return F.SELF if owner == "self" else F.Lit(ObjectRef(owner), "Obj")
        if isinstance(e, A.BinOp) and e.op in ("+", "-", "*"):
            return F.Fn(e.op, (self.term(e.left, bound), self.term(e.right, bound)))
        if isinstance(e, A.UnOp) and e.op == "-":
            inner = self.term(e.operand, bound)
            if isinstance(inner, F.Lit) and inner.sort == "Int":
                return F.int_lit(-inner.value)
            return F.Fn("neg", (inner,))
        if isinstance(e, A.Apply):
            return F.Fn(e.fn, tuple(self.term(a, bound) for a in e.args))
        raise ParseError(f"boolean expression used where a value is expected: {type(e).__name__}")

    # ----------------------------------
    # Formulas
    # ----------------------------------

    def formula(self, e: A.Expr, bound: FrozenSet[str] = frozenset()) -> F.Formula:
        if isinstance(e, A.TopLit):
            return F.TOP
        if isinstance(e, A.BoolLit):
            return F.TOP if e.value else F.BOTTOM
        if isinstance(e, A.BinOp):
            if e.op == "&&":
                return F.And(self.formula(e.left, bound), self.formula(e.right, bound))
            if e.op == "||":
                return F.Or(self.formula(e.left, bound), self.formula(e.right, bound))
            if e.op in COMPARISONS:
                left, right = self.term(e.left, bound), self.term(e.right, bound)
                if e.op == "==":
                    return F.Eq(left, right)
                if e.op == "!=":
                    return F.Not(F.Eq(left, right))
                if e.op == ">=":
                    return F.Geq(left, right)
                if e.op == ">":
                    return F.Gt(left, right)
                if e.op == "<=":
                    return F.Geq(right, left)
                return F.Gt(right, left)
        if isinstance(e, A.UnOp) and e.op == "!":
            return F.Not(self.formula(e.operand, bound))
        if isinstance(e, A.Quant):
            return F.Exists(e.sort, e.var, self.formula(e.body, bound | {e.var}))
        if isinstance(e, A.ModalExpr):
            return F.Modal(e.stmts, self.formula(e.body, bound))
        if isinstance(e, A.Apply):
            return F.Pred(e.fn, tuple(self.term(a, bound) for a in e.args))
        # a bare boolean-valued term
        return F.Eq(self.term(e, bound), F.TRUE_LIT)


def program_term(e: A.Expr, obj: str, objects: FrozenSet[str] = frozenset(),
                 locals_: FrozenSet[str] = frozenset()) -> F.Term:
    """Term of a program expression evaluated inside object `obj`."""
    return ExprTranslator(obj, objects, locals_).term(e)


def program_formula(e: A.Expr, obj: str, objects: FrozenSet[str] = frozenset(),
                    locals_: FrozenSet[str] = frozenset()) -> F.Formula:
    return ExprTranslator(obj, objects, locals_).formula(e)
