"""
Weakest preconditions over loop-free statement sequences.

wp(history, post) is a modality-free formula whose validity guarantees that
post holds after running the history. Calls and gets havoc their targets;
a get additionally assumes what the possible resolvers promise about their
return value (the get-site facts in PostFacts).
"""

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Optional, Tuple

from logic import formulas as F
from syntax import program_ast as A
from syntax.expressions import ExprTranslator, is_boolean_expr
from utils.errors import UnsupportedStatement

_TYPE_SORTS = {"Int": "Int", "Bool": "Bool", "List": "List", "Fut": "Fut", "Unit": "Unit"}


@dataclass
class PostFacts:
    """
    Naming context and get-site facts for one method body.

    Attributes:
        obj: object the statements run on (owner of `this.f`)
        objects: object names usable as values
        sites: facts over `result` keyed by id() of the get statement
    """
    obj: str = "self"
    objects: FrozenSet[str] = frozenset()
    locals: FrozenSet[str] = frozenset()
    sites: Dict[int, F.Formula] = field(default_factory=dict)

    def translator(self) -> ExprTranslator:
        return ExprTranslator(self.obj, self.objects, self.locals)

    def facts(self, stmt: A.Get) -> F.Formula:
        return self.sites.get(id(stmt), F.TOP)

    def add(self, stmt: A.Get, phi: F.Formula) -> None:
        self.sites[id(stmt)] = phi


def forall(sort: Optional[str], var: str, body: F.Formula) -> F.Formula:
    return F.Not(F.Exists(sort, var, F.neg(body)))


def declared_sort(t: Optional[A.TypeRef]) -> Optional[str]:
    return _TYPE_SORTS.get(t.name) if t is not None else None


def _assign(loc: A.Location, value: F.Term, phi: F.Formula, ctx: PostFacts) -> F.Formula:
    if loc.is_field:
        owner = loc.owner or ctx.obj
        return F.simplify(F.substitute(phi, {F.HEAP: F.Store(F.HEAP, loc.name, owner, value)}))
    return F.substitute(phi, {F.Var(loc.name): value})


def _assign_expr(loc_or_result, expr: A.Expr, phi: F.Formula, ctx: PostFacts) -> F.Formula:
    tr = ctx.translator()

    def put(value: F.Term) -> F.Formula:
        if loc_or_result is None:
            return F.substitute(phi, {F.RESULT: value})
        return _assign(loc_or_result, value, phi, ctx)

    if is_boolean_expr(expr):
        guard = tr.formula(expr)
        return F.disj(
            F.conj(guard, put(F.TRUE_LIT)),
            F.conj(F.neg(guard), put(F.FALSE_LIT)),
        )
    return put(tr.term(expr))


def _havoc(loc: A.Location, sort: Optional[str], phi: F.Formula, ctx: PostFacts,
           assumption: F.Formula = F.TOP) -> F.Formula:
    taken = F.used_names(phi) | F.used_names(assumption) | {loc.name}
    name = F.fresh_name(f"{loc.name}0", taken)
    fresh = F.Var(name, True)
    body = _assign(loc, fresh, phi, ctx)
    facts = F.substitute(assumption, {F.RESULT: fresh})
    return forall(sort, name, F.implies(facts, body))


def wp_statement(s: A.Stmt, phi: F.Formula, ctx: PostFacts) -> F.Formula:
    if isinstance(s, A.Skip):
        return phi
    if isinstance(s, A.Assign):
        return _assign_expr(s.target, s.expr, phi, ctx)
    if isinstance(s, A.Call):
        if s.target is None:
            return phi
        return _havoc(s.target, "Fut", phi, ctx)
    if isinstance(s, A.Get):
        if s.target is None:
            return phi
        return _havoc(s.target, declared_sort(s.declared), phi, ctx, ctx.facts(s))
    if isinstance(s, A.Return):
        return _assign_expr(None, s.expr, phi, ctx)
    if isinstance(s, A.If):
        guard = ctx.translator().formula(s.guard)
        return F.conj(
            F.implies(guard, wp(s.then, phi, ctx)),
            F.implies(F.neg(guard), wp(s.orelse, phi, ctx)),
        )
    if isinstance(s, A.Assume):
        return F.implies(s.formula, phi)
    if isinstance(s, A.Havoc):
        return _havoc(s.target, None, phi, ctx)
    if isinstance(s, A.While):
        raise UnsupportedStatement("wp is undefined for loops")
    raise UnsupportedStatement(f"wp is undefined for {type(s).__name__}")


def wp(history, post: F.Formula, ctx: Optional[PostFacts] = None) -> F.Formula:
    """
    Weakest precondition of post over a statement or statement sequence.

    Raises:
        UnsupportedStatement: if the history contains a loop
    """
    ctx = ctx or PostFacts()
    stmts: Tuple[A.Stmt, ...] = history if isinstance(history, tuple) else (history,)
    phi = eliminate_modalities(post, ctx)
    for s in reversed(stmts):
        phi = wp_statement(s, phi, ctx)
    return F.simplify(phi)


def eliminate_modalities(phi: F.Formula, ctx: Optional[PostFacts] = None) -> F.Formula:
    ctx = ctx or PostFacts()
    if isinstance(phi, F.Modal):
        return wp(tuple(phi.stmts), phi.body, ctx)
    if isinstance(phi, F.Not):
        return F.Not(eliminate_modalities(phi.body, ctx))
    if isinstance(phi, (F.And, F.Or)):
        return type(phi)(eliminate_modalities(phi.left, ctx), eliminate_modalities(phi.right, ctx))
    if isinstance(phi, F.Exists):
        return F.Exists(phi.sort, phi.var, eliminate_modalities(phi.body, ctx))
    return phi
