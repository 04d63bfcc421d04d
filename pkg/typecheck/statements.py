"""
Statement rules: matching a method body against its method type.

Assignments and communication-free statements extend the history without
consuming a type item (T-Assign). Calls, gets and returns consume Send,
Read and Put items; their formulas are discharged as validity premises.
A while loop consumes a Repeat item, an if consumes a Select or Offer item
through a search over the partitions of the branches.
"""

from typing import Callable, Dict, Iterator, List, Optional, Set, Tuple

from logic import formulas as F
from logic.validity import NotValid, Unknown, Valid, check_validity
from logic.weakening import result_facts
from logic.wp import wp
from runtime.points_to import PointsTo
from syntax import program_ast as A
from syntax import session_types as S
from syntax.expressions import is_boolean_expr
from syntax.pretty import pretty, pretty_formula
from typecheck.context import CheckContext, PostDatabase, Resolver
from utils.errors import TypingError, UnsupportedStatement

NodeId = Tuple[str, int]
Edge = Tuple[NodeId, NodeId]

MAX_BRANCHES = 8

RULE_CALL = "T-Call"
RULE_CALL_2 = "T-Call-2"
RULE_GET = "T-Get"
RULE_RETURN = "T-Return"
RULE_WHILE = "T-While"
RULE_SELECT = "T-Select"
RULE_OFFER = "T-Offer"
RULE_SHAPE = "method type shape"


def partitions(n: int) -> Iterator[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
    """Ordered splits of range(n) into two non-empty sides."""
    for mask in range(1, (1 << n) - 1):
        left = tuple(i for i in range(n) if mask >> i & 1)
        right = tuple(i for i in range(n) if not mask >> i & 1)
        yield left, right


def _describe(item) -> str:
    return pretty(item) if item is not None else "the end of the method"


def _show(indices) -> str:
    return "{" + ",".join(str(i + 1) for i in indices) + "}"


class StatementChecker:
    """
    Checks the bodies of one object.

    Args:
        program: the whole program (callee signatures)
        decl: the object being checked
        points: points-to result of the program
        posts: post(X.m, phi) facts of the protocol
        terms: Put nodes of every method in the causality graph
    """

    def __init__(
        self,
        program: A.Program,
        decl: A.ObjectDecl,
        points: PointsTo,
        posts: PostDatabase,
        terms: Dict[Resolver, Set[NodeId]],
        validity: Callable = check_validity,
    ):
        self.program = program
        self.decl = decl
        self.points = points
        self.posts = posts
        self.terms = terms
        self.validity = validity
        self.edges: Set[Edge] = set()
        self.reads: Dict[NodeId, Set[Resolver]] = {}
        self.warnings: List[str] = []

    # ----------------------------------
    # Premises
    # ----------------------------------

    def _where(self, ctx: CheckContext, s: Optional[A.Stmt] = None) -> str:
        pos = getattr(s, "pos", None)
        return f"{ctx.where}:{pos[0]}" if pos else ctx.where

    def premise(self, ctx: CheckContext, rule: str, goal: F.Formula,
                s: Optional[A.Stmt] = None, extra: Tuple[A.Stmt, ...] = ()) -> None:
        """Phi => [history; extra] goal, or TypingError."""
        try:
            claim = F.implies(ctx.phi, wp(ctx.history + tuple(extra), goal, ctx.facts))
        except UnsupportedStatement as exc:
            raise TypingError(rule, str(exc), self._where(ctx, s)) from None
        verdict = self.validity(claim)
        if isinstance(verdict, Valid):
            return
        raise TypingError(
            rule,
            f"cannot establish {pretty_formula(goal)}",
            self._where(ctx, s),
            formula=pretty_formula(claim),
            counterexample=verdict.counterexample if isinstance(verdict, NotValid) else None,
            unknown=isinstance(verdict, Unknown),
        )

    def _refuted(self, ctx: CheckContext, guard: F.Formula) -> bool:
        try:
            claim = F.implies(ctx.phi, wp(ctx.history, F.neg(guard), ctx.facts))
        except UnsupportedStatement:
            return False
        return isinstance(self.validity(claim), Valid)

    # ----------------------------------
    # Walk
    # ----------------------------------

    @staticmethod
    def _unwrap(items: Tuple[S.LItem, ...]) -> Tuple[S.LItem, ...]:
        # T-Select-Single and T-Offer-Single
        while items:
            head = items[0]
            if isinstance(head, S.Select) and len(head.branches) == 1:
                items = tuple(head.branches[0]) + items[1:]
            elif isinstance(head, S.Offer) and len(head.branches) == 1:
                items = tuple(head.branches[0].body) + items[1:]
            else:
                break
        return items

    def check(self, ctx: CheckContext, stmts: Tuple[A.Stmt, ...], items: Tuple[S.LItem, ...]) -> None:
        """
        Check stmts against the method type suffix items.

        Raises:
            TypingError: on the first failed premise or shape mismatch
        """
        items = S.normalize(tuple(items))
        while True:
            items = tuple(i for i in self._unwrap(items) if not isinstance(i, S.LEnd))
            head = items[0] if items else None
            if not stmts:
                if head is not None:
                    rule = RULE_RETURN if isinstance(head, S.Put) else RULE_SHAPE
                    raise TypingError(rule, f"no statement implements {_describe(head)}", ctx.where)
                return
            s, stmts = stmts[0], stmts[1:]
            if isinstance(s, (A.Assign, A.Skip)):
                ctx = ctx.extend(s)
            elif isinstance(s, A.Call):
                self._call(ctx, s, head)
                ctx, items = ctx.extend(s), items[1:]
            elif isinstance(s, A.Get):
                self._get(ctx, s, head)
                ctx, items = ctx.after_get(s), items[1:]
            elif isinstance(s, A.Return):
                self._return(ctx, s, head)
                ctx, items = ctx.extend(s), items[1:]
            elif isinstance(s, A.If):
                self._if(ctx, s, stmts, items)
                return
            elif isinstance(s, A.While):
                if isinstance(head, S.LRepeat):
                    ctx = self._while(ctx, s, head)
                    items = items[1:]
                elif not A.is_communication(s):
                    guard = ctx.facts.translator().formula(s.guard)
                    havoc = tuple(A.Havoc(loc) for loc in A.written_locations(s.body))
                    ctx = ctx.extend(*havoc).assume(F.neg(guard))
                else:
                    raise TypingError(
                        RULE_WHILE, f"loop where the type expects {_describe(head)}", self._where(ctx, s)
                    )
            else:
                raise TypingError(RULE_SHAPE, f"unsupported statement {type(s).__name__}", self._where(ctx, s))

    # ----------------------------------
    # Communication
    # ----------------------------------

    def _call_goal(self, ctx: CheckContext, s: A.Call, send: S.Send) -> F.Formula:
        tr = ctx.facts.translator()
        callee = self.program.object(send.callee)
        decl = callee.method(send.method) if callee is not None else None
        goal = send.pre
        if decl is not None:
            pairs = list(zip(decl.param_names, s.args))
            goal = F.substitute(goal, {F.Var(p): tr.term(a) for p, a in pairs if not is_boolean_expr(a)})
            for param, arg in pairs:
                if is_boolean_expr(arg):
                    value = tr.formula(arg)
                    goal = F.disj(
                        F.conj(value, F.substitute(goal, {F.Var(param): F.TRUE_LIT})),
                        F.conj(F.neg(value), F.substitute(goal, {F.Var(param): F.FALSE_LIT})),
                    )
        # caller locations written X.y name the caller's locals
        fields = set(self.decl.field_names)
        local = {F.field(ctx.obj, n): F.Var(n) for n in ctx.facts.locals if n not in fields}
        return F.substitute(goal, local) if local else goal

    def _call(self, ctx: CheckContext, s: A.Call, head) -> None:
        rule = RULE_CALL if s.target is not None else RULE_CALL_2
        if not isinstance(head, S.Send):
            raise TypingError(rule, f"call {s.callee}!{s.method} where the type expects {_describe(head)}",
                              self._where(ctx, s))
        if s.method != head.method or s.callee != head.callee:
            if s.callee in self.program.object_names or s.method != head.method:
                raise TypingError(
                    rule, f"call {s.callee}!{s.method} where the type expects {_describe(head)}",
                    self._where(ctx, s),
                )
            self.warnings.append(f"{self._where(ctx, s)}: callee '{s.callee}' assumed to be {head.callee}")
        if head.loc is not None and (s.target is None or s.target.name != head.loc):
            raise TypingError(rule, f"the future of {s.callee}!{s.method} must be stored in {head.loc}",
                              self._where(ctx, s))
        self.premise(ctx, rule, self._call_goal(ctx, s, head), s, extra=(s,))

    def _get(self, ctx: CheckContext, s: A.Get, head) -> None:
        if not isinstance(head, S.LRead):
            raise TypingError(RULE_GET, f"get where the type expects {_describe(head)}", self._where(ctx, s))
        expr = ctx.facts.translator().term(s.future)
        if F.simplify_term(expr) != F.simplify_term(head.expr):
            raise TypingError(
                RULE_GET, f"reads {pretty(expr)} where the type expects {_describe(head)}", self._where(ctx, s)
            )
        resolvers = self.points.at(s)
        ctx.facts.add(s, self.posts.facts(resolvers))
        node = head.origin
        self.reads.setdefault(node, set()).update(resolvers)
        for resolver in resolvers:
            for put in self.terms.get(resolver, ()):
                self.edges.add((put, node))
        if not resolvers:
            self.warnings.append(f"{self._where(ctx, s)}: no method can resolve {pretty(expr)}")

    def _return(self, ctx: CheckContext, s: A.Return, head) -> None:
        if not isinstance(head, S.Put):
            raise TypingError(RULE_RETURN, f"return where the type expects {_describe(head)}", self._where(ctx, s))
        self.premise(ctx, RULE_RETURN, head.post, s, extra=(s,))

    # ----------------------------------
    # Control flow
    # ----------------------------------

    def _while(self, ctx: CheckContext, s: A.While, rep: S.LRepeat) -> CheckContext:
        guard = ctx.facts.translator().formula(s.guard)
        inv = rep.invariant
        self.premise(ctx, RULE_WHILE, inv, s)
        inside = ctx.reset(F.conj(inv, guard))
        self.check(inside, s.body, rep.body)
        self.premise(inside, RULE_WHILE, inv, s, extra=tuple(s.body))
        return ctx.reset(F.conj(inv, F.neg(guard)))

    def _attempt(self, run) -> None:
        """Run a partition attempt; undo recorded edges if it fails."""
        edges, reads, warnings = set(self.edges), {k: set(v) for k, v in self.reads.items()}, list(self.warnings)
        try:
            run()
        except TypingError:
            self.edges, self.reads, self.warnings = edges, reads, warnings
            raise

    def _if(self, ctx: CheckContext, s: A.If, rest, items) -> None:
        head = items[0] if items else None
        guard = ctx.facts.translator().formula(s.guard)
        if isinstance(head, S.Select):
            return self._select(ctx, s, guard, rest, head, items[1:])
        if isinstance(head, S.Offer):
            return self._offer(ctx, s, guard, rest, head, items[1:])
        if not A.is_communication(s):
            return self.check(ctx.extend(s), rest, items)
        for body, g in ((s.then, guard), (s.orelse, F.neg(guard))):
            if self._refuted(ctx, g):
                continue
            self.check(ctx.assume(g), tuple(body) + tuple(rest), items)

    def _search(self, rule: str, ctx: CheckContext, s: A.If, n: int, attempt) -> None:
        if n > MAX_BRANCHES:
            raise TypingError(rule, f"more than {MAX_BRANCHES} branches", self._where(ctx, s))
        reasons: List[TypingError] = []
        for left, right in partitions(n):
            try:
                self._attempt(lambda: attempt(left, right))
                return
            except TypingError as exc:
                reasons.append(exc)
        detail = "; ".join(f"{_show(left)}|{_show(right)}: {exc}" for (left, right), exc in zip(partitions(n), reasons))
        raise TypingError(
            rule,
            "no partition of the branches fits" + (f" ({detail})" if detail else ""),
            self._where(ctx, s),
            unknown=any(exc.unknown for exc in reasons),
            reasons=tuple(reasons),
        )

    def _select(self, ctx, s: A.If, guard, rest, sel: S.Select, after) -> None:
        def side(indices):
            if len(indices) == 1:
                return tuple(sel.branches[indices[0]])
            return (S.Select(tuple(sel.branches[i] for i in indices), sel.origin),)

        def attempt(left, right):
            self.check(ctx.assume(guard), tuple(s.then) + tuple(rest), side(left) + tuple(after))
            self.check(ctx.assume(F.neg(guard)), tuple(s.orelse) + tuple(rest), side(right) + tuple(after))

        self._search(RULE_SELECT, ctx, s, len(sel.branches), attempt)

    def _offer(self, ctx, s: A.If, guard, rest, off: S.Offer, after) -> None:
        if ctx.last_get is None:
            raise TypingError(RULE_OFFER, f"no get of {off.source[0]}.{off.source[1]} precedes the if",
                              self._where(ctx, s))
        loc = ctx.last_get
        value = F.field(loc.owner or ctx.obj, loc.name) if loc.is_field else F.Var(loc.name)
        facts = [F.substitute(result_facts(b.guard), {F.RESULT: value}) for b in off.branches]

        def side(indices):
            if len(indices) == 1:
                return tuple(off.branches[indices[0]].body)
            return (S.Offer(off.source, tuple(off.branches[i] for i in indices), off.origin),)

        def attempt(left, right):
            for i in left:
                self.premise(ctx, RULE_OFFER, F.implies(facts[i], guard), s)
            for i in right:
                self.premise(ctx, RULE_OFFER, F.implies(facts[i], F.neg(guard)), s)
            then_ctx = ctx.assume(guard).assume(F.disj(*(facts[i] for i in left)))
            else_ctx = ctx.assume(F.neg(guard)).assume(F.disj(*(facts[i] for i in right)))
            self.check(then_ctx, tuple(s.then) + tuple(rest), side(left) + tuple(after))
            self.check(else_ctx, tuple(s.orelse) + tuple(rest), side(right) + tuple(after))

        self._search(RULE_OFFER, ctx, s, len(off.branches), attempt)

