"""
Checking contexts and the postcondition database.

A CheckContext is the left-hand side of a statement judgment: the formula
Phi and the loop-free history checked so far. Every validity premise has
the shape Phi => [history; s] phi and is discharged through wp.
"""

from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

from logic import formulas as F
from logic.weakening import result_facts
from logic.wp import PostFacts
from syntax import program_ast as A
from syntax import session_types as S

Resolver = Tuple[str, str]


class PostDatabase:
    """
    post(X.m, phi) facts of a protocol: for each method, what every future
    it resolves promises about the value.
    """

    def __init__(self):
        self.posts: Dict[Resolver, List[F.Formula]] = {}

    @classmethod
    def from_global(cls, g: S.GlobalType) -> "PostDatabase":
        db = cls()
        for call in S.calls_of(g):
            db.posts.setdefault((call.callee, call.method), []).append(call.post)
        return db

    def fact(self, resolver: Resolver) -> F.Formula:
        """Disjunction of the result facts of every call of the method."""
        posts = self.posts.get(resolver)
        if not posts:
            return F.TOP
        return F.disj(*(result_facts(p) for p in posts))

    def facts(self, resolvers: Iterable[Resolver]) -> F.Formula:
        resolvers = sorted(resolvers)
        if not resolvers:
            return F.TOP
        return F.disj(*(self.fact(r) for r in resolvers))

    def conjunction(self) -> F.Formula:
        """Post(G): the conjunction of every postcondition of the protocol."""
        return F.conj(*(p for posts in self.posts.values() for p in posts))


@dataclass(frozen=True)
class CheckContext:
    obj: str
    method: str
    phi: F.Formula
    history: Tuple[A.Stmt, ...] = ()
    facts: PostFacts = field(default_factory=PostFacts, compare=False)
    # target of the latest get, whose value a following choice is about
    last_get: Optional[A.Location] = None

    @property
    def where(self) -> str:
        return f"{self.obj}.{self.method}"

    def extend(self, *stmts: A.Stmt) -> "CheckContext":
        return replace(self, history=self.history + tuple(stmts))

    def assume(self, phi: F.Formula) -> "CheckContext":
        return self.extend(A.Assume(phi))

    def reset(self, phi: F.Formula) -> "CheckContext":
        """Fresh history under a new Phi, as at loop entry and exit."""
        return replace(self, phi=phi, history=(), last_get=None)

    def after_get(self, s: A.Get) -> "CheckContext":
        return replace(self, history=self.history + (s,), last_get=s.target)


def method_locals(m: A.MethodDecl) -> FrozenSet[str]:
    names = set(m.param_names)
    for s in A.walk_statements(m.body):
        target = getattr(s, "target", None)
        if isinstance(target, A.Location) and not target.is_field:
            names.add(target.name)
    return frozenset(names)


def method_facts(program: A.Program, obj: str, m: A.MethodDecl) -> PostFacts:
    return PostFacts(obj=obj, objects=frozenset(program.object_names), locals=method_locals(m))
