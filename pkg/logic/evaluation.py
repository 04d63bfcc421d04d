"""
Evaluation of formulas in a concrete state.

A state is described by an EvalContext: the object heaps, the store of the
process the formula is evaluated for, the stores of other objects' active
processes (for `X.n` on locals), the value of `result`, and the finite
domains quantifiers range over. Runtime configurations build one through
their eval_context(frame) method.
"""

from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Tuple

from logic import formulas as F
from logic.values import UNIT, Future, ObjectRef, Value, sort_of, values_equal
from utils.errors import EvaluationError

PADDING_INTS = (-1, 0, 1)


@dataclass
class EvalContext:
    heaps: Mapping[str, Mapping[str, Value]] = field(default_factory=dict)
    store: Mapping[str, Value] = field(default_factory=dict)
    self_obj: Optional[str] = None
    result: Optional[Value] = None
    local_stores: Mapping[str, Mapping[str, Value]] = field(default_factory=dict)
    ints: Tuple[int, ...] = ()
    futures: Tuple[Future, ...] = ()
    lists: Tuple[tuple, ...] = ()

    def domain(self, sort: Optional[str]):
        ints = tuple(sorted(set(self.ints) | set(PADDING_INTS)))
        objects = tuple(ObjectRef(name) for name in self.heaps)
        lists = tuple(dict.fromkeys(((),) + tuple(self.lists)))
        by_sort = {
            "Int": ints,
            "Bool": (True, False),
            "Fut": tuple(self.futures),
            "Obj": objects,
            "List": lists,
            "Unit": (UNIT,),
        }
        if sort is None:
            return tuple(v for values in by_sort.values() for v in values)
        if sort not in by_sort:
            raise EvaluationError(f"unknown sort '{sort}'")
        return by_sort[sort]


class _HeapView:
    def __init__(self, base: Mapping[str, Mapping[str, Value]], updates=()):
        self.base = base
        self.updates = dict(updates)

    def get(self, owner: str, name: str):
        if (owner, name) in self.updates:
            return True, self.updates[(owner, name)]
        fields = self.base.get(owner)
        if fields is not None and name in fields:
            return True, fields[name]
        return False, None


class Evaluator:
    def __init__(self, ctx: EvalContext):
        self.ctx = ctx

    def _owner(self, owner: str) -> str:
        if owner == "self":
            if self.ctx.self_obj is None:
                raise EvaluationError("'self' used without an object frame")
            return self.ctx.self_obj
        return owner

    def heap(self, t: F.Term, env) -> _HeapView:
        if isinstance(t, F.Heap):
            return _HeapView(self.ctx.heaps)
        if isinstance(t, F.Store):
            inner = self.heap(t.heap, env)
            updates = dict(inner.updates)
            updates[(self._owner(t.owner), t.field)] = self.term(t.value, env)
            return _HeapView(inner.base, updates)
        raise EvaluationError(f"not a heap term: {t}")

    def term(self, t: F.Term, env: Dict[str, Value]) -> Value:
        if isinstance(t, F.Lit):
            return t.value
        if isinstance(t, F.Var):
            if t.logical:
                if t.name not in env:
                    raise EvaluationError(f"unbound logical variable '{t.name}'")
                return env[t.name]
            if t.name in self.ctx.store:
                return self.ctx.store[t.name]
            if t.name in self.ctx.heaps:
                return ObjectRef(t.name)
            raise EvaluationError(f"unresolvable variable '{t.name}'")
        if isinstance(t, F.Result):
            if self.ctx.result is None:
                raise EvaluationError("'result' has no value here")
            return self.ctx.result
        if isinstance(t, F.SelfRef):
            return ObjectRef(self._owner("self"))
        if isinstance(t, F.FieldSelect):
            owner = self._owner(t.owner)
            found, value = self.heap(t.heap, env).get(owner, t.field)
            if found:
                return value
            store = self.ctx.local_stores.get(owner, {})
            if t.field in store:
                return store[t.field]
            raise EvaluationError(f"unresolvable location '{owner}.{t.field}'")
        if isinstance(t, F.Fn):
            return self._apply(t.symbol, [self.term(a, env) for a in t.args])
        raise EvaluationError(f"cannot evaluate term {t}")

    def _apply(self, symbol: str, args):
        if symbol in F.ARITHMETIC:
            if any(sort_of(a) != "Int" for a in args):
                raise EvaluationError(f"'{symbol}' applied to non-integers")
            if symbol == "neg":
                return -args[0]
            a, b = args
            return a + b if symbol == "+" else a - b if symbol == "-" else a * b
        if symbol == "cons":
            if sort_of(args[1]) != "List":
                raise EvaluationError("cons expects a list")
            return (args[0],) + args[1]
        if symbol in ("head", "tail", "length"):
            lst = args[0]
            if sort_of(lst) != "List":
                raise EvaluationError(f"'{symbol}' expects a list")
            if symbol == "length":
                return len(lst)
            if not lst:
                raise EvaluationError(f"'{symbol}' of Nil")
            return lst[0] if symbol == "head" else lst[1:]
        raise EvaluationError(f"uninterpreted function '{symbol}'")

    def _ints(self, phi, env):
        left, right = self.term(phi.left, env), self.term(phi.right, env)
        if sort_of(left) != "Int" or sort_of(right) != "Int":
            raise EvaluationError("ordering on non-integers")
        return left, right

    def holds(self, phi: F.Formula, env: Dict[str, Value]) -> bool:
        if isinstance(phi, F.Top):
            return True
        if isinstance(phi, F.Not):
            return not self.holds(phi.body, env)
        if isinstance(phi, F.And):
            return self.holds(phi.left, env) and self.holds(phi.right, env)
        if isinstance(phi, F.Or):
            return self.holds(phi.left, env) or self.holds(phi.right, env)
        if isinstance(phi, F.Eq):
            return values_equal(self.term(phi.left, env), self.term(phi.right, env))
        if isinstance(phi, F.Geq):
            left, right = self._ints(phi, env)
            return left >= right
        if isinstance(phi, F.Gt):
            left, right = self._ints(phi, env)
            return left > right
        if isinstance(phi, F.Exists):
            for value in self.ctx.domain(phi.sort):
                try:
                    if self.holds(phi.body, {**env, phi.var: value}):
                        return True
                except EvaluationError:
                    # ill-sorted instance of an unsorted variable
                    if phi.sort is not None:
                        raise
            return False
        if isinstance(phi, F.Pred):
            raise EvaluationError(f"uninterpreted predicate '{phi.name}'")
        raise EvaluationError("modalities cannot be evaluated directly")


def eval_formula(phi: F.Formula, cfg, frame=None) -> bool:
    """
    Truth of phi in a configuration (or a bare EvalContext).

    Raises:
        EvaluationError: if a symbol cannot be resolved
    """
    ctx = cfg if isinstance(cfg, EvalContext) else cfg.eval_context(frame)
    return Evaluator(ctx).holds(phi, {})


def eval_term(t: F.Term, ctx: EvalContext, env: Optional[Dict[str, Value]] = None) -> Value:
    return Evaluator(ctx).term(t, env or {})
