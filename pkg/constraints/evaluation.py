"""
Evaluation of trace constraints on a finite trace.

Positions are 0..n-1 (one per trace pair); cut variables may also take the
point just past the last position of their window, n for the whole trace.
Relativization is handled with bitmasks over 0..n: a `Restricted` node
narrows the mask its body is evaluated under, and every quantifier only
ranges over positions whose bit is set and whose own guards hold. Results
of quantifier nodes are memoized on the node, the mask and the values of
the node's free variables.

Repetitions are decided by a search over cut points instead of a set
quantifier. With `segment=False` the checker evaluates `expand(c)` and
enumerates cut-point sets by brute force; it is exponential and only meant
for short traces.
"""

from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, Iterator, List, Optional, Tuple

from constraints.constraint_ast import (
    PATTERN_FIELDS,
    ActivePred,
    And,
    Any_,
    ConfigSat,
    Const,
    Constraint,
    DVar,
    EventMatch,
    EventOf,
    EventPattern,
    ExistsData,
    ExistsPos,
    ExistsSet,
    FirstTerm,
    ForallPos,
    InSet,
    LastTerm,
    Not,
    Or,
    PosCompare,
    Repetition,
    ResPred,
    Restricted,
    Restriction,
    TrueC,
    expand,
    free_vars,
    show,
)
from logic import formulas as F
from logic.evaluation import Evaluator
from logic.values import values_equal
from runtime.configuration import Frame
from runtime.events import Fetch, Invocation, InvocationReaction, Resolving
from runtime.runner import Trace
from utils.errors import EvaluationError

Env = Dict[str, object]

_COMPARE = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


def frame_of(event) -> Frame:
    """The store a formula attached to this event is evaluated in."""
    if isinstance(event, Invocation):
        return Frame(event.caller, proc=event.proc, overlay=event.future)
    if isinstance(event, InvocationReaction):
        return Frame(event.obj, proc=event.future)
    if isinstance(event, Resolving):
        return Frame(event.obj, proc=event.future, result=event.value)
    if isinstance(event, Fetch):
        return Frame(event.obj, proc=event.proc)
    return Frame()


def _equal(a, b) -> bool:
    if isinstance(a, str) or isinstance(b, str):
        return a == b
    return values_equal(a, b)


def unify(pattern: EventPattern, event, env: Env) -> Optional[Env]:
    """env extended so that event matches pattern, or None."""
    if event.tag != pattern.tag:
        return None
    out = env
    for name, term in zip(PATTERN_FIELDS[pattern.tag], pattern.fields):
        if isinstance(term, Any_):
            continue
        value = getattr(event, name)
        if isinstance(term, Const):
            if not _equal(value, term.value):
                return None
        elif isinstance(term, DVar):
            if term.name in out:
                if not _equal(value, out[term.name]):
                    return None
            else:
                if out is env:
                    out = dict(env)
                out[term.name] = value
    return out


def _key(value):
    return (type(value).__name__, value)


class TraceChecker:
    def __init__(self, trace: Trace, memo: bool = True, segment: bool = True):
        self.trace = trace
        self.pairs = trace.pairs
        self.n = len(trace.pairs)
        self.full = (1 << (self.n + 1)) - 1
        self.memo = memo
        self.segment = segment
        self.errors: List[str] = []
        self._cache: Dict[tuple, bool] = {}
        self._masks: Dict[tuple, int] = {}
        self._free: Dict[int, Tuple[str, ...]] = {}
        self._hints: Dict[int, Optional[EventPattern]] = {}
        self._contexts: Dict[tuple, object] = {}
        self._root: Optional[Constraint] = None

    # ----------------------------------
    # Entry points
    # ----------------------------------

    def check(self, c: Constraint) -> bool:
        self._cache.clear()
        self._masks.clear()
        self._free.clear()
        self._hints.clear()
        # keeps every node alive while ids are used as cache keys
        self._root = c if self.segment else expand(c)
        return self._holds(self._root, {}, self.full)

    # ----------------------------------
    # Positions
    # ----------------------------------

    def _positions(self, allowed: int, cut: bool) -> List[int]:
        last = self.n + 1 if cut else self.n
        return [p for p in range(last) if allowed >> p & 1]

    def _cuts(self, guards, env: Env, allowed: int) -> List[int]:
        """Cut points of a window: its positions and the point just past its last one."""
        points = self._guarded(guards, env, self._positions(allowed, cut=True))
        if points and points[-1] < self.n:
            points.append(points[-1] + 1)
        return points

    def _guarded(self, guards, env: Env, positions: List[int]) -> List[int]:
        if not guards:
            return positions
        return [
            p for p in positions
            if all(self._holds(r.guard, {**env, r.var: p}, self.full) for r in guards)
        ]

    def _pos(self, ref, env: Env) -> int:
        return ref if isinstance(ref, int) else env[ref]

    def _event(self, ref, env: Env):
        p = self._pos(ref, env)
        return self.pairs[p].event if p < self.n else None

    def _mask(self, r: Restriction, env: Env) -> int:
        names = self._free_of(r.guard)
        key = (id(r), tuple(_key(env.get(v)) for v in names if v != r.var))
        if key not in self._masks:
            mask = 0
            for p in range(self.n + 1):
                if self._holds(r.guard, {**env, r.var: p}, self.full):
                    mask |= 1 << p
            self._masks[key] = mask
        return self._masks[key]

    # ----------------------------------
    # Memo
    # ----------------------------------

    def _free_of(self, c) -> Tuple[str, ...]:
        if id(c) not in self._free:
            self._free[id(c)] = tuple(sorted(free_vars(c)))
        return self._free[id(c)]

    def _memoized(self, c: Constraint, env: Env, allowed: int, compute) -> bool:
        if not self.memo:
            return compute()
        key = (id(c), allowed, tuple(_key(env.get(v)) for v in self._free_of(c)))
        if key not in self._cache:
            self._cache[key] = compute()
        return self._cache[key]

    def _hint(self, c: ExistsPos) -> Optional[EventPattern]:
        if id(c) not in self._hints:
            found = None
            stack = [c.body]
            while stack and found is None:
                x = stack.pop()
                if isinstance(x, EventMatch) and x.pos == c.var:
                    found = x.pattern
                elif isinstance(x, And):
                    stack.extend(x.parts)
                elif isinstance(x, ExistsData):
                    stack.append(x.body)
            self._hints[id(c)] = found
        return self._hints[id(c)]

    # ----------------------------------
    # Formulas on configurations
    # ----------------------------------

    def _context(self, p: int, at: str):
        key = (p, at)
        if key not in self._contexts:
            if at == "cut":
                cfg = self.pairs[p].before if p < self.n else self.pairs[-1].config
                ctx = cfg.eval_context(Frame())
            else:
                pair = self.pairs[p]
                cfg = pair.config if at == "post" else pair.before
                ctx = cfg.eval_context(frame_of(pair.event))
            self._contexts[key] = ctx
        return self._contexts[key]

    def formula_at(self, phi: F.Formula, p: int, at: str, env: Env) -> bool:
        if at == "cut" and self.n == 0:
            return True
        if at != "cut" and p >= self.n:
            return False
        try:
            return Evaluator(self._context(p, at)).holds(phi, env)
        except EvaluationError as exc:
            self.errors.append(f"at position {p}: {exc}")
            return False

    # ----------------------------------
    # Evaluation
    # ----------------------------------

    def _holds(self, c: Constraint, env: Env, allowed: int) -> bool:
        if isinstance(c, TrueC):
            return True
        if isinstance(c, Not):
            return not self._holds(c.body, env, allowed)
        if isinstance(c, And):
            return all(self._holds(p, env, allowed) for p in c.parts)
        if isinstance(c, Or):
            return any(self._holds(p, env, allowed) for p in c.parts)
        if isinstance(c, ExistsData):
            return next(self._solve(c.body, env, allowed), None) is not None
        if isinstance(c, ExistsPos):
            return self._memoized(c, env, allowed, lambda: self._exists(c, env, allowed))
        if isinstance(c, ForallPos):
            return self._memoized(c, env, allowed, lambda: self._forall(c, env, allowed))
        if isinstance(c, ExistsSet):
            return self._exists_set(c, env, allowed)
        if isinstance(c, InSet):
            return env[c.pos] in env[c.setvar]
        if isinstance(c, PosCompare):
            return _COMPARE[c.op](self._pos(c.left, env), self._pos(c.right, env))
        if isinstance(c, EventMatch):
            ev = self._event(c.pos, env)
            return ev is not None and unify(c.pattern, ev, env) is not None
        if isinstance(c, ConfigSat):
            return self.formula_at(c.formula, self._pos(c.pos, env), c.at, env)
        if isinstance(c, ResPred):
            ev = self._event(c.pos, env)
            return ev is not None and ev.tag == "fEv"
        if isinstance(c, EventOf):
            ev = self._event(c.pos, env)
            return ev is not None and ev.obj == c.obj
        if isinstance(c, ActivePred):
            p = self._pos(c.pos, env)
            if p >= self.n:
                return False
            try:
                return self.pairs[p].config.object(c.obj).active is not None
            except KeyError:
                return False
        if isinstance(c, FirstTerm):
            return self._extreme_term(c, env, allowed, first=True)
        if isinstance(c, LastTerm):
            return self._extreme_term(c, env, allowed, first=False)
        if isinstance(c, Restricted):
            return self._holds(c.body, env, allowed & self._mask(c.restriction, env))
        if isinstance(c, Repetition):
            return self._memoized(c, env, allowed, lambda: self._repetition(c, env, allowed))
        raise TypeError(f"not a constraint: {c!r}")

    def _solve(self, c: Constraint, env: Env, allowed: int) -> Iterator[Env]:
        """Environments extending env (binding data variables) under which c holds."""
        if isinstance(c, And):
            yield from self._chain(c.parts, env, allowed)
        elif isinstance(c, Or):
            for part in c.parts:
                yield from self._solve(part, env, allowed)
        elif isinstance(c, EventMatch):
            ev = self._event(c.pos, env)
            bound = unify(c.pattern, ev, env) if ev is not None else None
            if bound is not None:
                yield bound
        elif isinstance(c, ExistsData):
            yield from self._solve(c.body, env, allowed)
        elif self._holds(c, env, allowed):
            yield env

    def _chain(self, parts, env: Env, allowed: int) -> Iterator[Env]:
        if not parts:
            yield env
            return
        for bound in self._solve(parts[0], env, allowed):
            yield from self._chain(parts[1:], bound, allowed)

    def _domain(self, c, env: Env, allowed: int) -> List[int]:
        if c.cut:
            return self._cuts(c.guards, env, allowed)
        return self._guarded(c.guards, env, self._positions(allowed, cut=False))

    def _exists(self, c: ExistsPos, env: Env, allowed: int) -> bool:
        if c.anchored:
            allowed = self.full
        positions = self._domain(c, env, allowed)
        hint = self._hint(c)
        if hint is not None:
            positions = [
                p for p in positions
                if p < self.n and unify(hint, self.pairs[p].event, env) is not None
            ]
        return any(self._holds(c.body, {**env, c.var: p}, allowed) for p in positions)

    def _forall(self, c: ForallPos, env: Env, allowed: int) -> bool:
        return all(self._holds(c.body, {**env, c.var: p}, allowed) for p in self._domain(c, env, allowed))

    def _exists_set(self, c: ExistsSet, env: Env, allowed: int) -> bool:
        points = self._cuts(c.guards, env, allowed)
        for size in range(len(points) + 1):
            for chosen in combinations(points, size):
                if self._holds(c.body, {**env, c.var: frozenset(chosen)}, allowed):
                    return True
        return False

    def _is_termination(self, ev, c) -> bool:
        if ev.tag != "fEv" or ev.obj != c.obj:
            return False
        return c.method is None or ev.method == c.method

    def _extreme_term(self, c, env: Env, allowed: int, first: bool) -> bool:
        p = self._pos(c.pos, env)
        others = [q for q in self._positions(allowed, cut=False) if (q < p if first else q > p)]
        for q in self._guarded(c.guards, env, others):
            if self._is_termination(self.pairs[q].event, c):
                return False
        return True

    def _repetition(self, c: Repetition, env: Env, allowed: int) -> bool:
        points = [p for p in self._cuts(c.guards, env, allowed) if self.formula_at(c.invariant, p, "cut", env)]
        if not points:
            return False

        events = self._guarded(c.guards, env, self._positions(allowed, cut=False))
        matched = [
            q for q in events
            if any(unify(pat, self.pairs[q].event, env) is not None for pat in c.patterns)
        ]
        first = min(matched) if matched else None
        last = max(matched) if matched else None

        def window(a: int, b: int) -> int:
            return allowed & (((1 << b) - 1) ^ ((1 << a) - 1))

        steps: Dict[Tuple[int, int], bool] = {}

        def step(a: int, b: int) -> bool:
            if (a, b) not in steps:
                steps[(a, b)] = self._holds(c.inner, env, window(a, b))
            return steps[(a, b)]

        for start in points:
            if first is not None and start > first:
                break
            reached = {start}
            frontier = [start]
            while frontier:
                a = frontier.pop()
                for b in points:
                    if b > a and b not in reached and step(a, b):
                        reached.add(b)
                        frontier.append(b)
            if last is None or any(hi > last for hi in reached):
                return True
        return False


# ----------------------------------
# Results
# ----------------------------------

@dataclass
class TraceVerdict:
    ok: bool
    failed: Optional[str] = None
    errors: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"ok": self.ok, "failed": self.failed, "errors": list(self.errors)}


def _clip(text: str, width: int = 400) -> str:
    return text if len(text) <= width else text[: width - 3] + "..."


def check_trace(trace: Trace, c: Constraint, segment: bool = True) -> TraceVerdict:
    """
    Whether trace satisfies c.

    Returns:
        TraceVerdict naming the first failing top-level conjunct when the
        trace is rejected, plus formulas that could not be evaluated
    """
    checker = TraceChecker(trace, segment=segment)
    if checker.check(c):
        return TraceVerdict(True, errors=checker.errors)
    failed = show(c)
    if isinstance(c, And):
        for part in c.parts:
            if not TraceChecker(trace, segment=segment).check(part):
                failed = show(part)
                break
    return TraceVerdict(False, _clip(failed), checker.errors)


def holds(trace: Trace, c: Constraint, segment: bool = True) -> bool:
    return TraceChecker(trace, segment=segment).check(c)


def restrict_trace(trace: Trace, obj: str) -> Trace:
    """Events of obj together with every resolving event."""
    return Trace([p for p in trace.pairs if p.event.obj == obj or p.event.tag == "fEv"])
