"""
Constraints over finite traces.

Position variables range over the positions of a trace (cut variables
also over the position just past the end); data variables are bound by
unifying event patterns against the concrete event at a position; set
variables range over sets of cut points. Relativization is carried by
`guards`: a quantifier with guards only ranges over positions satisfying
all of them.
"""

from dataclasses import dataclass
from itertools import count
from typing import FrozenSet, Optional, Tuple, Union

from logic import formulas as F
from logic.values import show_value
from syntax.pretty import pretty_formula

PosRef = Union[str, int]

_fresh = count(1)


def fresh(prefix: str) -> str:
    return f"{prefix}!{next(_fresh)}"


# ----------------------------------
# Event patterns
# ----------------------------------

@dataclass(frozen=True)
class Const:
    value: object


@dataclass(frozen=True)
class DVar:
    name: str


@dataclass(frozen=True)
class Any_:
    pass


ANY = Any_()
DataTerm = Union[Const, DVar, Any_]

PATTERN_FIELDS = {
    "iEv": ("caller", "callee", "future", "method", "args"),
    "iREv": ("obj", "future", "method"),
    "fEv": ("obj", "future", "method", "value"),
    "fREv": ("obj", "future", "value"),
}


@dataclass(frozen=True)
class EventPattern:
    tag: str
    fields: Tuple[DataTerm, ...]

    def __post_init__(self):
        assert len(self.fields) == len(PATTERN_FIELDS[self.tag]), f"bad arity for {self.tag}"


def _d(x) -> DataTerm:
    if x is None:
        return ANY
    if isinstance(x, (Const, DVar, Any_)):
        return x
    return Const(x)


def invocation(caller, callee, future=None, method=None, args=None) -> EventPattern:
    return EventPattern("iEv", tuple(map(_d, (caller, callee, future, method, args))))


def reaction(obj, future=None, method=None) -> EventPattern:
    return EventPattern("iREv", tuple(map(_d, (obj, future, method))))


def resolving(obj, future=None, method=None, value=None) -> EventPattern:
    return EventPattern("fEv", tuple(map(_d, (obj, future, method, value))))


def fetch(obj, future=None, value=None) -> EventPattern:
    return EventPattern("fREv", tuple(map(_d, (obj, future, value))))


# ----------------------------------
# Constraints
# ----------------------------------

@dataclass(frozen=True)
class Restriction:
    """A predicate on one position variable, used to relativize a constraint."""
    var: str
    guard: "Constraint"


Guards = Tuple[Restriction, ...]


@dataclass(frozen=True)
class TrueC:
    pass


TRUE = TrueC()


@dataclass(frozen=True)
class Not:
    body: "Constraint"


@dataclass(frozen=True)
class And:
    parts: Tuple["Constraint", ...]


@dataclass(frozen=True)
class Or:
    parts: Tuple["Constraint", ...]


@dataclass(frozen=True)
class ExistsPos:
    """
    A position (or cut point if `cut`) satisfying the guards and the body.

    An anchored quantifier ranges over the whole trace; relativization
    leaves it alone.
    """
    var: str
    body: "Constraint"
    guards: Guards = ()
    cut: bool = False
    anchored: bool = False


@dataclass(frozen=True)
class ForallPos:
    var: str
    body: "Constraint"
    guards: Guards = ()
    cut: bool = False


@dataclass(frozen=True)
class ExistsData:
    vars: Tuple[str, ...]
    body: "Constraint"


@dataclass(frozen=True)
class ExistsSet:
    """A set of cut points whose elements all satisfy the guards."""
    var: str
    body: "Constraint"
    guards: Guards = ()


@dataclass(frozen=True)
class InSet:
    pos: str
    setvar: str


@dataclass(frozen=True)
class PosCompare:
    left: PosRef
    op: str  # "<" | "<=" | "==" | "!="
    right: PosRef


@dataclass(frozen=True)
class EventMatch:
    pos: str
    pattern: EventPattern


@dataclass(frozen=True)
class ConfigSat:
    """
    The formula holds at a position.

    `at` picks the configuration: "post" (after the event), "before" (in
    which the event fires) or "cut" (the state at a cut point, no frame).
    """
    pos: str
    formula: F.Formula
    at: str = "post"


@dataclass(frozen=True)
class ResPred:
    pos: str


@dataclass(frozen=True)
class ActivePred:
    pos: str
    obj: str


@dataclass(frozen=True)
class EventOf:
    pos: str
    obj: str


@dataclass(frozen=True)
class FirstTerm:
    """No resolving event of obj (of method, if given; within the guards) comes before pos."""
    pos: str
    obj: str
    method: Optional[str] = None
    guards: Guards = ()


@dataclass(frozen=True)
class LastTerm:
    """No resolving event of obj.method (within the guards) comes after pos."""
    pos: str
    obj: str
    method: str
    guards: Guards = ()


@dataclass(frozen=True)
class Restricted:
    """body relativized with restriction, applied lazily during evaluation."""
    body: "Constraint"
    restriction: Restriction


@dataclass(frozen=True)
class Repetition:
    """
    A sequence of cut points b0 < ... < bR such that the invariant holds at
    every cut, `inner` holds in every window [b_r, b_r+1), and every event
    matching one of `patterns` lies in [b0, bR).
    """
    invariant: F.Formula
    inner: "Constraint"
    patterns: Tuple[EventPattern, ...] = ()
    guards: Guards = ()


Constraint = Union[
    TrueC, Not, And, Or, ExistsPos, ForallPos, ExistsData, ExistsSet, InSet, PosCompare,
    EventMatch, ConfigSat, ResPred, ActivePred, EventOf, FirstTerm, LastTerm, Restricted,
    Repetition,
]


# ----------------------------------
# Smart constructors
# ----------------------------------

def conj(*parts: Constraint) -> Constraint:
    flat = []
    for p in parts:
        if isinstance(p, TrueC):
            continue
        flat.extend(p.parts if isinstance(p, And) else (p,))
    if not flat:
        return TRUE
    return flat[0] if len(flat) == 1 else And(tuple(flat))


def disj(*parts: Constraint) -> Constraint:
    flat = []
    for p in parts:
        if isinstance(p, TrueC):
            return TRUE
        flat.extend(p.parts if isinstance(p, Or) else (p,))
    if len(flat) == 1:
        return flat[0]
    return Or(tuple(flat))


def implies(a: Constraint, b: Constraint) -> Constraint:
    return disj(Not(a), b)


def exists(*names_and_body, cut: bool = False) -> Constraint:
    *names, body = names_and_body
    for name in reversed(names):
        body = ExistsPos(name, body, cut=cut)
    return body


# ----------------------------------
# Free variables
# ----------------------------------

def _pos_vars(*refs) -> FrozenSet[str]:
    return frozenset(r for r in refs if isinstance(r, str))


def _guard_vars(guards: Guards) -> FrozenSet[str]:
    out = frozenset()
    for r in guards:
        out |= free_vars(r.guard) - {r.var}
    return out


def _pattern_vars(p: EventPattern) -> FrozenSet[str]:
    return frozenset(t.name for t in p.fields if isinstance(t, DVar))


def free_vars(c: Constraint) -> FrozenSet[str]:
    if isinstance(c, (TrueC,)):
        return frozenset()
    if isinstance(c, Not):
        return free_vars(c.body)
    if isinstance(c, (And, Or)):
        out = frozenset()
        for p in c.parts:
            out |= free_vars(p)
        return out
    if isinstance(c, (ExistsPos, ForallPos)):
        return (free_vars(c.body) - {c.var}) | _guard_vars(c.guards)
    if isinstance(c, ExistsData):
        return free_vars(c.body) - set(c.vars)
    if isinstance(c, ExistsSet):
        return (free_vars(c.body) - {c.var}) | _guard_vars(c.guards)
    if isinstance(c, InSet):
        return frozenset({c.pos, c.setvar})
    if isinstance(c, PosCompare):
        return _pos_vars(c.left, c.right)
    if isinstance(c, EventMatch):
        return frozenset({c.pos}) | _pattern_vars(c.pattern)
    if isinstance(c, ConfigSat):
        data = frozenset(v.name for v in F.free_vars(c.formula) if v.logical)
        return frozenset({c.pos}) | data
    if isinstance(c, (ResPred, ActivePred, EventOf)):
        return frozenset({c.pos})
    if isinstance(c, (FirstTerm, LastTerm)):
        return frozenset({c.pos}) | _guard_vars(c.guards)
    if isinstance(c, Restricted):
        return free_vars(c.body) | (free_vars(c.restriction.guard) - {c.restriction.var})
    if isinstance(c, Repetition):
        data = frozenset(v.name for v in F.free_vars(c.invariant) if v.logical)
        return free_vars(c.inner) | _guard_vars(c.guards) | data
    raise TypeError(f"not a constraint: {c!r}")


# ----------------------------------
# Relativization
# ----------------------------------

def relativize(c: Constraint, r: Restriction) -> Constraint:
    """
    Restrict every position and set quantifier of c to positions where
    r.guard holds.
    """
    if isinstance(c, (And, Or)):
        return type(c)(tuple(relativize(p, r) for p in c.parts))
    if isinstance(c, Not):
        return Not(relativize(c.body, r))
    if isinstance(c, ExistsPos):
        if c.anchored:
            return c
        return ExistsPos(c.var, relativize(c.body, r), c.guards + (r,), c.cut)
    if isinstance(c, ForallPos):
        return ForallPos(c.var, relativize(c.body, r), c.guards + (r,), c.cut)
    if isinstance(c, ExistsData):
        return ExistsData(c.vars, relativize(c.body, r))
    if isinstance(c, ExistsSet):
        return ExistsSet(c.var, relativize(c.body, r), c.guards + (r,))
    if isinstance(c, FirstTerm):
        return FirstTerm(c.pos, c.obj, c.method, c.guards + (r,))
    if isinstance(c, LastTerm):
        return LastTerm(c.pos, c.obj, c.method, c.guards + (r,))
    if isinstance(c, Restricted):
        return Restricted(relativize(c.body, r), c.restriction)
    if isinstance(c, Repetition):
        return Repetition(c.invariant, relativize(c.inner, r), c.patterns, c.guards + (r,))
    return c


def expand(c: Constraint) -> Constraint:
    """
    Replace lazy restrictions and repetitions by plain quantifiers.

    The result uses only first-order position quantifiers and set
    quantifiers; it is what the brute-force evaluator checks.
    """
    if isinstance(c, (And, Or)):
        return type(c)(tuple(expand(p) for p in c.parts))
    if isinstance(c, Not):
        return Not(expand(c.body))
    if isinstance(c, ExistsPos):
        return ExistsPos(c.var, expand(c.body), c.guards, c.cut, c.anchored)
    if isinstance(c, ForallPos):
        return ForallPos(c.var, expand(c.body), c.guards, c.cut)
    if isinstance(c, ExistsData):
        return ExistsData(c.vars, expand(c.body))
    if isinstance(c, ExistsSet):
        return ExistsSet(c.var, expand(c.body), c.guards)
    if isinstance(c, Restricted):
        return relativize(expand(c.body), c.restriction)
    if isinstance(c, Repetition):
        return _expand_repetition(c)
    return c


def _expand_repetition(rep: Repetition) -> Constraint:
    g = rep.guards
    s, lo, hi, a, b, x, y, k, n = (fresh(p) for p in ("B", "lo", "hi", "a", "b", "x", "y", "k", "n"))

    def cut_forall(var, body):
        return ForallPos(var, body, g, cut=True)

    def cut_exists(var, body):
        return ExistsPos(var, body, g, cut=True)

    bounds = cut_forall(x, implies(InSet(x, s), conj(PosCompare(lo, "<=", x), PosCompare(x, "<=", hi))))
    if rep.patterns:
        matches = disj(*(EventMatch(k, p) for p in rep.patterns))
        cover = ForallPos(k, implies(matches, conj(PosCompare(lo, "<=", k), PosCompare(k, "<", hi))), g)
    else:
        cover = TRUE
    extent = cut_exists(lo, conj(InSet(lo, s), cut_exists(hi, conj(InSet(hi, s), bounds, cover))))
    invariant = cut_forall(x, implies(InSet(x, s), ConfigSat(x, rep.invariant, "cut")))
    adjacent = conj(
        InSet(a, s), InSet(b, s), PosCompare(a, "<", b),
        cut_forall(y, implies(InSet(y, s), disj(PosCompare(y, "<=", a), PosCompare(y, ">=", b)))),
    )
    window = Restriction(n, conj(PosCompare(a, "<=", n), PosCompare(n, "<", b)))
    steps = cut_forall(a, cut_forall(b, implies(adjacent, relativize(expand(rep.inner), window))))
    return ExistsSet(s, conj(extent, invariant, steps), g)


# ----------------------------------
# Printing
# ----------------------------------

def _show_data(t: DataTerm) -> str:
    if isinstance(t, Const):
        if isinstance(t.value, tuple) or not isinstance(t.value, str):
            return show_value(t.value)
        return t.value
    if isinstance(t, DVar):
        return t.name
    return "_"


def show_pattern(p: EventPattern) -> str:
    return f"{p.tag}({', '.join(_show_data(t) for t in p.fields)})"


def _show_guards(guards: Guards) -> str:
    if not guards:
        return ""
    return "[" + "; ".join(f"{r.var}: {show(r.guard)}" for r in guards) + "]"


def show(c: Constraint) -> str:
    if isinstance(c, TrueC):
        return "true"
    if isinstance(c, Not):
        return f"!({show(c.body)})"
    if isinstance(c, And):
        return "(" + " && ".join(show(p) for p in c.parts) + ")"
    if isinstance(c, Or):
        return "(" + " || ".join(show(p) for p in c.parts) + ")"
    if isinstance(c, ExistsPos):
        return f"exists {c.var}{_show_guards(c.guards)}. {show(c.body)}"
    if isinstance(c, ForallPos):
        return f"forall {c.var}{_show_guards(c.guards)}. {show(c.body)}"
    if isinstance(c, ExistsData):
        return f"exists {', '.join(c.vars)}. {show(c.body)}"
    if isinstance(c, ExistsSet):
        return f"exists set {c.var}{_show_guards(c.guards)}. {show(c.body)}"
    if isinstance(c, InSet):
        return f"{c.pos} in {c.setvar}"
    if isinstance(c, PosCompare):
        return f"{c.left} {c.op} {c.right}"
    if isinstance(c, EventMatch):
        return f"ev({c.pos}) = {show_pattern(c.pattern)}"
    if isinstance(c, ConfigSat):
        where = {"post": "C", "before": "C-", "cut": "C@"}[c.at]
        return f"{where}({c.pos}) |= {pretty_formula(c.formula)}"
    if isinstance(c, ResPred):
        return f"res({c.pos})"
    if isinstance(c, ActivePred):
        return f"active({c.pos}, {c.obj})"
    if isinstance(c, EventOf):
        return f"of({c.pos}, {c.obj})"
    if isinstance(c, FirstTerm):
        owner = f"{c.obj}.{c.method}" if c.method else c.obj
        return f"firstTerm({c.pos}, {owner}){_show_guards(c.guards)}"
    if isinstance(c, LastTerm):
        return f"lastTerm({c.pos}, {c.obj}.{c.method}){_show_guards(c.guards)}"
    if isinstance(c, Restricted):
        return f"{show(c.body)}[{c.restriction.var}: {show(c.restriction.guard)}]"
    if isinstance(c, Repetition):
        return f"repeat[{pretty_formula(c.invariant)}]({show(c.inner)})"
    raise TypeError(f"not a constraint: {c!r}")
