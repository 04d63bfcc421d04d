"""
Translation of global and local types into trace constraints.

Global sequencing splits the trace once per object: in G1 . G2 every
event of X that X issues while active lies before the split for G1 and
after it for G2. Resolving events are never restricted, since a protocol
does not say where a process terminates. Local sequencing splits the
trace of one object into consecutive windows, one per item.
"""

from typing import Dict, List, Optional, Tuple

from constraints.constraint_ast import (
    TRUE,
    ActivePred,
    Constraint,
    ConfigSat,
    DVar,
    EventMatch,
    EventOf,
    EventPattern,
    ExistsData,
    ExistsPos,
    FirstTerm,
    ForallPos,
    LastTerm,
    Not,
    PosCompare,
    Repetition,
    ResPred,
    Restricted,
    Restriction,
    conj,
    disj,
    fetch,
    fresh,
    implies,
    invocation,
    reaction,
    resolving,
)
from logic import formulas as F
from logic.weakening import weaken
from syntax import session_types as S

ActiveMethods = Dict[str, str]


def _sat(pos: str, phi: F.Formula, at: str = "post") -> Constraint:
    return TRUE if isinstance(phi, F.Top) else ConfigSat(pos, phi, at)


def _same(expr: F.Term, var: str) -> F.Formula:
    return F.Eq(expr, F.Var(var, True))


def exclusive(start: str, end: str, obj: str) -> Constraint:
    """No other process of obj starts strictly between start and end."""
    l = fresh("l")
    return ForallPos(l, Not(conj(
        PosCompare(start, "<", l), PosCompare(l, "<", end), EventMatch(l, reaction(obj)),
    )))


# frame value of the outermost sequence: every object is windowed
EVERY = "*"


def framed(frame: Optional[str], *own: str) -> Constraint:
    """
    Every event of `frame` in the window that is not a termination is one
    of the positions in `own`. EVERY frames all objects, None nothing.
    """
    if frame is None:
        return TRUE
    l = fresh("l")
    issued = Not(ResPred(l)) if frame == EVERY else conj(EventOf(l, frame), Not(ResPred(l)))
    return ForallPos(l, implies(issued, disj(*(PosCompare(l, "==", p) for p in own))))


def _issued_by(obj: str) -> Tuple[EventPattern, ...]:
    return invocation(obj, None), reaction(obj), fetch(obj)


# ----------------------------------
# Global types
# ----------------------------------

class GlobalTranslator:
    """
    Translation of a global type.

    Sequencing conjoins one split per object. Along the chain of splits
    that all cut the same object X, every item also carries the frame of
    X: the events X issues in the item's window are exactly the item's
    own, so interactions the protocol does not describe are rejected.
    """

    def __init__(self, g: S.GlobalType):
        self.g = g
        self.roles = sorted(S.roles(g))

    def translate(self) -> Constraint:
        main = self.g.main
        items = (main,) + tuple(self.g.body)
        return self.sequence(items, {}, EVERY)

    def _split(self, obj: str, cut: str, op: str) -> Restriction:
        n = fresh("n")
        owned = conj(EventOf(n, obj), ActivePred(n, obj))
        return Restriction(n, implies(owned, PosCompare(n, op, cut)))

    def sequence(self, items, active: ActiveMethods, frame: Optional[str] = None) -> Constraint:
        items = [i for i in items if not isinstance(i, S.GEnd)]
        if not items:
            return TRUE
        if len(items) == 1:
            return self.item(items[0], active, frame)
        after = self._after(items[0], active)
        unframed = None
        parts = []
        for obj in self.roles:
            if frame in (EVERY, obj):
                head = self.item(items[0], active, obj)
                rest = self.sequence(items[1:], after, obj)
            else:
                if unframed is None:
                    unframed = (self.item(items[0], active), self.sequence(items[1:], after))
                head, rest = unframed
            i = fresh("i")
            parts.append(ExistsPos(i, conj(
                Restricted(head, self._split(obj, i, "<")),
                Restricted(rest, self._split(obj, i, ">=")),
            ), cut=True))
        return conj(*parts)

    def _after(self, item, active: ActiveMethods) -> ActiveMethods:
        out = dict(active)
        if isinstance(item, S.MainCallType):
            out[item.callee] = item.method
        elif isinstance(item, S.GCall):
            out[item.callee] = item.method
        elif isinstance(item, S.GRepeat):
            for inner in item.body:
                out = self._after(inner, out)
        return out

    def item(self, item, active: ActiveMethods, frame: Optional[str] = None) -> Constraint:
        if isinstance(item, S.MainCallType):
            return self.main_call(item, frame)
        if isinstance(item, S.GCall):
            return self.call(item, frame)
        if isinstance(item, S.GRead):
            return self.read(item, frame)
        if isinstance(item, S.GRepeat):
            return self.repeat(item, active, frame)
        if isinstance(item, S.GChoice):
            return self.choice(item, active, frame)
        return TRUE

    def main_call(self, m: S.MainCallType, frame: Optional[str] = None) -> Constraint:
        j, k, f, e = fresh("j"), fresh("k"), fresh("f"), fresh("e")
        terminate = ExistsPos(k, ExistsData((e,), conj(
            EventMatch(k, resolving(m.callee, DVar(f), m.method, DVar(e))),
            _sat(k, m.post),
            exclusive(j, k, m.callee),
        )))
        return ExistsPos(j, ExistsData((f,), conj(
            EventMatch(j, reaction(m.callee, DVar(f), m.method)),
            framed(frame, j),
            terminate,
        )))

    def call(self, c: S.GCall, frame: Optional[str] = None) -> Constraint:
        i, j, k = fresh("i"), fresh("j"), fresh("k")
        f, e, r = fresh("f"), fresh("e"), fresh("r")
        terminate = ExistsPos(k, ExistsData((r,), conj(
            EventMatch(k, resolving(c.callee, DVar(f), c.method, DVar(r))),
            _sat(k, c.post),
            exclusive(j, k, c.callee),
        )))
        start = ExistsPos(j, conj(
            EventMatch(j, reaction(c.callee, DVar(f), c.method)),
            _sat(j, weaken(c.pre, c.callee)),
            framed(frame, i, j),
            terminate,
        ))
        location = _sat(i, _same(F.field(c.caller, c.loc), f)) if c.loc else TRUE
        return ExistsPos(i, ExistsData((f, e), conj(
            EventMatch(i, invocation(c.caller, c.callee, DVar(f), c.method, DVar(e))),
            _sat(i, c.pre),
            location,
            start,
        )))

    def read(self, r: S.GRead, frame: Optional[str] = None) -> Constraint:
        i, f, v = fresh("i"), fresh("f"), fresh("v")
        return ExistsPos(i, ExistsData((f, v), conj(
            EventMatch(i, fetch(r.obj, DVar(f), DVar(v))),
            ConfigSat(i, _same(r.expr, f), "before"),
            framed(frame, i),
        )))

    def repeat(self, rep: S.GRepeat, active: ActiveMethods, frame: Optional[str] = None) -> Constraint:
        patterns: List[EventPattern] = []
        for item in S.global_items(rep.body):
            if isinstance(item, S.GCall):
                patterns.append(invocation(item.caller, item.callee, None, item.method))
                patterns.append(reaction(item.callee, None, item.method))
        if frame == EVERY:
            for obj in self.roles:
                patterns.extend(_issued_by(obj))
        elif frame is not None:
            patterns.extend(_issued_by(frame))
        return Repetition(rep.invariant, self.sequence(rep.body, active, frame), tuple(patterns))

    def _first_termination(self, k: str, obj: str, method: Optional[str], phi: F.Formula,
                           after: Optional[str] = None, inner=()) -> Constraint:
        e = fresh("e")
        order = PosCompare(after, "<=", k) if after else TRUE
        return ExistsPos(k, ExistsData((e,), conj(
            EventMatch(k, resolving(obj, None, method, DVar(e))),
            FirstTerm(k, obj, method=method),
            order,
            _sat(k, phi),
            *inner,
        )))

    def choice(self, ch: S.GChoice, active: ActiveMethods, frame: Optional[str] = None) -> Constraint:
        options = []
        for b in ch.branches:
            k = fresh("k")
            reactors = [
                self._first_termination(fresh("k"), r.obj, active.get(r.obj), r.post, after=k)
                for r in b.reactions
            ]
            chooser = self._first_termination(k, ch.chooser, active.get(ch.chooser), b.post, inner=reactors)
            options.append(conj(self.sequence(b.body, active, frame), chooser))
        return disj(*options)


def translate_global(g: S.GlobalType) -> Constraint:
    return GlobalTranslator(g).translate()


# ----------------------------------
# Local types
# ----------------------------------

class LocalTranslator:
    """
    Translation of a local type of `obj`. Each item owns exactly one event
    of obj in its window; events of other objects are ignored.
    """

    def __init__(self, obj: str):
        self.obj = obj

    def sequence(self, items) -> Constraint:
        items = [i for i in items if not isinstance(i, (S.LSkip, S.LEnd))]
        if not items:
            return TRUE
        head = self.item(items[0])
        if len(items) == 1:
            return head
        i, n, m = fresh("i"), fresh("n"), fresh("n")
        return ExistsPos(i, conj(
            Restricted(head, Restriction(n, PosCompare(n, "<", i))),
            Restricted(self.sequence(items[1:]), Restriction(m, PosCompare(m, ">=", i))),
        ), cut=True)

    def _single(self, pos: str) -> Constraint:
        j = fresh("j")
        return ForallPos(j, implies(EventOf(j, self.obj), PosCompare(j, "==", pos)))

    def _event(self, pattern: EventPattern, data: Tuple[str, ...], *clauses: Constraint) -> Constraint:
        i = fresh("i")
        return ExistsPos(i, ExistsData(data, conj(
            EventMatch(i, pattern), *(c(i) for c in clauses), self._single(i),
        )))

    def item(self, item) -> Constraint:
        x = self.obj
        if isinstance(item, S.Receive):
            f = fresh("f")
            return self._event(reaction(x, DVar(f), item.method), (f,), lambda i: _sat(i, item.pre))
        if isinstance(item, S.Send):
            f, e = fresh("f"), fresh("e")
            clauses = [lambda i: _sat(i, weaken(item.pre, x))]
            if item.loc:
                clauses.append(lambda i: _sat(i, _same(F.field(x, item.loc), f)))
            return self._event(invocation(x, item.callee, DVar(f), item.method, DVar(e)), (f, e), *clauses)
        if isinstance(item, S.Put):
            f, e = fresh("f"), fresh("e")
            return self._event(resolving(x, DVar(f), None, DVar(e)), (f, e), lambda i: _sat(i, item.post))
        if isinstance(item, S.LRead):
            f, v = fresh("f"), fresh("v")
            return self._event(fetch(x, DVar(f), DVar(v)), (f, v),
                               lambda i: ConfigSat(i, _same(item.expr, f), "before"))
        if isinstance(item, S.LRepeat):
            return Repetition(item.invariant, self.sequence(item.body), tuple(self._patterns(item.body)))
        if isinstance(item, S.Select):
            return disj(*(self.sequence(b) for b in item.branches))
        if isinstance(item, S.Offer):
            return self.offer(item)
        return TRUE

    def offer(self, item: S.Offer) -> Constraint:
        chooser, method = item.source
        options = []
        for b in item.branches:
            j, e = fresh("j"), fresh("e")
            chosen = ExistsPos(j, ExistsData((e,), conj(
                EventMatch(j, resolving(chooser, None, method, DVar(e))),
                LastTerm(j, chooser, method),
                _sat(j, b.guard),
            )), anchored=True)
            options.append(conj(chosen, self.sequence(b.body)))
        return disj(*options)

    def _patterns(self, items):
        x = self.obj
        for item in S.local_items(items):
            if isinstance(item, S.Receive):
                yield reaction(x, None, item.method)
            elif isinstance(item, S.Send):
                yield invocation(x, item.callee, None, item.method)
            elif isinstance(item, S.Put):
                yield resolving(x)
            elif isinstance(item, S.LRead):
                yield fetch(x)


def translate_local(local: S.LocalType, obj: str) -> Constraint:
    return LocalTranslator(obj).sequence(local.items)
