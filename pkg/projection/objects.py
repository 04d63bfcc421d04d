"""
Projection of a global protocol onto one object.

The projector threads an active map through the protocol: for every object
that has a running process it records the postcondition that process must
establish (and the method it runs). A call into an active object first
terminates the running process with a Put of that postcondition.
"""

from dataclasses import dataclass
from typing import Callable, Dict, List, Tuple

from logic import formulas as F
from logic.validity import Valid, check_validity
from logic.weakening import weaken
from syntax import session_types as S
from syntax.pretty import pretty_term
from utils.errors import ProjectionUndefined

RULE_CALLER = "projection rule 1"
RULE_CALLEE = "projection rule 2"
RULE_READ = "projection read rule"
RULE_LOOP = "projection loop rule"
RULE_BRANCH = "projection branching rule"


@dataclass(frozen=True)
class ActiveEntry:
    """Postcondition of the last process started on an object."""
    post: F.Formula
    method: str
    cid: int = -1


ActiveMap = Dict[str, ActiveEntry]


def describe(item) -> str:
    if isinstance(item, S.GCall):
        arrow = f"-[{item.loc}]->" if item.loc else "->"
        return f"{item.caller} {arrow} {item.callee}.{item.method}"
    if isinstance(item, S.GRead):
        return f"{item.obj} reads {pretty_term(item.expr)}"
    if isinstance(item, S.GRepeat):
        return "repeat block"
    if isinstance(item, S.GChoice):
        return f"choice of {item.chooser}"
    return type(item).__name__


def receives(obj: str, items) -> bool:
    """True if obj is called somewhere in items."""
    return any(isinstance(i, S.GCall) and i.callee == obj for i in S.global_items(items))


def cs_check(phi: F.Formula, validity: Callable = check_validity) -> bool:
    """The conjunction of all single-object weakenings of phi implies phi."""
    objs = sorted(F.owners(phi) - {"self"})
    if not objs:
        return True
    premise = F.conj(*(weaken(phi, x) for x in objs))
    return isinstance(validity(F.implies(premise, phi)), Valid)


# ----------------------------------
# Canonical form
# ----------------------------------

def canonical(items) -> tuple:
    """Skip-free, alpha-normalized structure used for type comparisons."""
    norm = F.alpha_normalize
    out = []
    for item in S.normalize(tuple(items)):
        if isinstance(item, S.Receive):
            out.append(("receive", item.method, norm(item.pre)))
        elif isinstance(item, S.Send):
            out.append(("send", item.callee, item.method, item.loc, norm(item.pre)))
        elif isinstance(item, S.Put):
            out.append(("put", norm(item.post)))
        elif isinstance(item, S.LRead):
            out.append(("read", item.expr))
        elif isinstance(item, S.LRepeat):
            out.append(("repeat", canonical(item.body), norm(item.invariant)))
        elif isinstance(item, S.Select):
            out.append(("select", tuple(canonical(b) for b in item.branches)))
        elif isinstance(item, S.Offer):
            out.append(("offer", item.source, tuple(
                (norm(b.guard), canonical(b.body)) for b in item.branches)))
        else:
            out.append(("end",))
    return tuple(out)


def types_equal(a, b) -> bool:
    return canonical(a) == canonical(b)


def is_skip(items) -> bool:
    """A projection that does nothing but (possibly) end."""
    return all(isinstance(i, S.LEnd) for i in S.normalize(tuple(items)))


def _strip_end(items: Tuple[S.LItem, ...]) -> Tuple[S.LItem, ...]:
    if items and isinstance(items[-1], S.LEnd):
        return items[:-1]
    return items


# ----------------------------------
# Projector
# ----------------------------------

class ObjectProjector:
    """
    Projects a global type onto `obj`.

    Args:
        obj: object name
        validity: validity oracle used by the loop rule's cs side condition
    """

    def __init__(self, obj: str, validity: Callable = check_validity):
        self.obj = obj
        self.validity = validity

    def project(self, g: S.GlobalType) -> S.LocalType:
        main = g.main
        if main.callee == self.obj:
            head = [S.Receive(main.method, F.TOP, calls=frozenset({main.cid}))]
        else:
            head = [S.LSkip()]
        ac = {main.callee: ActiveEntry(main.post, main.method, main.cid)}
        body, _ = self.sequence(g.body, ac)
        return S.LocalType(S.normalize(tuple(head + body)))

    def sequence(self, items, ac: ActiveMap) -> Tuple[List[S.LItem], ActiveMap]:
        out: List[S.LItem] = []
        for item in items:
            if isinstance(item, S.GCall):
                produced, ac = self._call(item, ac)
            elif isinstance(item, S.GRead):
                produced = self._read(item, ac)
            elif isinstance(item, S.GRepeat):
                produced, ac = self._repeat(item, ac)
            elif isinstance(item, S.GChoice):
                out.extend(self._choice(item, ac))
                return out, ac
            else:
                out.extend(self._end(ac))
                return out, ac
            out.extend(produced)
        return out, ac

    def _call(self, c: S.GCall, ac: ActiveMap):
        x = self.obj
        updated = {**ac, c.callee: ActiveEntry(c.post, c.method, c.cid)}
        calls = frozenset({c.cid})
        if x == c.caller:
            if x not in ac:
                raise ProjectionUndefined(RULE_CALLER, describe(c), "the caller has no active process")
            if not F.alpha_equal(c.pre, weaken(c.pre, x)):
                raise ProjectionUndefined(
                    RULE_CALLER, describe(c), "the precondition mentions fields the caller cannot see"
                )
            return [S.Send(c.callee, c.method, c.pre, c.loc, calls=calls)], updated
        if x == c.callee:
            receive = S.Receive(c.method, weaken(c.pre, x), calls=calls)
            if x in ac:
                return [S.Put(ac[x].post), receive], updated
            return [receive], updated
        return [S.LSkip()], updated

    def _read(self, r: S.GRead, ac: ActiveMap) -> List[S.LItem]:
        if r.obj != self.obj:
            return [S.LSkip()]
        if r.obj not in ac:
            raise ProjectionUndefined(RULE_READ, describe(r), "the reader has no active process")
        return [S.LRead(r.expr)]

    def _end(self, ac: ActiveMap) -> List[S.LItem]:
        if self.obj in ac:
            return [S.Put(ac[self.obj].post), S.LEnd()]
        return [S.LEnd()]

    def _repeat(self, rep: S.GRepeat, ac: ActiveMap):
        x = self.obj
        if not cs_check(rep.invariant, self.validity):
            raise ProjectionUndefined(RULE_LOOP, describe(rep), "the invariant couples several heaps")
        invariant = weaken(rep.invariant, x)
        body, ac_body = self.sequence(rep.body, ac)
        body = S.normalize(tuple(body))
        if not body:
            return [], ac_body
        if x not in ac:
            raise ProjectionUndefined(RULE_LOOP, describe(rep), f"{x} takes part without an active process")
        if receives(x, rep.body):
            inactive = {k: v for k, v in ac.items() if k != x}
            inner, _ = self.sequence(tuple(rep.body) + (S.GEnd(),), inactive)
            inner = _strip_end(S.normalize(tuple(inner)))
            after = {k: v for k, v in ac_body.items() if k != x}
            return [S.Put(ac[x].post), S.LRepeat(inner, invariant)], after
        return [S.LRepeat(body, invariant)], {**ac_body, x: ac[x]}

    def _branch_map(self, ch: S.GChoice, branch: S.Branch, ac: ActiveMap) -> ActiveMap:
        out = dict(ac)
        if ch.chooser in ac:
            entry = ac[ch.chooser]
            out[ch.chooser] = ActiveEntry(
                F.conj(entry.post, weaken(branch.post, ch.chooser)), entry.method, entry.cid
            )
        for r in branch.reactions:
            if r.obj in ac:
                entry = out[r.obj]
                out[r.obj] = ActiveEntry(F.conj(entry.post, weaken(r.post, r.obj)), entry.method, entry.cid)
        return out

    def _choice(self, ch: S.GChoice, ac: ActiveMap) -> List[S.LItem]:
        x = self.obj
        reactors = [tuple(r.obj for r in b.reactions) for b in ch.branches]
        all_act = (
            ch.chooser in ac
            and all(o in ac for rs in reactors for o in rs)
            and all(rs == reactors[0] for rs in reactors)
        )
        projected = []
        for b in ch.branches:
            items, _ = self.sequence(b.body, self._branch_map(ch, b, ac))
            projected.append(S.normalize(tuple(items)))

        if x == ch.chooser:
            if not all_act:
                raise ProjectionUndefined(RULE_BRANCH, describe(ch), "not all choosing and reacting objects are active")
            return [S.Select(tuple(projected))]
        if any(x in rs for rs in reactors):
            if not all_act:
                raise ProjectionUndefined(RULE_BRANCH, describe(ch), "not all choosing and reacting objects are active")
            source = (ch.chooser, ac[ch.chooser].method)
            branches = tuple(S.OfferBranch(weaken(b.post, x), t) for b, t in zip(ch.branches, projected))
            return [S.Offer(source, branches)]
        if x not in ac:
            if all(types_equal(t, projected[0]) for t in projected):
                return list(projected[0])
            acting = [t for t in projected if not is_skip(t)]
            if len(acting) == 1:
                return list(acting[0])
        raise ProjectionUndefined(RULE_BRANCH, describe(ch), f"{x} behaves differently across branches")


def project_on_object(g: S.GlobalType, obj: str, validity: Callable = check_validity) -> S.LocalType:
    """
    Object type of obj under g.

    Raises:
        ProjectionUndefined: if no projection rule applies somewhere in g
    """
    return ObjectProjector(obj, validity).project(g)
