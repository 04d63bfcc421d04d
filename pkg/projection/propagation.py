"""
Propagation of guarantees along an object type.

Between two processes of an object nothing touches its heap, so what the
first process guarantees on termination still holds when the next one
starts. Loop invariants hold before the first iteration, after the last,
and around every iteration.
"""

from dataclasses import replace
from typing import List, Tuple

from logic import formulas as F
from logic.weakening import at_heap
from projection.objects import canonical
from syntax import session_types as S

MAX_ROUNDS = 32


class Propagator:
    def __init__(self, obj: str):
        self.obj = obj

    def run(self, items: Tuple[S.LItem, ...]) -> Tuple[S.LItem, ...]:
        current = S.normalize(tuple(items))
        for _ in range(MAX_ROUNDS):
            nxt = self.step(current)
            if canonical(nxt) == canonical(current):
                return nxt
            current = nxt
        return current

    def step(self, items: Tuple[S.LItem, ...]) -> Tuple[S.LItem, ...]:
        seq: List[S.LItem] = [self._nested(i) for i in S.normalize(items)]

        # repeat . repeat: the first invariant gains the second
        for k in range(len(seq) - 2, -1, -1):
            a, b = seq[k], seq[k + 1]
            if isinstance(a, S.LRepeat) and isinstance(b, S.LRepeat):
                seq[k] = replace(a, invariant=F.conj(a.invariant, b.invariant))

        for k in range(len(seq) - 1):
            a, b = seq[k], seq[k + 1]
            if isinstance(a, S.Put) and isinstance(b, S.LRepeat):
                seq[k] = replace(a, post=F.conj(a.post, b.invariant))
            elif isinstance(a, S.LRepeat) and isinstance(b, S.Receive):
                seq[k + 1] = replace(b, pre=F.conj(b.pre, a.invariant))

        for k in range(len(seq) - 1):
            a, b = seq[k], seq[k + 1]
            if isinstance(a, S.Put) and isinstance(b, S.Receive):
                seq[k + 1] = replace(b, pre=F.conj(b.pre, at_heap(a.post, self.obj)))
        return tuple(seq)

    def _nested(self, item: S.LItem) -> S.LItem:
        if isinstance(item, S.LRepeat):
            body = list(self.step(item.body))
            inv = item.invariant
            if body and isinstance(body[0], S.Receive) and isinstance(body[-1], S.Put):
                body[0] = replace(body[0], pre=F.conj(body[0].pre, inv))
                body[-1] = replace(body[-1], post=F.conj(body[-1].post, inv))
            return replace(item, body=tuple(body))
        if isinstance(item, S.Select):
            return replace(item, branches=tuple(self.step(b) for b in item.branches))
        if isinstance(item, S.Offer):
            return replace(item, branches=tuple(
                S.OfferBranch(b.guard, self.step(b.body)) for b in item.branches))
        return item


def propagate(local: S.LocalType, obj: str) -> S.LocalType:
    """Fixpoint of the propagation rules on the object type of obj."""
    return S.LocalType(Propagator(obj).run(local.items))


def number_items(local: S.LocalType, obj: str) -> S.LocalType:
    """Give every item a stable origin (obj, ordinal) in pre-order."""
    counter = iter(range(1 << 30))

    def go(items):
        out = []
        for item in items:
            origin = (obj, next(counter))
            if isinstance(item, S.LRepeat):
                item = replace(item, body=go(item.body), origin=origin)
            elif isinstance(item, S.Select):
                item = replace(item, branches=tuple(go(b) for b in item.branches), origin=origin)
            elif isinstance(item, S.Offer):
                item = replace(item, branches=tuple(
                    S.OfferBranch(b.guard, go(b.body)) for b in item.branches), origin=origin)
            elif hasattr(item, "origin"):
                item = replace(item, origin=origin)
            out.append(item)
        return tuple(out)

    return S.LocalType(go(local.items))
