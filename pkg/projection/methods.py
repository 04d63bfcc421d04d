"""
Projection of object types onto methods.

An object type is cut wherever one process ends (Put) and the next one
starts (Receive). A repetition the object enters without an active process
contains whole processes and disappears from their method types; a
repetition entered by a running process stays inside that process's type.
For a passive choice the Read that resolves the chooser's future is moved
in front of the choice, since the program must read before it branches.
"""

import itertools
from dataclasses import dataclass, replace
from typing import Callable, Dict, List, Optional, Tuple

from logic import formulas as F
from logic.validity import Valid, check_validity
from projection.objects import canonical
from syntax import session_types as S
from utils.errors import ProjectionUndefined

RULE_METHOD = "method projection"
RULE_OFFER = "method projection offer rule"


@dataclass
class _Open:
    """A process that has started but not terminated yet."""
    name: str
    acc: Tuple[S.LItem, ...]
    capture: Optional[list] = None


State = Optional[_Open]


class MethodSplitter:
    def __init__(self, validity: Callable = check_validity):
        self.validity = validity
        self.types: List[Tuple[str, Tuple[S.LItem, ...]]] = []

    def split(self, items: Tuple[S.LItem, ...]) -> List[Tuple[str, Tuple[S.LItem, ...]]]:
        finals = self._run(S.normalize(tuple(items)), [None])
        for state in finals:
            if state is not None:
                raise ProjectionUndefined(RULE_METHOD, f"{state.name}?", "the process never terminates")
        return self.types

    def _run(self, items, states: List[State]) -> List[State]:
        for item in items:
            states = [nxt for s in states for nxt in self._item(item, s)]
        return states

    def _close(self, state: _Open, items: Tuple[S.LItem, ...]) -> None:
        if state.capture is not None:
            state.capture.append(items)
        else:
            self.types.append((state.name, items))

    def _require(self, state: State, item) -> _Open:
        if state is None:
            raise ProjectionUndefined(RULE_METHOD, type(item).__name__, "no process is active here")
        return state

    def _item(self, item: S.LItem, state: State) -> List[State]:
        if isinstance(item, S.Receive):
            if state is not None:
                raise ProjectionUndefined(
                    RULE_METHOD, f"{item.method}?", f"{state.name} is still active"
                )
            return [_Open(item.method, (item,))]
        if isinstance(item, S.Put):
            state = self._require(state, item)
            self._close(state, state.acc + (item,))
            return [None]
        if isinstance(item, (S.Send, S.LRead)):
            state = self._require(state, item)
            return [replace(state, acc=state.acc + (item,))]
        if isinstance(item, S.LEnd):
            if state is not None:
                raise ProjectionUndefined(RULE_METHOD, f"{state.name}?", "the type ends inside a process")
            return [None]
        if isinstance(item, S.LRepeat):
            return [self._repeat(item, state)]
        if isinstance(item, S.Select):
            return [self._select(item, self._require(state, item))]
        if isinstance(item, S.Offer):
            return [self._offer(item, self._require(state, item))]
        return [state]

    def _repeat(self, item: S.LRepeat, state: State) -> State:
        if state is None:
            for final in self._run(item.body, [None]):
                if final is not None:
                    raise ProjectionUndefined(
                        RULE_METHOD, f"{final.name}?", "a process started in a repetition outlives it"
                    )
            return None
        finals = self._run(item.body, [_Open(state.name, (), capture=[])])
        if len(finals) != 1 or finals[0] is None:
            raise ProjectionUndefined(
                RULE_METHOD, f"{state.name}?", "a process active at a repetition ends inside it"
            )
        body = finals[0].acc
        return replace(state, acc=state.acc + (S.LRepeat(body, item.invariant, item.origin),))

    def _segments(self, state: _Open, bodies) -> List[Tuple[S.LItem, ...]]:
        segments = []
        for body in bodies:
            capture: list = []
            for final in self._run(body, [_Open(state.name, (), capture)]):
                if final is not None:
                    raise ProjectionUndefined(RULE_METHOD, f"{final.name}?", "a branch ends inside a process")
            if len(capture) != 1:
                raise ProjectionUndefined(RULE_METHOD, f"{state.name}?", "a branch does not end the active process")
            segments.append(capture[0])
        return segments

    def _select(self, item: S.Select, state: _Open) -> State:
        segments = self._segments(state, item.branches)
        self._close(state, state.acc + (S.Select(tuple(segments), item.origin),))
        return None

    def _offer(self, item: S.Offer, state: _Open) -> State:
        segments = self._segments(state, [b.body for b in item.branches])
        where = f"{state.name}? offer from {item.source[0]}.{item.source[1]}"
        heads = [seg[0] if seg else None for seg in segments]
        if not all(isinstance(h, S.LRead) for h in heads) or len({h.expr for h in heads}) != 1:
            raise ProjectionUndefined(RULE_OFFER, where, "branches do not all start with the same Read")
        guards = [b.guard for b in item.branches]
        for a, b in itertools.combinations(guards, 2):
            if not isinstance(self.validity(F.neg(F.conj(a, b))), Valid):
                raise ProjectionUndefined(RULE_OFFER, where, "branch guards are not distinguishable")
        offer = S.Offer(
            item.source,
            tuple(S.OfferBranch(g, seg[1:]) for g, seg in zip(guards, segments)),
            item.origin,
        )
        self._close(state, state.acc + (heads[0], offer))
        return None


def _dedupe(types: List[Tuple[S.LItem, ...]]) -> List[S.LocalType]:
    out, seen = [], set()
    for items in types:
        key = canonical(items)
        if key not in seen:
            seen.add(key)
            out.append(S.LocalType(items))
    return out


def method_types(local: S.LocalType, validity: Callable = check_validity) -> Dict[str, List[S.LocalType]]:
    """All method types of an object type, grouped by method in order of appearance."""
    grouped: Dict[str, List[Tuple[S.LItem, ...]]] = {}
    for name, items in MethodSplitter(validity).split(local.items):
        grouped.setdefault(name, []).append(items)
    return {name: _dedupe(types) for name, types in grouped.items()}


def project_on_method(local: S.LocalType, method: str, validity: Callable = check_validity) -> List[S.LocalType]:
    """
    The method types of `method` in an object type.

    Raises:
        ProjectionUndefined: if the object type cannot be cut into processes
    """
    return method_types(local, validity).get(method, [])


def segments_in_order(local: S.LocalType, validity: Callable = check_validity) -> List[Tuple[str, S.LocalType]]:
    """Method types in object-type order, one entry per process occurrence."""
    return [(name, S.LocalType(items)) for name, items in MethodSplitter(validity).split(local.items)]
