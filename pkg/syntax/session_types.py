"""
Global protocol and local (object / method) type ASTs.

A sequence of items is a tuple. Global sequences end in End or in a
Choice, whose branches carry their own continuations. Call ids on global
calls and origin ids on local items are bookkeeping for the causality
graph; they never take part in equality.
"""

from dataclasses import dataclass, field
from typing import FrozenSet, Optional, Tuple, Union

from logic.formulas import Formula, Term, TOP


# ----------------------------------
# Global types
# ----------------------------------

@dataclass(frozen=True)
class MainCallType:
    callee: str
    method: str
    post: Formula
    cid: int = field(default=0, compare=False)


@dataclass(frozen=True)
class GCall:
    caller: str
    callee: str
    method: str
    pre: Formula = TOP
    post: Formula = TOP
    loc: Optional[str] = None
    cid: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class GRead:
    obj: str
    expr: Term


@dataclass(frozen=True)
class GRepeat:
    body: Tuple["GItem", ...]
    invariant: Formula


@dataclass(frozen=True)
class Reaction:
    obj: str
    post: Formula


@dataclass(frozen=True)
class Branch:
    post: Formula
    reactions: Tuple[Reaction, ...]
    body: Tuple["GItem", ...]


@dataclass(frozen=True)
class GChoice:
    chooser: str
    branches: Tuple[Branch, ...]


@dataclass(frozen=True)
class GEnd:
    pass


GItem = Union[GCall, GRead, GRepeat, GChoice, GEnd]


@dataclass(frozen=True)
class GlobalType:
    main: MainCallType
    body: Tuple[GItem, ...]


def global_items(items: Tuple[GItem, ...]):
    """Pre-order walk over all global items, entering repeat and branch bodies."""
    for item in items:
        yield item
        if isinstance(item, GRepeat):
            yield from global_items(item.body)
        elif isinstance(item, GChoice):
            for b in item.branches:
                yield from global_items(b.body)


def roles(g: GlobalType) -> FrozenSet[str]:
    out = {g.main.callee}
    for item in global_items(g.body):
        if isinstance(item, GCall):
            out |= {item.caller, item.callee}
        elif isinstance(item, GRead):
            out.add(item.obj)
        elif isinstance(item, GChoice):
            out.add(item.chooser)
            for b in item.branches:
                out |= {r.obj for r in b.reactions}
    return frozenset(out)


def calls_of(g: GlobalType):
    yield g.main
    for item in global_items(g.body):
        if isinstance(item, GCall):
            yield item


# ----------------------------------
# Local types
# ----------------------------------

Origin = Optional[Tuple[str, int]]


@dataclass(frozen=True)
class Receive:
    method: str
    pre: Formula
    calls: FrozenSet[int] = field(default=frozenset(), compare=False)
    origin: Origin = field(default=None, compare=False)


@dataclass(frozen=True)
class Send:
    callee: str
    method: str
    pre: Formula
    loc: Optional[str] = None
    calls: FrozenSet[int] = field(default=frozenset(), compare=False)
    origin: Origin = field(default=None, compare=False)


@dataclass(frozen=True)
class Put:
    post: Formula
    origin: Origin = field(default=None, compare=False)


@dataclass(frozen=True)
class LRead:
    expr: Term
    origin: Origin = field(default=None, compare=False)


@dataclass(frozen=True)
class LSkip:
    pass


@dataclass(frozen=True)
class LRepeat:
    body: Tuple["LItem", ...]
    invariant: Formula
    origin: Origin = field(default=None, compare=False)


@dataclass(frozen=True)
class Select:
    branches: Tuple[Tuple["LItem", ...], ...]
    origin: Origin = field(default=None, compare=False)


@dataclass(frozen=True)
class OfferBranch:
    guard: Formula
    body: Tuple["LItem", ...]


@dataclass(frozen=True)
class Offer:
    source: Tuple[str, str]
    branches: Tuple[OfferBranch, ...]
    origin: Origin = field(default=None, compare=False)


@dataclass(frozen=True)
class LEnd:
    pass


LItem = Union[Receive, Send, Put, LRead, LSkip, LRepeat, Select, Offer, LEnd]


@dataclass(frozen=True)
class LocalType:
    items: Tuple[LItem, ...]

    def __iter__(self):
        return iter(self.items)

    def __len__(self) -> int:
        return len(self.items)


def local_items(items: Tuple[LItem, ...]):
    """Pre-order walk over local items, entering repeat and branch bodies."""
    for item in items:
        yield item
        if isinstance(item, LRepeat):
            yield from local_items(item.body)
        elif isinstance(item, Select):
            for b in item.branches:
                yield from local_items(b)
        elif isinstance(item, Offer):
            for b in item.branches:
                yield from local_items(b.body)


def normalize(items: Tuple[LItem, ...]) -> Tuple[LItem, ...]:
    """Drop skips everywhere (skip.T == T) and everything after an End."""
    out = []
    for item in items:
        if isinstance(item, LSkip):
            continue
        if isinstance(item, LRepeat):
            item = LRepeat(normalize(item.body), item.invariant, item.origin)
        elif isinstance(item, Select):
            item = Select(tuple(normalize(b) for b in item.branches), item.origin)
        elif isinstance(item, Offer):
            item = Offer(
                item.source,
                tuple(OfferBranch(b.guard, normalize(b.body)) for b in item.branches),
                item.origin,
            )
        out.append(item)
        if isinstance(item, LEnd):
            break
    return tuple(out)
