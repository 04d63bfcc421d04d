"""
Observable events of a run.

Every event records `proc`, the future of the process that issued it, so
the configuration it is paired with can be evaluated in the right store.
`proc` and the fetch `site` are bookkeeping and take no part in equality.
"""

from dataclasses import dataclass, field
from typing import Optional, Tuple

from logic.values import Future, Value, value_from_json, value_to_json


@dataclass(frozen=True)
class Invocation:
    caller: str
    callee: str
    future: Future
    method: str
    args: Tuple[Value, ...] = ()
    proc: Optional[Future] = field(default=None, compare=False)
    tag = "iEv"

    @property
    def obj(self) -> str:
        return self.caller


@dataclass(frozen=True)
class InvocationReaction:
    obj: str
    future: Future
    method: str
    proc: Optional[Future] = field(default=None, compare=False)
    tag = "iREv"


@dataclass(frozen=True)
class Resolving:
    obj: str
    future: Future
    method: str
    value: Value
    proc: Optional[Future] = field(default=None, compare=False)
    tag = "fEv"


@dataclass(frozen=True)
class Fetch:
    obj: str
    future: Future
    value: Value
    proc: Optional[Future] = field(default=None, compare=False)
    site: Optional[Tuple[str, str, int]] = field(default=None, compare=False)
    tag = "fREv"


@dataclass(frozen=True)
class NoEvent:
    tag = "noEv"


NO_EVENT = NoEvent()

Event = (Invocation, InvocationReaction, Resolving, Fetch)


def show_event(ev) -> str:
    if isinstance(ev, Invocation):
        args = ", ".join(str(a) for a in ev.args)
        return f"iEv({ev.caller}, {ev.callee}, {ev.future}, {ev.method}, [{args}])"
    if isinstance(ev, InvocationReaction):
        return f"iREv({ev.obj}, {ev.future}, {ev.method})"
    if isinstance(ev, Resolving):
        return f"fEv({ev.obj}, {ev.future}, {ev.method}, {ev.value})"
    if isinstance(ev, Fetch):
        return f"fREv({ev.obj}, {ev.future}, {ev.value})"
    return "noEv"


def _fut(f: Optional[Future]):
    return f.id if f is not None else None


def event_to_json(ev) -> dict:
    data = {"tag": ev.tag}
    if isinstance(ev, Invocation):
        data.update(caller=ev.caller, callee=ev.callee, future=ev.future.id, method=ev.method,
                    args=[value_to_json(a) for a in ev.args])
    elif isinstance(ev, InvocationReaction):
        data.update(object=ev.obj, future=ev.future.id, method=ev.method)
    elif isinstance(ev, Resolving):
        data.update(object=ev.obj, future=ev.future.id, method=ev.method, value=value_to_json(ev.value))
    elif isinstance(ev, Fetch):
        data.update(object=ev.obj, future=ev.future.id, value=value_to_json(ev.value))
        data["site"] = list(ev.site) if ev.site is not None else None
    data["proc"] = _fut(getattr(ev, "proc", None))
    return data


def event_from_json(data: dict):
    tag = data["tag"]
    proc = Future(data["proc"]) if data.get("proc") is not None else None
    if tag == "iEv":
        return Invocation(data["caller"], data["callee"], Future(data["future"]), data["method"],
                          tuple(value_from_json(a) for a in data.get("args", [])), proc)
    if tag == "iREv":
        return InvocationReaction(data["object"], Future(data["future"]), data["method"], proc)
    if tag == "fEv":
        return Resolving(data["object"], Future(data["future"]), data["method"],
                         value_from_json(data["value"]), proc)
    if tag == "fREv":
        site = tuple(data["site"]) if data.get("site") is not None else None
        return Fetch(data["object"], Future(data["future"]), value_from_json(data["value"]), proc, site)
    raise ValueError(f"unknown event tag '{tag}'")
