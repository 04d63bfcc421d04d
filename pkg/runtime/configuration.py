"""
Runtime configurations.

A configuration is a set of objects (each with a heap and at most one
active future) and a set of processes, one per future. Configurations are
immutable; every step builds a new one, so a trace can keep every
intermediate configuration without copying.
"""

from dataclasses import dataclass, field, replace
from typing import Dict, Mapping, Optional, Tuple

from logic.evaluation import EvalContext
from logic.values import Future, Value, sort_of, value_from_json, value_to_json
from syntax import program_ast as A


@dataclass(frozen=True)
class ObjectState:
    name: str
    heap: Mapping[str, Value] = field(default_factory=dict)
    active: Optional[Future] = None

    def with_field(self, name: str, value: Value) -> "ObjectState":
        return replace(self, heap={**self.heap, name: value})


@dataclass(frozen=True)
class Process:
    """
    One method activation.

    `stmts` is the continuation still to execute. A finished process keeps
    its final store and its return value; `finished` orders terminations.
    """
    obj: str
    future: Future
    method: str
    stmts: Tuple[A.Stmt, ...] = ()
    store: Mapping[str, Value] = field(default_factory=dict)
    started: bool = False
    done: bool = False
    value: Optional[Value] = None
    finished: int = -1
    iterations: int = 0

    def with_local(self, name: str, value: Value) -> "Process":
        return replace(self, store={**self.store, name: value})


@dataclass(frozen=True)
class Frame:
    """
    Which store a formula sees.

    Args:
        obj: object `self` stands for
        proc: future of the process whose store is visible
        overlay: future of a process whose store is laid over it (calls)
        result: value of `result`
    """
    obj: Optional[str] = None
    proc: Optional[Future] = None
    overlay: Optional[Future] = None
    result: Optional[Value] = None


@dataclass(frozen=True)
class Configuration:
    objects: Tuple[ObjectState, ...]
    processes: Tuple[Process, ...] = ()
    next_future: int = 0
    clock: int = 0

    # ----------------------------------
    # Lookup
    # ----------------------------------

    def object(self, name: str) -> ObjectState:
        for o in self.objects:
            if o.name == name:
                return o
        raise KeyError(name)

    def process(self, future: Future) -> Optional[Process]:
        for p in self.processes:
            if p.future == future:
                return p
        return None

    def resolved(self, future: Future) -> Optional[Value]:
        p = self.process(future)
        if p is not None and p.done:
            return p.value
        return None

    def active_process(self, obj: str) -> Optional[Process]:
        active = self.object(obj).active
        return self.process(active) if active is not None else None

    @property
    def terminated(self) -> bool:
        return all(p.done for p in self.processes)

    # ----------------------------------
    # Update
    # ----------------------------------

    def with_object(self, state: ObjectState) -> "Configuration":
        return replace(self, objects=tuple(state if o.name == state.name else o for o in self.objects))

    def with_process(self, proc: Process) -> "Configuration":
        if self.process(proc.future) is None:
            return replace(self, processes=self.processes + (proc,))
        return replace(self, processes=tuple(proc if p.future == proc.future else p for p in self.processes))

    def fresh_future(self) -> Tuple[Future, "Configuration"]:
        return Future(self.next_future), replace(self, next_future=self.next_future + 1)

    # ----------------------------------
    # Formula evaluation
    # ----------------------------------

    def _visible_store(self, obj: str) -> Mapping[str, Value]:
        proc = self.active_process(obj)
        if proc is not None:
            return proc.store
        finished = [p for p in self.processes if p.obj == obj and p.done]
        if finished:
            return max(finished, key=lambda p: p.finished).store
        return {}

    def values(self):
        for o in self.objects:
            yield from o.heap.values()
        for p in self.processes:
            yield from p.store.values()
            if p.done:
                yield p.value

    def eval_context(self, frame: Optional[Frame] = None) -> EvalContext:
        frame = frame or Frame()
        store: Dict[str, Value] = {}
        for fut in (frame.proc, frame.overlay):
            proc = self.process(fut) if fut is not None else None
            if proc is not None:
                store.update(proc.store)
        ints, lists = set(), set()
        for v in self.values():
            kind = sort_of(v)
            if kind == "Int":
                ints.add(v)
            elif kind == "List":
                lists.add(v)
                ints.update(v)
        return EvalContext(
            heaps={o.name: o.heap for o in self.objects},
            store=store,
            self_obj=frame.obj,
            result=frame.result,
            local_stores={o.name: self._visible_store(o.name) for o in self.objects},
            ints=tuple(sorted(ints)),
            futures=tuple(p.future for p in self.processes),
            lists=tuple(sorted(lists)),
        )


# ----------------------------------
# JSON
# ----------------------------------

def _store_json(store: Mapping[str, Value]) -> dict:
    return {k: value_to_json(v) for k, v in sorted(store.items())}


def _store_from(data: dict) -> Dict[str, Value]:
    return {k: value_from_json(v) for k, v in data.items()}


def config_to_json(cfg: Configuration) -> dict:
    """Objects and processes; continuations are not serialized."""
    return {
        "objects": [
            {"name": o.name, "active": o.active.id if o.active else None, "heap": _store_json(o.heap)}
            for o in cfg.objects
        ],
        "processes": [
            {
                "object": p.obj,
                "future": p.future.id,
                "method": p.method,
                "status": "done" if p.done else ("running" if p.started else "pending"),
                "value": value_to_json(p.value) if p.done else None,
                "store": _store_json(p.store),
                "finished": p.finished,
            }
            for p in cfg.processes
        ],
        "next_future": cfg.next_future,
        "clock": cfg.clock,
    }


def config_from_json(data: dict) -> Configuration:
    objects = tuple(
        ObjectState(
            o["name"],
            _store_from(o["heap"]),
            Future(o["active"]) if o.get("active") is not None else None,
        )
        for o in data["objects"]
    )
    processes = tuple(
        Process(
            obj=p["object"],
            future=Future(p["future"]),
            method=p["method"],
            store=_store_from(p["store"]),
            started=p["status"] != "pending",
            done=p["status"] == "done",
            value=value_from_json(p["value"]) if p["status"] == "done" else None,
            finished=p.get("finished", -1),
        )
        for p in data["processes"]
    )
    return Configuration(objects, processes, data.get("next_future", 0), data.get("clock", 0))
