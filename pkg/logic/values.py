"""
Runtime values shared by the interpreter, the formula evaluator and the
validity checker's models.

Lists are tuples of ints (Nil is the empty tuple). Python's bool is an int
subclass, so value comparison always goes through values_equal.
"""

from dataclasses import dataclass
from typing import Union


@dataclass(frozen=True, order=True)
class Future:
    id: int

    def __str__(self) -> str:
        return f"f{self.id}"


@dataclass(frozen=True, order=True)
class ObjectRef:
    name: str

    def __str__(self) -> str:
        return self.name


class _Unit:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "unit"

    def __reduce__(self):
        return (_Unit, ())


UNIT = _Unit()
NIL: tuple = ()

Value = Union[int, bool, tuple, Future, ObjectRef, _Unit]


def sort_of(value: Value) -> str:
    if isinstance(value, bool):
        return "Bool"
    if isinstance(value, int):
        return "Int"
    if isinstance(value, tuple):
        return "List"
    if isinstance(value, Future):
        return "Fut"
    if isinstance(value, ObjectRef):
        return "Obj"
    return "Unit"


def values_equal(a: Value, b: Value) -> bool:
    return sort_of(a) == sort_of(b) and a == b


def show_value(value: Value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        if not value:
            return "Nil"
        text = "Nil"
        for item in reversed(value):
            text = f"cons({item}, {text})"
        return text
    return str(value)


def value_to_json(value: Value):
    """JSON-friendly encoding used by trace serialization."""
    if isinstance(value, bool) or isinstance(value, int):
        return value
    if isinstance(value, tuple):
        return {"list": list(value)}
    if isinstance(value, Future):
        return {"future": value.id}
    if isinstance(value, ObjectRef):
        return {"object": value.name}
    return {"unit": True}


def value_from_json(data) -> Value:
    if isinstance(data, (bool, int)):
        return data
    if "list" in data:
        return tuple(data["list"])
    if "future" in data:
        return Future(data["future"])
    if "object" in data:
        return ObjectRef(data["object"])
    return UNIT
