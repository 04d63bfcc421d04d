"""
The projection pipeline and the well-formedness check.

project_all runs the three projection steps for every role of a protocol;
well_formed runs the same steps but reports every failure instead of
stopping at the first one, and checks that the method types of one method
have pairwise non-overlapping preconditions.
"""

import itertools
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Tuple

from logic import formulas as F
from logic.validity import NotValid, Unknown, Valid, check_validity
from projection.methods import method_types, segments_in_order
from projection.objects import project_on_object
from projection.propagation import number_items, propagate
from syntax import session_types as S
from syntax.pretty import pretty_formula
from utils.errors import ProjectionUndefined
from utils.reporting import Report

STAGE = "Projection"
RULE_DIST = "distinguishability"
RULE_SHAPE = "object type shape"


@dataclass
class Projection:
    """All local types derived from one global type."""
    global_type: S.GlobalType
    objects: Dict[str, S.LocalType] = field(default_factory=dict)
    propagated: Dict[str, S.LocalType] = field(default_factory=dict)
    methods: Dict[str, Dict[str, List[S.LocalType]]] = field(default_factory=dict)

    def method_types(self, obj: str, method: str) -> List[S.LocalType]:
        return self.methods.get(obj, {}).get(method, [])


def object_type(g: S.GlobalType, obj: str, validity: Callable = check_validity) -> S.LocalType:
    """prp*(G|X), with every item numbered for the causality graph."""
    return number_items(propagate(project_on_object(g, obj, validity), obj), obj)


def _check_shape(obj: str, local: S.LocalType) -> None:
    first = local.items[0] if local.items else S.LEnd()
    if not isinstance(first, (S.Receive, S.LEnd)):
        raise ProjectionUndefined(RULE_SHAPE, obj, "an object type must begin with a Receive")


def project_all(g: S.GlobalType, validity: Callable = check_validity) -> Projection:
    """
    Object, propagated and method types of every role.

    Raises:
        ProjectionUndefined: at the first failing step
    """
    out = Projection(g)
    for obj in sorted(S.roles(g)):
        out.objects[obj] = project_on_object(g, obj, validity)
        out.propagated[obj] = number_items(propagate(out.objects[obj], obj), obj)
        _check_shape(obj, out.propagated[obj])
        out.methods[obj] = method_types(out.propagated[obj], validity)
    return out


def _first_pre(local: S.LocalType) -> F.Formula:
    first = local.items[0]
    return first.pre if isinstance(first, S.Receive) else F.TOP


def _check_distinguishable(obj: str, local: S.LocalType, report: Report, validity: Callable) -> None:
    by_method: Dict[str, List[S.LocalType]] = {}
    for name, t in segments_in_order(local, validity):
        by_method.setdefault(name, []).append(t)
    for name, types in by_method.items():
        for (i, a), (j, b) in itertools.combinations(enumerate(types), 2):
            claim = F.neg(F.conj(_first_pre(a), _first_pre(b)))
            verdict = validity(claim)
            if isinstance(verdict, Valid):
                continue
            report.fail(
                STAGE, RULE_DIST,
                f"method types {i + 1} and {j + 1} of {obj}.{name} have overlapping preconditions",
                location=f"{obj}.{name}",
                formula=pretty_formula(claim),
                counterexample=verdict.counterexample if isinstance(verdict, NotValid) else None,
                unknown=isinstance(verdict, Unknown),
            )


def well_formed(g: S.GlobalType, validity: Callable = check_validity) -> Report:
    report = Report()
    for obj in sorted(S.roles(g)):
        try:
            local = object_type(g, obj, validity)
            _check_shape(obj, local)
            method_types(local, validity)
        except ProjectionUndefined as exc:
            report.add_error(STAGE, exc)
            continue
        _check_distinguishable(obj, local, report, validity)
    return report


def reassemble(segments: List[Tuple[str, S.LocalType]]) -> Tuple[S.LItem, ...]:
    """
    Concatenation of method types in object-type order, closed by the end the
    splitting drops (inverse of splitting linear types).
    """
    out: List[S.LItem] = []
    for _, t in segments:
        out.extend(t.items)
    if not out or not isinstance(out[-1], (S.LEnd, S.Select, S.Offer)):
        out.append(S.LEnd())
    return tuple(out)
