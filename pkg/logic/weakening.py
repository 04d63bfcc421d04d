"""
Weakening of formulas to a single object's view of the heap.

weaken(phi, X) replaces every field of an object other than X by a fresh
existentially quantified variable; the result talks about X's heap only.
Bare program variables (method parameters, locals) are shared between
caller and callee and are left alone.
"""

from typing import Callable, Dict, List, Optional, Tuple

from logic import formulas as F

_INT_FUNCTIONS = ("+", "-", "*", "neg")


def infer_sort(t: F.Term, phi: F.Formula) -> Optional[str]:
    """Best-effort sort of a term from the way phi uses it."""
    for sub in _atoms(phi):
        if isinstance(sub, (F.Geq, F.Gt)) and _occurs_in(t, (sub.left, sub.right)):
            return "Int"
        if isinstance(sub, F.Eq):
            for side, other in ((sub.left, sub.right), (sub.right, sub.left)):
                if side == t:
                    sort = F.term_sort(other)
                    if sort is not None:
                        return sort
        for term in F.atom_terms(sub):
            sort = _context_sort(t, term)
            if sort is not None:
                return sort
    return None


def _occurs_in(t: F.Term, terms) -> bool:
    return any(t == s for term in terms for s in F.subterms(term))


def _context_sort(t: F.Term, term: F.Term) -> Optional[str]:
    for s in F.subterms(term):
        if not isinstance(s, F.Fn):
            continue
        for i, a in enumerate(s.args):
            if a != t:
                continue
            if s.symbol in _INT_FUNCTIONS:
                return "Int"
            if s.symbol in ("head", "tail", "length"):
                return "List"
            if s.symbol == "cons":
                return "Int" if i == 0 else "List"
    return None


def _atoms(phi: F.Formula):
    if isinstance(phi, F.ATOMS):
        yield phi
    elif isinstance(phi, F.Not):
        yield from _atoms(phi.body)
    elif isinstance(phi, (F.And, F.Or)):
        yield from _atoms(phi.left)
        yield from _atoms(phi.right)
    elif isinstance(phi, (F.Exists, F.Modal)):
        yield from _atoms(phi.body)


def close_terms(phi: F.Formula, selected: Callable[[F.Term], bool]) -> F.Formula:
    """
    Existentially close every term occurrence for which `selected` holds.

    Each distinct term becomes one fresh variable named after it, placed in
    front of the formula in order of first occurrence.
    """
    chosen: List[F.Term] = []
    bound_names = set()
    for sub in F.subformulas(phi):
        if isinstance(sub, F.Exists):
            bound_names.add(sub.var)
    for t in F.all_terms(phi):
        if isinstance(t, F.Var) and t.logical and t.name in bound_names:
            continue
        if t not in chosen and selected(t):
            chosen.append(t)
    if not chosen:
        return phi
    taken = F.used_names(phi)
    mapping: Dict[F.Term, F.Term] = {}
    binders: List[Tuple[Optional[str], str]] = []
    for t in chosen:
        name = F.fresh_name(_base_name(t), taken)
        taken.add(name)
        mapping[t] = F.Var(name, True)
        binders.append((infer_sort(t, phi), name))
    return F.exists_many(binders, F.substitute(phi, mapping))


def _base_name(t: F.Term) -> str:
    if isinstance(t, F.FieldSelect):
        return t.field
    if isinstance(t, F.Var):
        return t.name
    if isinstance(t, F.Result):
        return "r"
    return "v"


def _foreign(obj: str):
    def selected(t: F.Term) -> bool:
        return isinstance(t, F.FieldSelect) and t.owner not in (obj, "self")
    return selected


def weaken(phi: F.Formula, obj: str) -> F.Formula:
    """phi restricted to obj: foreign fields become existential variables."""
    return close_terms(phi, _foreign(obj))


def is_object_formula(phi: F.Formula, obj: str) -> bool:
    return F.alpha_equal(phi, weaken(phi, obj))


def at_heap(phi: F.Formula, obj: str) -> F.Formula:
    """
    The heap facts of phi that survive the end of a process on obj:
    foreign fields, `result` and program variables are all closed.
    """
    def selected(t: F.Term) -> bool:
        if isinstance(t, F.FieldSelect):
            return t.owner not in (obj, "self")
        if isinstance(t, F.Var):
            return not t.logical
        return isinstance(t, F.Result)
    return close_terms(phi, selected)


def result_facts(phi: F.Formula) -> F.Formula:
    """What a postcondition says about the returned value alone."""
    def selected(t: F.Term) -> bool:
        if isinstance(t, F.FieldSelect):
            return True
        return isinstance(t, F.Var) and not t.logical
    return close_terms(phi, selected)
