"""
Terms and formulas of the state logic.

Everything here is an immutable dataclass, so formulas hash, compare and
travel between threads freely. Structural equality is syntactic; use
alpha_equal when bound variable names should not matter.

Heap access is explicit: `X.f` is FieldSelect(heap, "X", "f") and a field
write becomes a Store around the heap term. The owner "self" stands for
the object a formula is evaluated on.
"""

from dataclasses import dataclass
from itertools import count
from typing import Dict, FrozenSet, Iterable, Optional, Set, Tuple, Union

from logic.values import UNIT, values_equal


# ----------------------------------
# Terms
# ----------------------------------

@dataclass(frozen=True)
class Var:
    """A program variable (local or parameter) or, when logical, a quantified one."""
    name: str
    logical: bool = False


@dataclass(frozen=True)
class Lit:
    value: object
    sort: str


@dataclass(frozen=True)
class Fn:
    symbol: str
    args: Tuple["Term", ...]


@dataclass(frozen=True)
class Heap:
    pass


@dataclass(frozen=True)
class FieldSelect:
    heap: "Term"
    owner: str
    field: str


@dataclass(frozen=True)
class Store:
    heap: "Term"
    field: str
    owner: str
    value: "Term"


@dataclass(frozen=True)
class Result:
    pass


@dataclass(frozen=True)
class SelfRef:
    pass


Term = Union[Var, Lit, Fn, Heap, FieldSelect, Store, Result, SelfRef]

HEAP = Heap()
RESULT = Result()
SELF = SelfRef()
TRUE_LIT = Lit(True, "Bool")
FALSE_LIT = Lit(False, "Bool")
NIL_LIT = Lit((), "List")
UNIT_LIT = Lit(UNIT, "Unit")

ARITHMETIC = ("+", "-", "*", "neg")
LIST_FUNCTIONS = ("cons", "head", "tail", "length")


def int_lit(value: int) -> Lit:
    return Lit(value, "Int")


def field(owner: str, name: str) -> FieldSelect:
    return FieldSelect(HEAP, owner, name)


# ----------------------------------
# Formulas
# ----------------------------------

@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Pred:
    name: str
    args: Tuple[Term, ...]


@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term


@dataclass(frozen=True)
class Geq:
    left: Term
    right: Term


@dataclass(frozen=True)
class Gt:
    left: Term
    right: Term


@dataclass(frozen=True)
class Exists:
    sort: Optional[str]
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Modal:
    """[stmts] body: body holds after running the statements."""
    stmts: tuple
    body: "Formula"


Formula = Union[Top, Not, Or, And, Pred, Eq, Geq, Gt, Exists, Modal]

TOP = Top()
BOTTOM = Not(TOP)

ATOMS = (Pred, Eq, Geq, Gt)


# ----------------------------------
# Smart constructors
# ----------------------------------

def conjuncts(phi: Formula) -> Tuple[Formula, ...]:
    if isinstance(phi, And):
        return conjuncts(phi.left) + conjuncts(phi.right)
    if phi == TOP:
        return ()
    return (phi,)


def disjuncts(phi: Formula) -> Tuple[Formula, ...]:
    if isinstance(phi, Or):
        return disjuncts(phi.left) + disjuncts(phi.right)
    if phi == BOTTOM:
        return ()
    return (phi,)


def conj(*parts: Formula) -> Formula:
    """Conjunction that drops top and repeats of alpha-equal conjuncts."""
    flat = []
    seen = set()
    for part in parts:
        for c in conjuncts(part):
            key = alpha_normalize(c)
            if key in seen:
                continue
            seen.add(key)
            flat.append(c)
    if not flat:
        return TOP
    result = flat[-1]
    for c in reversed(flat[:-1]):
        result = And(c, result)
    return result


def disj(*parts: Formula) -> Formula:
    flat = []
    seen = set()
    for part in parts:
        for d in disjuncts(part):
            if d == TOP:
                return TOP
            key = alpha_normalize(d)
            if key in seen:
                continue
            seen.add(key)
            flat.append(d)
    if not flat:
        return BOTTOM
    result = flat[-1]
    for d in reversed(flat[:-1]):
        result = Or(d, result)
    return result


def neg(phi: Formula) -> Formula:
    if isinstance(phi, Not):
        return phi.body
    return Not(phi)


def implies(antecedent: Formula, consequent: Formula) -> Formula:
    if antecedent == TOP:
        return consequent
    return disj(neg(antecedent), consequent)


def exists_many(binders: Iterable[Tuple[Optional[str], str]], body: Formula) -> Formula:
    binders = list(binders)
    for sort, name in reversed(binders):
        body = Exists(sort, name, body)
    return body


# ----------------------------------
# Traversal
# ----------------------------------

def term_vars(t: Term) -> Set[Var]:
    if isinstance(t, Var):
        return {t}
    if isinstance(t, Fn):
        out: Set[Var] = set()
        for a in t.args:
            out |= term_vars(a)
        return out
    if isinstance(t, FieldSelect):
        return term_vars(t.heap)
    if isinstance(t, Store):
        return term_vars(t.heap) | term_vars(t.value)
    return set()


def subterms(t: Term):
    yield t
    if isinstance(t, Fn):
        for a in t.args:
            yield from subterms(a)
    elif isinstance(t, FieldSelect):
        yield from subterms(t.heap)
    elif isinstance(t, Store):
        yield from subterms(t.heap)
        yield from subterms(t.value)


def atom_terms(phi: Formula) -> Tuple[Term, ...]:
    if isinstance(phi, Pred):
        return phi.args
    if isinstance(phi, (Eq, Geq, Gt)):
        return (phi.left, phi.right)
    return ()


def all_terms(phi: Formula):
    """Every term occurrence, bound variables included."""
    if isinstance(phi, ATOMS):
        for t in atom_terms(phi):
            yield from subterms(t)
    elif isinstance(phi, Not):
        yield from all_terms(phi.body)
    elif isinstance(phi, (And, Or)):
        yield from all_terms(phi.left)
        yield from all_terms(phi.right)
    elif isinstance(phi, (Exists, Modal)):
        yield from all_terms(phi.body)


def free_vars(phi: Formula) -> Set[Var]:
    if isinstance(phi, ATOMS):
        out: Set[Var] = set()
        for t in atom_terms(phi):
            out |= term_vars(t)
        return out
    if isinstance(phi, Not):
        return free_vars(phi.body)
    if isinstance(phi, (And, Or)):
        return free_vars(phi.left) | free_vars(phi.right)
    if isinstance(phi, Exists):
        return free_vars(phi.body) - {Var(phi.var, True)}
    if isinstance(phi, Modal):
        return free_vars(phi.body)
    return set()


def field_selects(phi: Formula) -> Set[FieldSelect]:
    return {t for t in all_terms(phi) if isinstance(t, FieldSelect)}


def owners(phi: Formula) -> FrozenSet[str]:
    return frozenset(t.owner for t in field_selects(phi))


def mentions_result(phi: Formula) -> bool:
    return any(isinstance(t, Result) for t in all_terms(phi))


def used_names(phi: Formula) -> Set[str]:
    names = {v.name for v in free_vars(phi)}
    names |= {t.field for t in field_selects(phi)}
    for sub in subformulas(phi):
        if isinstance(sub, Exists):
            names.add(sub.var)
    return names


def subformulas(phi: Formula):
    yield phi
    if isinstance(phi, Not):
        yield from subformulas(phi.body)
    elif isinstance(phi, (And, Or)):
        yield from subformulas(phi.left)
        yield from subformulas(phi.right)
    elif isinstance(phi, (Exists, Modal)):
        yield from subformulas(phi.body)


def fresh_name(base: str, taken: Set[str]) -> str:
    if base not in taken:
        return base
    for i in count(1):
        candidate = f"{base}{i}"
        if candidate not in taken:
            return candidate


# ----------------------------------
# Substitution
# ----------------------------------

def subst_term(t: Term, mapping: Dict[Term, Term]) -> Term:
    if t in mapping:
        return mapping[t]
    if isinstance(t, Fn):
        return Fn(t.symbol, tuple(subst_term(a, mapping) for a in t.args))
    if isinstance(t, FieldSelect):
        return FieldSelect(subst_term(t.heap, mapping), t.owner, t.field)
    if isinstance(t, Store):
        return Store(subst_term(t.heap, mapping), t.field, t.owner, subst_term(t.value, mapping))
    return t


def substitute(phi: Formula, mapping: Dict[Term, Term]) -> Formula:
    """Capture-avoiding replacement of term occurrences."""
    if not mapping:
        return phi
    if isinstance(phi, Pred):
        return Pred(phi.name, tuple(subst_term(a, mapping) for a in phi.args))
    if isinstance(phi, (Eq, Geq, Gt)):
        return type(phi)(subst_term(phi.left, mapping), subst_term(phi.right, mapping))
    if isinstance(phi, Not):
        return Not(substitute(phi.body, mapping))
    if isinstance(phi, (And, Or)):
        return type(phi)(substitute(phi.left, mapping), substitute(phi.right, mapping))
    if isinstance(phi, Exists):
        bound = Var(phi.var, True)
        inner = {k: v for k, v in mapping.items() if bound not in term_vars(k)}
        if not inner:
            return phi
        var, body = phi.var, phi.body
        if any(bound in term_vars(v) for v in inner.values()):
            taken = used_names(body)
            for v in inner.values():
                taken |= {x.name for x in term_vars(v)}
            var = fresh_name(phi.var, taken)
            body = substitute(body, {bound: Var(var, True)})
        return Exists(phi.sort, var, substitute(body, inner))
    if isinstance(phi, Modal):
        # statements may rebind program variables; only logical ones pass through
        inner = {k: v for k, v in mapping.items() if isinstance(k, Var) and k.logical}
        return Modal(phi.stmts, substitute(phi.body, inner))
    return phi


# ----------------------------------
# Alpha equivalence
# ----------------------------------

def _rename_term(t: Term, env: Dict[str, str]) -> Term:
    if isinstance(t, Var) and t.logical and t.name in env:
        return Var(env[t.name], True)
    if isinstance(t, Fn):
        return Fn(t.symbol, tuple(_rename_term(a, env) for a in t.args))
    if isinstance(t, FieldSelect):
        return FieldSelect(_rename_term(t.heap, env), t.owner, t.field)
    if isinstance(t, Store):
        return Store(_rename_term(t.heap, env), t.field, t.owner, _rename_term(t.value, env))
    return t


def alpha_normalize(phi: Formula) -> Formula:
    """Rename bound variables canonically (%0, %1, ... in binding order)."""
    counter = count()

    def go(f: Formula, env: Dict[str, str]) -> Formula:
        if isinstance(f, Pred):
            return Pred(f.name, tuple(_rename_term(a, env) for a in f.args))
        if isinstance(f, (Eq, Geq, Gt)):
            return type(f)(_rename_term(f.left, env), _rename_term(f.right, env))
        if isinstance(f, Not):
            return Not(go(f.body, env))
        if isinstance(f, (And, Or)):
            return type(f)(go(f.left, env), go(f.right, env))
        if isinstance(f, Exists):
            new = f"%{next(counter)}"
            return Exists(f.sort, new, go(f.body, {**env, f.var: new}))
        if isinstance(f, Modal):
            return Modal(f.stmts, go(f.body, env))
        return f

    return go(phi, {})


def alpha_equal(a: Formula, b: Formula) -> bool:
    return alpha_normalize(a) == alpha_normalize(b)


# ----------------------------------
# Simplification
# ----------------------------------

def term_sort(t: Term) -> Optional[str]:
    if isinstance(t, Lit):
        return t.sort
    if isinstance(t, Fn):
        if t.symbol in ARITHMETIC or t.symbol in ("head", "length"):
            return "Int"
        if t.symbol in ("cons", "tail"):
            return "List"
    return None


def _int_value(t: Term) -> Optional[int]:
    if isinstance(t, Lit) and t.sort == "Int":
        return t.value
    return None


def simplify_term(t: Term) -> Term:
    if isinstance(t, Fn):
        args = tuple(simplify_term(a) for a in t.args)
        ints = [_int_value(a) for a in args]
        if t.symbol in ARITHMETIC and all(v is not None for v in ints):
            if t.symbol == "neg":
                return int_lit(-ints[0])
            a, b = ints
            return int_lit(a + b if t.symbol == "+" else a - b if t.symbol == "-" else a * b)
        lists = [a.value if isinstance(a, Lit) and a.sort == "List" else None for a in args]
        if t.symbol == "cons" and ints[0] is not None and lists[1] is not None:
            return Lit((ints[0],) + lists[1], "List")
        if t.symbol == "length" and lists[0] is not None:
            return int_lit(len(lists[0]))
        if t.symbol == "head" and lists[0]:
            return int_lit(lists[0][0])
        if t.symbol == "tail" and lists[0]:
            return Lit(lists[0][1:], "List")
        if t.symbol in ("head", "tail") and isinstance(args[0], Fn) and args[0].symbol == "cons":
            return args[0].args[0] if t.symbol == "head" else args[0].args[1]
        return Fn(t.symbol, args)
    if isinstance(t, FieldSelect):
        return _select(simplify_term(t.heap), t.owner, t.field)
    if isinstance(t, Store):
        return Store(simplify_term(t.heap), t.field, t.owner, simplify_term(t.value))
    return t


def _select(heap: Term, owner: str, name: str) -> Term:
    while isinstance(heap, Store):
        if heap.field == name and heap.owner == owner:
            return heap.value
        if heap.field != name or (owner != "self" and heap.owner != "self"):
            heap = heap.heap
            continue
        break
    return FieldSelect(heap, owner, name)


def _is_cons(t: Term) -> bool:
    return isinstance(t, Fn) and t.symbol == "cons"


def _is_nil(t: Term) -> bool:
    return t == NIL_LIT


def simplify(phi: Formula) -> Formula:
    """Local rewriting: select over store, literal folding, unit laws."""
    if isinstance(phi, Eq):
        left, right = simplify_term(phi.left), simplify_term(phi.right)
        if left == right:
            return TOP
        if isinstance(left, Lit) and isinstance(right, Lit):
            return TOP if values_equal(left.value, right.value) else BOTTOM
        if (_is_cons(left) and _is_nil(right)) or (_is_nil(left) and _is_cons(right)):
            return BOTTOM
        return Eq(left, right)
    if isinstance(phi, (Geq, Gt)):
        left, right = simplify_term(phi.left), simplify_term(phi.right)
        a, b = _int_value(left), _int_value(right)
        if a is not None and b is not None:
            holds = a >= b if isinstance(phi, Geq) else a > b
            return TOP if holds else BOTTOM
        if left == right:
            return TOP if isinstance(phi, Geq) else BOTTOM
        return type(phi)(left, right)
    if isinstance(phi, Pred):
        return Pred(phi.name, tuple(simplify_term(a) for a in phi.args))
    if isinstance(phi, Not):
        body = simplify(phi.body)
        return neg(body)
    if isinstance(phi, And):
        parts = [simplify(c) for c in conjuncts(phi)]
        if BOTTOM in parts:
            return BOTTOM
        return conj(*parts)
    if isinstance(phi, Or):
        return disj(*[simplify(d) for d in disjuncts(phi)])
    if isinstance(phi, Exists):
        body = simplify(phi.body)
        if Var(phi.var, True) not in free_vars(body):
            return body
        return Exists(phi.sort, phi.var, body)
    if isinstance(phi, Modal):
        return Modal(phi.stmts, simplify(phi.body))
    return phi


def is_modality_free(phi: Formula) -> bool:
    return not any(isinstance(f, Modal) for f in subformulas(phi))
