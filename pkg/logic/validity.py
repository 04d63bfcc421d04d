"""
Validity checking for a decidable fragment of the state logic.

phi is valid iff its negation is unsatisfiable. The negation is put in
negation normal form; positive existentials become Skolem constants and
universals are instantiated with the ground terms of matching sort. Each
cube of the resulting DNF is decided by

    - union-find with congruence for equalities over non-numeric values
      (distinct literals, Nil versus cons, two-valued booleans), and
    - Fourier-Motzkin elimination over the rationals for linear integer
      atoms, with strict inequalities tightened to a - b - 1 >= 0 and a
      back-substituted integer model.

Anything outside the fragment (nonlinear products, predicates, integer
gaps the bounded search cannot close) yields Unknown. Callers treat
Unknown as failure.
"""

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, floor
from typing import Dict, List, Optional, Tuple

from logic import formulas as F
from logic.values import Future, ObjectRef, show_value
from syntax.pretty import pretty_term

DEFAULT_BOUND = 8
MAX_CUBES = 4096
MAX_CONSTRAINTS = 4000
MAX_DISEQUALITIES = 8
MAX_SEARCH_ATOMS = 4


# ----------------------------------
# Verdicts
# ----------------------------------

@dataclass(frozen=True)
class Valid:
    def __bool__(self) -> bool:
        return True


@dataclass(frozen=True)
class NotValid:
    counterexample: Dict[str, str] = field(default_factory=dict, hash=False)

    def __bool__(self) -> bool:
        return False


@dataclass(frozen=True)
class Unknown:
    reason: str = ""

    def __bool__(self) -> bool:
        return False


class _Undecided(Exception):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


Lin = Dict[object, Fraction]
CONST = None


# ----------------------------------
# Linear forms
# ----------------------------------

def _lin_add(a: Lin, b: Lin, scale: Fraction = Fraction(1)) -> Lin:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, Fraction(0)) + scale * v
        if out[k] == 0:
            del out[k]
    return out


def _lin_scale(a: Lin, scale: Fraction) -> Lin:
    return {k: v * scale for k, v in a.items() if v * scale != 0}


def _is_const(a: Lin) -> bool:
    return all(k is CONST for k in a)


def linearize(t: F.Term) -> Lin:
    if isinstance(t, F.Lit):
        if t.sort != "Int":
            raise _Undecided(f"non-integer literal in arithmetic: {pretty_term(t)}")
        return {CONST: Fraction(t.value)} if t.value else {}
    if isinstance(t, F.Fn) and t.symbol in ("+", "-"):
        scale = Fraction(1) if t.symbol == "+" else Fraction(-1)
        return _lin_add(linearize(t.args[0]), linearize(t.args[1]), scale)
    if isinstance(t, F.Fn) and t.symbol == "neg":
        return _lin_scale(linearize(t.args[0]), Fraction(-1))
    if isinstance(t, F.Fn) and t.symbol == "*":
        left, right = linearize(t.args[0]), linearize(t.args[1])
        if _is_const(left):
            return _lin_scale(right, left.get(CONST, Fraction(0)))
        if _is_const(right):
            return _lin_scale(left, right.get(CONST, Fraction(0)))
        raise _Undecided("nonlinear arithmetic")
    return {t: Fraction(1)}


def _lin_value(a: Lin, model: Dict[object, int], skip=None) -> Fraction:
    total = Fraction(0)
    for k, v in a.items():
        if k is CONST:
            total += v
        elif k is not skip:
            total += v * model.get(k, 0)
    return total


def _substitute_lin(a: Lin, x, expr: Lin) -> Lin:
    if x not in a:
        return a
    coef = a[x]
    rest = {k: v for k, v in a.items() if k != x}
    return _lin_add(rest, expr, coef)


def _key(a: Lin):
    return frozenset(a.items())


class IntegerSolver:
    """Integer feasibility of linear constraints: eqs == 0, ineqs >= 0."""

    def __init__(self, bound: int = DEFAULT_BOUND):
        self.bound = bound

    def solve(self, eqs: List[Lin], ineqs: List[Lin]) -> Optional[Dict[object, int]]:
        atoms = sorted(
            {k for c in eqs + ineqs for k in c if k is not CONST},
            key=lambda t: pretty_term(t),
        )
        result = self._fourier_motzkin(list(eqs), list(ineqs))
        if result is None or isinstance(result, dict):
            if isinstance(result, dict):
                for a in atoms:
                    result.setdefault(a, 0)
            return result
        return self._search(eqs, ineqs, atoms)

    def _fourier_motzkin(self, eqs: List[Lin], ineqs: List[Lin]):
        substitutions: List[Tuple[object, Lin]] = []
        while eqs:
            e = eqs.pop()
            variables = [k for k in e if k is not CONST]
            if not variables:
                if e.get(CONST, 0) != 0:
                    return None
                continue
            unit = [k for k in variables if abs(e[k]) == 1]
            x = unit[0] if unit else variables[0]
            a = e[x]
            expr = {k: -v / a for k, v in e.items() if k != x}
            substitutions.append((x, expr))
            eqs = [_substitute_lin(q, x, expr) for q in eqs]
            ineqs = [_substitute_lin(q, x, expr) for q in ineqs]

        order: List[object] = []
        for q in ineqs:
            for k in q:
                if k is not CONST and k not in order:
                    order.append(k)

        eliminated = []
        for x in order:
            pos = [q for q in ineqs if q.get(x, 0) > 0]
            neg = [q for q in ineqs if q.get(x, 0) < 0]
            rest = [q for q in ineqs if x not in q]
            eliminated.append((x, pos, neg))
            seen = {_key(q) for q in rest}
            for p in pos:
                for n in neg:
                    combined = _lin_add(_lin_scale(p, -n[x]), _lin_scale(n, p[x]))
                    k = _key(combined)
                    if k not in seen:
                        seen.add(k)
                        rest.append(combined)
            if len(rest) > MAX_CONSTRAINTS:
                raise _Undecided("too many constraints")
            ineqs = rest

        for q in ineqs:
            if q.get(CONST, 0) < 0:
                return None

        model: Dict[object, int] = {}
        for x, pos, neg in reversed(eliminated):
            lows = [ceil(-_lin_value(p, model, skip=x) / p[x]) for p in pos]
            highs = [floor(_lin_value(n, model, skip=x) / -n[x]) for n in neg]
            lo = max(lows) if lows else None
            hi = min(highs) if highs else None
            if lo is not None and hi is not None and lo > hi:
                return "gap"
            model[x] = _closest_to_zero(lo, hi)
        for x, expr in reversed(substitutions):
            for k in expr:
                if k is not CONST:
                    model.setdefault(k, 0)
            value = _lin_value(expr, model)
            if value.denominator != 1:
                return "gap"
            model[x] = int(value)
        return model

    def _search(self, eqs: List[Lin], ineqs: List[Lin], atoms) -> Dict[object, int]:
        if len(atoms) > MAX_SEARCH_ATOMS:
            raise _Undecided("integer reasoning beyond the search bound")
        values = sorted(range(-self.bound, self.bound + 1), key=abs)
        for combo in itertools.product(values, repeat=len(atoms)):
            model = dict(zip(atoms, combo))
            if all(_lin_value(e, model) == 0 for e in eqs) and all(_lin_value(q, model) >= 0 for q in ineqs):
                return model
        raise _Undecided("integer reasoning beyond the search bound")


def _closest_to_zero(lo: Optional[int], hi: Optional[int]) -> int:
    if lo is not None and lo > 0:
        return lo
    if hi is not None and hi < 0:
        return hi
    return 0


# ----------------------------------
# Union-find over non-numeric terms
# ----------------------------------

class _UnionFind:
    def __init__(self):
        self.parent: Dict[F.Term, F.Term] = {}

    def find(self, t: F.Term) -> F.Term:
        self.parent.setdefault(t, t)
        while self.parent[t] != t:
            self.parent[t] = self.parent[self.parent[t]]
            t = self.parent[t]
        return t

    def union(self, a: F.Term, b: F.Term) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[ra] = rb
        return True

    def classes(self) -> Dict[F.Term, List[F.Term]]:
        out: Dict[F.Term, List[F.Term]] = {}
        for t in list(self.parent):
            out.setdefault(self.find(t), []).append(t)
        return out


# ----------------------------------
# Checker
# ----------------------------------

class ValidityChecker:
    """
    Decides validity in the supported fragment.

    Args:
        bound: radius of the fallback integer witness search
    """

    def __init__(self, bound: int = DEFAULT_BOUND):
        self.bound = bound
        self.solver = IntegerSolver(bound)

    def check(self, phi: F.Formula):
        if not F.is_modality_free(phi):
            return Unknown("modalities must be eliminated before checking validity")
        self.skolem_sorts: Dict[F.Term, Optional[str]] = {}
        self.counter = itertools.count()
        self.incomplete = False
        goal = F.simplify(F.neg(phi))
        try:
            tree = self._instantiate(self._nnf(goal, True))
            cubes = self._cubes(tree)
        except _Undecided as exc:
            return Unknown(exc.reason)
        reason = None
        for cube in cubes:
            try:
                model = self._solve_cube(cube)
            except _Undecided as exc:
                reason = reason or exc.reason
                continue
            if model is not None:
                if self.incomplete:
                    return Unknown("counterexample depends on quantifier instantiation")
                return NotValid(model)
        if reason is not None:
            return Unknown(reason)
        return Valid()

    # ---------- normal form
    def _skolem(self, sort: Optional[str], var: str) -> F.Var:
        const = F.Var(f"{var}!{next(self.counter)}", True)
        self.skolem_sorts[const] = sort
        return const

    def _nnf(self, phi: F.Formula, positive: bool):
        if isinstance(phi, F.Top):
            return ("and", []) if positive else ("or", [])
        if isinstance(phi, F.ATOMS):
            return ("lit", phi, positive)
        if isinstance(phi, F.Not):
            return self._nnf(phi.body, not positive)
        if isinstance(phi, F.And):
            kind = "and" if positive else "or"
            return (kind, [self._nnf(phi.left, positive), self._nnf(phi.right, positive)])
        if isinstance(phi, F.Or):
            kind = "or" if positive else "and"
            return (kind, [self._nnf(phi.left, positive), self._nnf(phi.right, positive)])
        if isinstance(phi, F.Exists):
            if positive:
                const = self._skolem(phi.sort, phi.var)
                return self._nnf(F.substitute(phi.body, {F.Var(phi.var, True): const}), True)
            return ("forall", phi.sort, phi.var, F.neg(phi.body))
        raise _Undecided(f"unsupported formula {type(phi).__name__}")

    def _lits(self, node, out):
        kind = node[0]
        if kind == "lit":
            out.append(node)
        elif kind in ("and", "or"):
            for child in node[1]:
                self._lits(child, out)
        return out

    def _has_forall(self, node) -> bool:
        if node[0] == "forall":
            return True
        if node[0] in ("and", "or"):
            return any(self._has_forall(c) for c in node[1])
        return False

    def _instantiate(self, tree, rounds: int = 3):
        for _ in range(rounds):
            if not self._has_forall(tree):
                return tree
            lits = self._lits(tree, [])
            sorts = self._infer_sorts(lits)
            ground = self._ground_terms(lits)
            tree = self._expand(tree, ground, sorts)
        if self._has_forall(tree):
            self.incomplete = True
            tree = self._drop_foralls(tree)
        return tree

    def _drop_foralls(self, node):
        if node[0] == "forall":
            return ("and", [])
        if node[0] in ("and", "or"):
            return (node[0], [self._drop_foralls(c) for c in node[1]])
        return node

    def _expand(self, node, ground, sorts):
        kind = node[0]
        if kind in ("and", "or"):
            return (kind, [self._expand(c, ground, sorts) for c in node[1]])
        if kind != "forall":
            return node
        _, sort, var, body = node
        if sort != "Bool":
            self.incomplete = True
        instances = []
        for t in self._candidates(sort, ground, sorts):
            inst = F.simplify(F.substitute(body, {F.Var(var, True): t}))
            instances.append(self._nnf(inst, True))
        return ("and", instances)

    def _ground_terms(self, lits) -> List[F.Term]:
        out: List[F.Term] = []
        for _, atom, _ in lits:
            for t in F.atom_terms(atom):
                for s in F.subterms(t):
                    if isinstance(s, (F.Heap, F.Store)):
                        continue
                    if s not in out:
                        out.append(s)
        return out

    def _candidates(self, sort, ground, sorts) -> List[F.Term]:
        if sort == "Bool":
            return [F.TRUE_LIT, F.FALSE_LIT]
        if sort is None:
            return list(ground) or [F.int_lit(0)]
        out = [t for t in ground if sorts.get(t) == sort]
        extra = {
            "Int": [F.int_lit(0)],
            "List": [F.NIL_LIT, F.Lit((0,), "List")],
            "Unit": [F.UNIT_LIT],
        }.get(sort, [])
        for t in extra:
            if t not in out:
                out.append(t)
        return out

    def _infer_sorts(self, lits) -> Dict[F.Term, str]:
        sorts: Dict[F.Term, str] = {t: s for t, s in self.skolem_sorts.items() if s}

        def note(t, s):
            if t not in sorts:
                sorts[t] = s
                return True
            return False

        for _, atom, _ in lits:
            for t in F.atom_terms(atom):
                for s in F.subterms(t):
                    sort = F.term_sort(s)
                    if sort:
                        note(s, sort)
                    if isinstance(s, F.Fn):
                        if s.symbol in F.ARITHMETIC:
                            for a in s.args:
                                note(a, "Int")
                        elif s.symbol in ("head", "tail", "length"):
                            note(s.args[0], "List")
                        elif s.symbol == "cons":
                            note(s.args[0], "Int")
                            note(s.args[1], "List")
            if isinstance(atom, (F.Geq, F.Gt)):
                note(atom.left, "Int")
                note(atom.right, "Int")
        changed = True
        while changed:
            changed = False
            for _, atom, _ in lits:
                if isinstance(atom, F.Eq):
                    l, r = atom.left, atom.right
                    if l in sorts and r not in sorts:
                        changed |= note(r, sorts[l])
                    elif r in sorts and l not in sorts:
                        changed |= note(l, sorts[r])
        return sorts

    def _cubes(self, node) -> List[list]:
        kind = node[0]
        if kind == "lit":
            return [[node]]
        if kind == "or":
            out = []
            for child in node[1]:
                out.extend(self._cubes(child))
                if len(out) > MAX_CUBES:
                    raise _Undecided("formula too large for case analysis")
            return out
        cubes: List[list] = [[]]
        for child in node[1]:
            child_cubes = self._cubes(child)
            cubes = [c + d for c in cubes for d in child_cubes]
            if len(cubes) > MAX_CUBES:
                raise _Undecided("formula too large for case analysis")
        return cubes

    # ---------- cube decision
    def _solve_cube(self, cube) -> Optional[Dict[str, str]]:
        sorts = self._infer_sorts(cube)
        eqs: List[Lin] = []
        ineqs: List[Lin] = []
        diseqs: List[Lin] = []
        uf = _UnionFind()
        apart: List[Tuple[F.Term, F.Term]] = []
        for _, atom, positive in cube:
            if isinstance(atom, F.Pred):
                raise _Undecided(f"uninterpreted predicate '{atom.name}'")
            left, right = atom.left, atom.right
            if isinstance(atom, F.Eq):
                if sorts.get(left) == "Int" or sorts.get(right) == "Int":
                    diff = _lin_add(linearize(left), linearize(right), Fraction(-1))
                    (eqs if positive else diseqs).append(diff)
                elif positive:
                    uf.union(left, right)
                else:
                    uf.find(left)
                    uf.find(right)
                    apart.append((left, right))
                continue
            if not positive:
                left, right = right, left
            strict = isinstance(atom, F.Gt) == positive
            diff = _lin_add(linearize(left), linearize(right), Fraction(-1))
            if strict:
                diff = _lin_add(diff, {CONST: Fraction(-1)})
            ineqs.append(diff)

        values = self._equalities(uf, apart, sorts)
        if values is None:
            return None
        if len(diseqs) > MAX_DISEQUALITIES:
            raise _Undecided("too many integer disequalities")
        model = None
        for signs in itertools.product((1, -1), repeat=len(diseqs)):
            extra = [
                _lin_add(_lin_scale(d, Fraction(s)), {CONST: Fraction(-1)})
                for d, s in zip(diseqs, signs)
            ]
            model = self.solver.solve(eqs, ineqs + extra)
            if model is not None:
                break
        if model is None:
            return None
        return self._counterexample(model, values)

    def _equalities(self, uf: _UnionFind, apart, sorts):
        for t in list(uf.parent):
            for s in F.subterms(t):
                uf.find(s)
        # congruence closure over function applications
        changed = True
        while changed:
            changed = False
            apps = [t for t in uf.parent if isinstance(t, F.Fn)]
            for a, b in itertools.combinations(apps, 2):
                if a.symbol == b.symbol and len(a.args) == len(b.args):
                    if all(uf.find(x) == uf.find(y) for x, y in zip(a.args, b.args)):
                        changed |= uf.union(a, b)
        for a, b in apart:
            if uf.find(a) == uf.find(b):
                return None
        classes = uf.classes()
        values: Dict[F.Term, object] = {}
        for root, members in classes.items():
            lits = [m for m in members if isinstance(m, F.Lit)]
            for x, y in itertools.combinations(lits, 2):
                if x != y:
                    return None
            has_nil = any(m == F.NIL_LIT for m in members)
            has_cons = any(isinstance(m, F.Fn) and m.symbol == "cons" for m in members)
            if has_nil and has_cons:
                return None
            if lits:
                values[root] = lits[0].value
        apart_roots = {(uf.find(a), uf.find(b)) for a, b in apart}
        apart_roots |= {(b, a) for a, b in apart_roots}
        true_root = uf.find(F.TRUE_LIT) if F.TRUE_LIT in uf.parent else None
        false_root = uf.find(F.FALSE_LIT) if F.FALSE_LIT in uf.parent else None
        fresh = itertools.count(100)
        for root, members in classes.items():
            if root in values:
                continue
            sort = next((sorts[m] for m in members if m in sorts), None)
            if sort == "Bool":
                if (root, true_root) in apart_roots and (root, false_root) in apart_roots:
                    return None
                values[root] = (root, true_root) not in apart_roots
            elif sort == "List":
                nil_root = uf.find(F.NIL_LIT) if F.NIL_LIT in uf.parent else None
                has_cons = any(isinstance(m, F.Fn) and m.symbol == "cons" for m in members)
                values[root] = (0,) if has_cons or (root, nil_root) in apart_roots else ()
            elif sort == "Obj":
                values[root] = ObjectRef(f"o{next(fresh)}")
            else:
                values[root] = Future(next(fresh))
        return {t: values[uf.find(t)] for t in uf.parent}

    def _counterexample(self, ints: Dict[object, int], others) -> Dict[str, str]:
        out: Dict[str, str] = {}
        for t, v in list(ints.items()) + list(others.items()):
            if isinstance(t, F.Var) and t.logical:
                continue
            if isinstance(t, (F.Var, F.FieldSelect, F.Result)):
                out[pretty_term(t)] = show_value(v)
        return dict(sorted(out.items()))


def check_validity(phi: F.Formula, bound: int = DEFAULT_BOUND):
    """Valid, NotValid(counterexample) or Unknown(reason)."""
    return ValidityChecker(bound).check(phi)


def is_valid(phi: F.Formula, bound: int = DEFAULT_BOUND) -> bool:
    return isinstance(check_validity(phi, bound), Valid)
