"""
Inclusion-based points-to analysis for futures.

Every location that may hold a future (locals, parameters, fields and
method results) gets a set of (object, method) pairs: the methods whose
processes may resolve the futures stored there. Calls seed the sets,
assignments, arguments and returns copy them, and a get copies the result
set of every method its future may come from. Iteration stops at the first
round that adds nothing.
"""

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Set, Tuple

from runtime.semantics import get_sites
from syntax import program_ast as A

Node = Tuple[str, ...]
Resolver = Tuple[str, str]
Site = Tuple[str, str, int]


def _local(obj: str, method: str, name: str) -> Node:
    return ("local", obj, method, name)


def _field(obj: str, name: str) -> Node:
    return ("field", obj, name)


def _result(obj: str, method: str) -> Node:
    return ("result", obj, method)


def _sources(e: A.Expr, obj: str, method: str) -> Iterable[Node]:
    if isinstance(e, A.VarRef):
        yield _local(obj, method, e.name)
    elif isinstance(e, A.FieldRef):
        yield _field(obj, e.name)
    elif isinstance(e, A.QualifiedRef):
        yield _field(obj if e.owner == "self" else e.owner, e.name)
    elif isinstance(e, A.BinOp):
        yield from _sources(e.left, obj, method)
        yield from _sources(e.right, obj, method)
    elif isinstance(e, A.UnOp):
        yield from _sources(e.operand, obj, method)
    elif isinstance(e, A.Apply):
        for a in e.args:
            yield from _sources(a, obj, method)


def _target(loc: A.Location, obj: str, method: str) -> Node:
    if loc.is_field:
        return _field(loc.owner or obj, loc.name)
    return _local(obj, method, loc.name)


@dataclass
class PointsTo:
    """Result of the analysis: resolver sets per get site."""
    sites: Dict[Site, FrozenSet[Resolver]] = field(default_factory=dict)
    stmt_sites: Dict[int, Site] = field(default_factory=dict)
    pts: Dict[Node, Set[Resolver]] = field(default_factory=dict)

    def at(self, stmt: A.Get) -> FrozenSet[Resolver]:
        """Methods that may resolve the future read by this get statement."""
        site = self.stmt_sites.get(id(stmt))
        return self.sites.get(site, frozenset())


class PointsToAnalysis:
    def __init__(self, program: A.Program):
        self.program = program
        self.copies: List[Tuple[Node, Node]] = []
        self.seeds: List[Tuple[Node, Resolver]] = []
        self.gets: List[Tuple[Tuple[Node, ...], Node]] = []
        self.reads: Dict[int, Tuple[Node, ...]] = {}

    def _callees(self, name: str, method: str) -> List[str]:
        if self.program.object(name) is not None:
            return [name]
        # a call through a variable may reach any object with that method
        return [o.name for o in self.program.objects if o.method(method) is not None]

    def collect(self) -> None:
        for o in self.program.objects:
            for m in o.methods:
                for s in A.walk_statements(m.body):
                    self._statement(s, o.name, m.name)

    def _statement(self, s: A.Stmt, obj: str, method: str) -> None:
        if isinstance(s, A.Assign):
            dst = _target(s.target, obj, method)
            self.copies.extend((src, dst) for src in _sources(s.expr, obj, method))
        elif isinstance(s, A.Call):
            callees = self._callees(s.callee, s.method)
            if s.target is not None:
                dst = _target(s.target, obj, method)
                self.seeds.extend((dst, (c, s.method)) for c in callees)
            for c in callees:
                decl = self.program.object(c).method(s.method)
                if decl is None:
                    continue
                for param, arg in zip(decl.param_names, s.args):
                    dst = _local(c, s.method, param)
                    self.copies.extend((src, dst) for src in _sources(arg, obj, method))
        elif isinstance(s, A.Get):
            srcs = tuple(_sources(s.future, obj, method))
            self.reads[id(s)] = srcs
            if s.target is not None:
                self.gets.append((srcs, _target(s.target, obj, method)))
        elif isinstance(s, A.Return):
            dst = _result(obj, method)
            self.copies.extend((src, dst) for src in _sources(s.expr, obj, method))

    def solve(self) -> Dict[Node, Set[Resolver]]:
        pts: Dict[Node, Set[Resolver]] = {}
        for node, resolver in self.seeds:
            pts.setdefault(node, set()).add(resolver)

        changed = True
        while changed:
            changed = False
            edges = list(self.copies)
            for srcs, dst in self.gets:
                for src in srcs:
                    edges.extend((_result(*r), dst) for r in pts.get(src, ()))
            for src, dst in edges:
                incoming = pts.get(src, set())
                current = pts.setdefault(dst, set())
                if not incoming <= current:
                    current |= incoming
                    changed = True
        return pts

    def run(self) -> PointsTo:
        self.collect()
        pts = self.solve()
        out = PointsTo(pts=pts)
        for key, site in get_sites(self.program).items():
            out.stmt_sites[key] = site
            resolvers: Set[Resolver] = set()
            for src in self.reads.get(key, ()):
                resolvers |= pts.get(src, set())
            out.sites[site] = frozenset(resolvers)
        return out


def points_to(program: A.Program) -> PointsTo:
    return PointsToAnalysis(program).run()
