"""
Program-level checking: T-Main and T-Object, then causality.

check_program runs the phases in order and records every failure in one
Report. A projection failure stops the run, since nothing downstream has
a type to check against; per-method typing errors do not.
"""

from typing import Callable, Dict, Optional, Set, Tuple

from causality.admissibility import admissible
from causality.graph import CausalityGraph, add_get_edges, build_partial_graph
from logic import formulas as F
from logic.validity import check_validity
from projection.methods import method_types
from projection.wellformed import Projection, project_all, well_formed
from runtime.points_to import PointsTo, points_to
from syntax import program_ast as A
from syntax import session_types as S
from typecheck.context import CheckContext, PostDatabase, Resolver, method_facts
from typecheck.statements import Edge, NodeId, StatementChecker
from utils.errors import AsyncstError, ProjectionUndefined, TypingError
from utils.reporting import Report

STAGE = "Typecheck"
RULE_MAIN = "T-Main"
RULE_OBJECT = "T-Object"


def check_statements(
    checker: StatementChecker,
    ctx: CheckContext,
    stmts: Tuple[A.Stmt, ...],
    local: S.LocalType,
) -> Set[Edge]:
    """
    Statements against a method-type suffix; returns the get edges added.

    Raises:
        TypingError: on the first failure
    """
    before = set(checker.edges)
    checker.check(ctx, tuple(stmts), tuple(local.items))
    return checker.edges - before


class ProgramChecker:
    """
    Args:
        program: parsed program
        g: its protocol
        validity: validity oracle used by every premise
    """

    def __init__(self, program: A.Program, g: S.GlobalType, validity: Callable = check_validity):
        self.program = program
        self.g = g
        self.validity = validity
        self.report = Report()
        self.projection: Optional[Projection] = None
        self.graph: Optional[CausalityGraph] = None
        self.reads: Dict[NodeId, Set[Resolver]] = {}

    # ----------------------------------
    # T-Main
    # ----------------------------------

    def _roles(self) -> None:
        declared = set(self.program.object_names)
        roles = S.roles(self.g)
        for name in sorted(roles - declared):
            self.report.fail(STAGE, RULE_MAIN, f"protocol role {name} is not a declared object", location=name)
        for name in sorted(declared - roles):
            self.report.fail(STAGE, RULE_MAIN, f"object {name} takes no part in the protocol", location=name)

    def _main(self) -> None:
        main, expected = self.program.main, self.g.main
        if (main.callee, main.method) != (expected.callee, expected.method):
            self.report.fail(
                STAGE, RULE_MAIN,
                f"main calls {main.callee}.{main.method}, the protocol starts with {expected.callee}.{expected.method}",
                location="main",
            )

    # ----------------------------------
    # T-Object
    # ----------------------------------

    def check_object(self, decl: A.ObjectDecl, local: S.LocalType, phi: F.Formula = F.TOP,
                     points: Optional[PointsTo] = None, posts: Optional[PostDatabase] = None,
                     terms=None) -> Set[Edge]:
        """
        Every method of the object type against each of its method types.

        Failures are recorded in self.report; the get edges of the methods
        that checked are returned.
        """
        points = points or points_to(self.program)
        posts = posts or PostDatabase.from_global(self.g)
        checker = StatementChecker(self.program, decl, points, posts, terms or {}, self.validity)
        edges: Set[Edge] = set()
        try:
            types = method_types(local, self.validity)
        except ProjectionUndefined as exc:
            self.report.add_error(STAGE, exc)
            return edges
        for name, method_local in sorted(types.items()):
            m = decl.method(name)
            if m is None:
                self.report.fail(STAGE, RULE_OBJECT, f"{decl.name} does not implement {name}",
                                 location=f"{decl.name}.{name}")
                continue
            for t in method_local:
                first = t.items[0] if t.items else None
                if not isinstance(first, S.Receive) or first.method != name:
                    self.report.fail(STAGE, RULE_OBJECT, f"method type of {name} does not start with its Receive",
                                     location=f"{decl.name}.{name}")
                    continue
                ctx = CheckContext(decl.name, name, F.conj(phi, first.pre), facts=method_facts(self.program, decl.name, m))
                try:
                    edges |= check_statements(checker, ctx, m.body, S.LocalType(t.items[1:]))
                except TypingError as exc:
                    self.report.add_error(STAGE, exc)
                except AsyncstError as exc:
                    self.report.add_error(STAGE, TypingError(RULE_OBJECT, str(exc), f"{decl.name}.{name}"))
        for m in decl.methods:
            if m.name not in types:
                self.report.warn(f"{decl.name}.{m.name} is never called by the protocol")
        for w in checker.warnings:
            self.report.warn(w)
        for node, resolvers in checker.reads.items():
            self.reads.setdefault(node, set()).update(resolvers)
        return edges

    # ----------------------------------
    # Whole program
    # ----------------------------------

    def run(self) -> Report:
        self.report.extend(well_formed(self.g, self.validity))
        if not self.report.ok:
            return self.report
        self._roles()
        self._main()
        try:
            self.projection = project_all(self.g, self.validity)
        except ProjectionUndefined as exc:
            self.report.add_error("Projection", exc)
            return self.report
        points = points_to(self.program)
        posts = PostDatabase.from_global(self.g)
        partial = build_partial_graph(self.g, self.projection)
        for name in sorted(self.projection.propagated):
            decl = self.program.object(name)
            if decl is None:
                continue
            self.check_object(decl, self.projection.propagated[name], F.TOP, points, posts, partial.terms)
        try:
            self.graph = add_get_edges(partial, self.reads, self.report)
        except AsyncstError as exc:
            self.report.add_error("Causality", exc)
            return self.report
        self.report.extend(admissible(self.graph))
        return self.report


def check_program(program: A.Program, g: S.GlobalType, validity: Callable = check_validity) -> Report:
    """Verdict of the whole type system on one program and protocol."""
    return ProgramChecker(program, g, validity).run()


def check_object(program: A.Program, g: S.GlobalType, obj: str, validity: Callable = check_validity) -> Report:
    """T-Object for a single object, against its propagated object type."""
    checker = ProgramChecker(program, g, validity)
    decl = program.object(obj)
    if decl is None:
        checker.report.fail(STAGE, RULE_OBJECT, f"no object named {obj}", location=obj)
        return checker.report
    try:
        projection = project_all(g, validity)
    except ProjectionUndefined as exc:
        checker.report.add_error("Projection", exc)
        return checker.report
    partial = build_partial_graph(g, projection)
    if obj not in projection.propagated:
        checker.report.fail(STAGE, RULE_OBJECT, f"{obj} is not a protocol role", location=obj)
        return checker.report
    checker.check_object(decl, projection.propagated[obj], terms=partial.terms)
    return checker.report
