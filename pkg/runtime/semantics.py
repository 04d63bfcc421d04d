"""
Small-step semantics of Async programs.

A step is chosen by a StepId naming the future of the process that moves:
`start` activates a pending process on an inactive object, `exec` runs the
next statement of an active process. Calls, starts, gets and returns emit
events; every other statement is internal and emits noEv.
"""

from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Dict, FrozenSet, List, Tuple

from logic.evaluation import EvalContext, Evaluator
from logic.values import UNIT, Future, ObjectRef, Value
from runtime.configuration import Configuration, ObjectState, Process
from runtime.events import (
    NO_EVENT,
    Fetch,
    Invocation,
    InvocationReaction,
    Resolving,
)
from syntax import program_ast as A
from syntax.expressions import is_boolean_expr, program_formula, program_term
from utils.errors import EvaluationError

START = "start"
EXEC = "exec"

INTERNAL = (A.Assign, A.Skip, A.If, A.While)


@dataclass(frozen=True, order=True)
class StepId:
    future: Future
    kind: str

    def __str__(self) -> str:
        return f"{self.kind}({self.future})"


@lru_cache(maxsize=4096)
def _compile(e: A.Expr, obj: str, objects: FrozenSet[str], locals_: FrozenSet[str]):
    if is_boolean_expr(e):
        return True, program_formula(e, obj, objects, locals_)
    return False, program_term(e, obj, objects, locals_)


def get_sites(program: A.Program) -> Dict[int, Tuple[str, str, int]]:
    """id of every get statement -> (object, method, ordinal within the method)."""
    sites = {}
    for o in program.objects:
        for m in o.methods:
            gets = [s for s in A.walk_statements(m.body) if isinstance(s, A.Get)]
            for k, s in enumerate(gets):
                sites[id(s)] = (o.name, m.name, k)
    return sites


class Semantics:
    """
    Reduction rules for one program.

    Args:
        program: a resolved program
    """

    def __init__(self, program: A.Program):
        self.program = program
        self.objects = frozenset(program.object_names)
        self.sites = get_sites(program)

    # ----------------------------------
    # Expressions
    # ----------------------------------

    def eval(self, e: A.Expr, obj: str, heap, store) -> Value:
        boolean, compiled = _compile(e, obj, self.objects, frozenset(store))
        ctx = EvalContext(heaps={obj: heap}, store=store, self_obj=obj)
        evaluator = Evaluator(ctx)
        if boolean:
            return evaluator.holds(compiled, {})
        return evaluator.term(compiled, {})

    def _eval_in(self, cfg: Configuration, proc: Process, e: A.Expr) -> Value:
        return self.eval(e, proc.obj, cfg.object(proc.obj).heap, proc.store)

    def _guard(self, cfg: Configuration, proc: Process, e: A.Expr) -> bool:
        value = self._eval_in(cfg, proc, e)
        if not isinstance(value, bool):
            raise EvaluationError(f"guard of {proc.obj}.{proc.method} is not a boolean")
        return value

    def _write(self, cfg: Configuration, proc: Process, target, value: Value):
        if target is None:
            return cfg, proc
        if target.is_field:
            owner = target.owner or proc.obj
            return cfg.with_object(cfg.object(owner).with_field(target.name, value)), proc
        return cfg, proc.with_local(target.name, value)

    # ----------------------------------
    # Configurations
    # ----------------------------------

    def initial(self) -> Configuration:
        """
        Objects with evaluated field initializers and one pending main process.

        Raises:
            EvaluationError: if an initializer or a main argument cannot be evaluated
        """
        objects = []
        for o in self.program.objects:
            heap: Dict[str, Value] = {}
            for f in o.fields:
                heap[f.name] = self.eval(f.init, o.name, heap, {})
            objects.append(ObjectState(o.name, heap))
        main = self.program.main
        decl = self._method(main.callee, main.method)
        args = [self.eval(a, main.callee, {}, {}) for a in main.args]
        proc = Process(main.callee, Future(0), main.method, decl.body, dict(zip(decl.param_names, args)))
        return Configuration(tuple(objects), (proc,), next_future=1)

    def _method(self, obj: str, method: str) -> A.MethodDecl:
        decl = self.program.object(obj)
        m = decl.method(method) if decl is not None else None
        if m is None:
            raise EvaluationError(f"{obj} has no method '{method}'")
        return m

    def enabled(self, cfg: Configuration) -> List[StepId]:
        steps = []
        for p in cfg.processes:
            if p.done:
                continue
            active = cfg.object(p.obj).active
            if not p.started:
                if active is None:
                    steps.append(StepId(p.future, START))
            elif active == p.future and not self._blocked(cfg, p):
                steps.append(StepId(p.future, EXEC))
        return steps

    def _blocked(self, cfg: Configuration, proc: Process) -> bool:
        if not proc.stmts or not isinstance(proc.stmts[0], A.Get):
            return False
        try:
            fut = self._eval_in(cfg, proc, proc.stmts[0].future)
        except EvaluationError:
            return False
        return isinstance(fut, Future) and cfg.resolved(fut) is None

    def is_internal(self, cfg: Configuration, s: StepId) -> bool:
        proc = cfg.process(s.future)
        return s.kind == EXEC and bool(proc.stmts) and isinstance(proc.stmts[0], INTERNAL)

    # ----------------------------------
    # Steps
    # ----------------------------------

    def step(self, cfg: Configuration, s: StepId):
        """
        Apply one enabled step.

        Returns:
            (event, next configuration); the event is NO_EVENT for internal steps

        Raises:
            EvaluationError: if the statement cannot be evaluated (the process is stuck)
        """
        proc = cfg.process(s.future)
        assert proc is not None and not proc.done, f"step {s} is not enabled"
        cfg = replace(cfg, clock=cfg.clock + 1)
        if s.kind == START:
            assert cfg.object(proc.obj).active is None, f"step {s} is not enabled"
            proc = replace(proc, started=True)
            cfg = cfg.with_object(replace(cfg.object(proc.obj), active=proc.future))
            return InvocationReaction(proc.obj, proc.future, proc.method, proc.future), cfg.with_process(proc)

        if not proc.stmts:
            return self._finish(cfg, proc, None)
        stmt, rest = proc.stmts[0], proc.stmts[1:]
        proc = replace(proc, stmts=rest)

        if isinstance(stmt, A.Skip):
            return NO_EVENT, cfg.with_process(proc)
        if isinstance(stmt, A.Assign):
            value = self._eval_in(cfg, proc, stmt.expr)
            cfg, proc = self._write(cfg, proc, stmt.target, value)
            return NO_EVENT, cfg.with_process(proc)
        if isinstance(stmt, A.If):
            branch = stmt.then if self._guard(cfg, proc, stmt.guard) else stmt.orelse
            return NO_EVENT, cfg.with_process(replace(proc, stmts=branch + rest))
        if isinstance(stmt, A.While):
            if self._guard(cfg, proc, stmt.guard):
                proc = replace(proc, stmts=stmt.body + (stmt,) + rest, iterations=proc.iterations + 1)
            return NO_EVENT, cfg.with_process(proc)
        if isinstance(stmt, A.Call):
            return self._call(cfg, proc, stmt)
        if isinstance(stmt, A.Get):
            return self._get(cfg, proc, stmt)
        if isinstance(stmt, A.Return):
            return self._finish(cfg, proc, stmt.expr)
        raise EvaluationError(f"statement {type(stmt).__name__} cannot be executed")

    def _callee(self, proc: Process, name: str) -> str:
        if name in proc.store:
            ref = proc.store[name]
            if not isinstance(ref, ObjectRef):
                raise EvaluationError(f"call on '{name}', which holds no object")
            return ref.name
        if name not in self.objects:
            raise EvaluationError(f"call on unknown object '{name}'")
        return name

    def _call(self, cfg: Configuration, proc: Process, stmt: A.Call):
        callee = self._callee(proc, stmt.callee)
        decl = self._method(callee, stmt.method)
        args = tuple(self._eval_in(cfg, proc, a) for a in stmt.args)
        if len(args) != len(decl.params):
            raise EvaluationError(f"{callee}.{stmt.method} expects {len(decl.params)} arguments")
        fut, cfg = cfg.fresh_future()
        cfg = cfg.with_process(Process(callee, fut, stmt.method, decl.body, dict(zip(decl.param_names, args))))
        cfg, proc = self._write(cfg, proc, stmt.target, fut)
        event = Invocation(proc.obj, callee, fut, stmt.method, args, proc.future)
        return event, cfg.with_process(proc)

    def _get(self, cfg: Configuration, proc: Process, stmt: A.Get):
        fut = self._eval_in(cfg, proc, stmt.future)
        if not isinstance(fut, Future):
            raise EvaluationError(f"get on a non-future in {proc.obj}.{proc.method}")
        value = cfg.resolved(fut)
        assert value is not None, f"get on unresolved {fut}"
        cfg, proc = self._write(cfg, proc, stmt.target, value)
        event = Fetch(proc.obj, fut, value, proc.future, self.sites.get(id(stmt)))
        return event, cfg.with_process(proc)

    def _finish(self, cfg: Configuration, proc: Process, expr):
        value = UNIT if expr is None else self._eval_in(cfg, proc, expr)
        proc = replace(proc, stmts=(), done=True, value=value, finished=cfg.clock)
        cfg = cfg.with_object(replace(cfg.object(proc.obj), active=None))
        return Resolving(proc.obj, proc.future, proc.method, value, proc.future), cfg.with_process(proc)


def initial_config(program: A.Program) -> Configuration:
    return Semantics(program).initial()


def enabled_steps(program: A.Program, cfg: Configuration) -> List[StepId]:
    return Semantics(program).enabled(cfg)


def step(program: A.Program, cfg: Configuration, s: StepId):
    return Semantics(program).step(cfg, s)

