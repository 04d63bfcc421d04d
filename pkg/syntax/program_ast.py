"""
AST of Async programs.

Blocks are tuples of statements: a tuple is the flattened, right-associated
form of sequential composition. Source positions are kept on statements for
diagnostics but never take part in equality.

The expression classes below the "formula-only" banner appear only while
parsing formulas; the program builder rejects them.
"""

from dataclasses import dataclass, field
from typing import Optional, Tuple, Union


Pos = Optional[Tuple[int, int]]


@dataclass(frozen=True)
class TypeRef:
    name: str
    arg: Optional["TypeRef"] = None

    @property
    def is_future(self) -> bool:
        return self.name == "Fut"

    def __str__(self) -> str:
        return f"{self.name}<{self.arg}>" if self.arg else self.name


# ----------------------------------
# Expressions
# ----------------------------------

@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class NilLit:
    pass


@dataclass(frozen=True)
class UnitLit:
    pass


@dataclass(frozen=True)
class VarRef:
    name: str


@dataclass(frozen=True)
class FieldRef:
    """this.f"""
    name: str


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class UnOp:
    op: str
    operand: "Expr"


@dataclass(frozen=True)
class Apply:
    fn: str
    args: Tuple["Expr", ...]


# ----------------------------------
# Formula-only expressions
# ----------------------------------

@dataclass(frozen=True)
class TopLit:
    pass


@dataclass(frozen=True)
class ResultRef:
    pass


@dataclass(frozen=True)
class SelfLit:
    pass


@dataclass(frozen=True)
class QualifiedRef:
    """X.f or self.f inside a formula"""
    owner: str
    name: str


@dataclass(frozen=True)
class Quant:
    sort: Optional[str]
    var: str
    body: "Expr"


@dataclass(frozen=True)
class ModalExpr:
    stmts: Tuple["Stmt", ...]
    body: "Expr"


Expr = Union[IntLit, BoolLit, NilLit, UnitLit, VarRef, FieldRef, BinOp, UnOp, Apply,
             TopLit, ResultRef, SelfLit, QualifiedRef, Quant, ModalExpr]

BOOLEAN_OPS = ("&&", "||", "==", "!=", ">=", ">", "<=", "<")


# ----------------------------------
# Statements
# ----------------------------------

@dataclass(frozen=True)
class Location:
    kind: str  # "local" | "field"
    name: str
    owner: Optional[str] = None

    @property
    def is_field(self) -> bool:
        return self.kind == "field"


@dataclass(frozen=True)
class Assign:
    target: Location
    expr: Expr
    declared: Optional[TypeRef] = None
    pos: Pos = field(default=None, compare=False)


@dataclass(frozen=True)
class Call:
    target: Optional[Location]
    callee: str
    method: str
    args: Tuple[Expr, ...]
    declared: Optional[TypeRef] = None
    pos: Pos = field(default=None, compare=False)


@dataclass(frozen=True)
class Get:
    target: Optional[Location]
    future: Expr
    declared: Optional[TypeRef] = None
    pos: Pos = field(default=None, compare=False)


@dataclass(frozen=True)
class Skip:
    pos: Pos = field(default=None, compare=False)


@dataclass(frozen=True)
class If:
    guard: Expr
    then: Tuple["Stmt", ...]
    orelse: Tuple["Stmt", ...] = ()
    pos: Pos = field(default=None, compare=False)


@dataclass(frozen=True)
class While:
    guard: Expr
    body: Tuple["Stmt", ...]
    pos: Pos = field(default=None, compare=False)


@dataclass(frozen=True)
class Return:
    expr: Expr
    pos: Pos = field(default=None, compare=False)


@dataclass(frozen=True)
class Assume:
    """Pseudo-statement used only in checker histories: continue if the formula holds."""
    formula: object


@dataclass(frozen=True)
class Havoc:
    """Pseudo-statement used only in checker histories: forget a location."""
    target: Location


Stmt = Union[Assign, Call, Get, Skip, If, While, Return, Assume, Havoc]


# ----------------------------------
# Declarations
# ----------------------------------

@dataclass(frozen=True)
class Param:
    type: TypeRef
    name: str


@dataclass(frozen=True)
class FieldDecl:
    type: TypeRef
    name: str
    init: Expr


@dataclass(frozen=True)
class MethodDecl:
    return_type: TypeRef
    name: str
    params: Tuple[Param, ...]
    body: Tuple[Stmt, ...]
    pos: Pos = field(default=None, compare=False)

    @property
    def param_names(self) -> Tuple[str, ...]:
        return tuple(p.name for p in self.params)


@dataclass(frozen=True)
class ObjectDecl:
    name: str
    fields: Tuple[FieldDecl, ...]
    methods: Tuple[MethodDecl, ...]

    @property
    def field_names(self) -> Tuple[str, ...]:
        return tuple(f.name for f in self.fields)

    def method(self, name: str) -> Optional[MethodDecl]:
        for m in self.methods:
            if m.name == name:
                return m
        return None


@dataclass(frozen=True)
class MainCall:
    callee: str
    method: str
    args: Tuple[Expr, ...]


@dataclass(frozen=True)
class Program:
    objects: Tuple[ObjectDecl, ...]
    main: MainCall

    @property
    def object_names(self) -> Tuple[str, ...]:
        return tuple(o.name for o in self.objects)

    def object(self, name: str) -> Optional[ObjectDecl]:
        for o in self.objects:
            if o.name == name:
                return o
        return None


# ----------------------------------
# Helpers
# ----------------------------------

def walk_statements(stmts: Tuple[Stmt, ...]):
    """Pre-order walk over statements, descending into if/while bodies."""
    for s in stmts:
        yield s
        if isinstance(s, If):
            yield from walk_statements(s.then)
            yield from walk_statements(s.orelse)
        elif isinstance(s, While):
            yield from walk_statements(s.body)


def is_communication(s: Stmt) -> bool:
    if isinstance(s, (Call, Get, Return)):
        return True
    if isinstance(s, If):
        return any(is_communication(x) for x in s.then + s.orelse)
    if isinstance(s, While):
        return any(is_communication(x) for x in s.body)
    return False


def written_locations(stmts: Tuple[Stmt, ...]):
    out = []
    for s in walk_statements(stmts):
        target = getattr(s, "target", None)
        if isinstance(target, Location) and target not in out:
            out.append(target)
    return out


def expr_vars(e: Expr):
    """Names of local variables read by a program expression."""
    if isinstance(e, VarRef):
        yield e.name
    elif isinstance(e, BinOp):
        yield from expr_vars(e.left)
        yield from expr_vars(e.right)
    elif isinstance(e, UnOp):
        yield from expr_vars(e.operand)
    elif isinstance(e, Apply):
        for a in e.args:
            yield from expr_vars(a)
