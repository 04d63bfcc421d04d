"""
Exception types shared by every analysis stage.

All of them derive from ValueError so callers that only guard against bad
input keep working; the CLI maps them to exit codes.
"""

from typing import Optional, Tuple


class AsyncstError(ValueError):
    """Base class for all analysis errors"""


class ParseError(AsyncstError):
    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        where = f" at {line}:{column}" if line is not None else ""
        super().__init__(f"{message}{where}")


class ResolutionError(ParseError):
    """Duplicate or unresolved names, return-position violations."""


class ProjectionUndefined(AsyncstError):
    def __init__(self, rule: str, location: str, detail: str = ""):
        self.rule = rule
        self.location = location
        self.detail = detail
        text = f"{rule} does not apply at {location}"
        if detail:
            text += f": {detail}"
        super().__init__(text)


class UnsupportedStatement(AsyncstError):
    """Raised by wp for statement forms it cannot transform (loops)."""


class EvaluationError(AsyncstError):
    """A formula or expression could not be evaluated in a configuration."""


class TypingError(AsyncstError):
    def __init__(
        self,
        rule: str,
        message: str,
        location: str = "",
        formula: Optional[str] = None,
        counterexample: Optional[dict] = None,
        unknown: bool = False,
        reasons: Tuple["TypingError", ...] = (),
    ):
        self.rule = rule
        self.location = location
        self.formula = formula
        self.counterexample = counterexample
        # Unknown validity verdicts are reported separately (exit code 2)
        self.unknown = unknown
        # failures of the alternatives tried before giving up
        self.reasons = reasons
        super().__init__(f"[{rule}] {message}" + (f" ({location})" if location else ""))

    def as_tuple(self) -> Tuple[str, str]:
        return self.rule, str(self)
