"""
Verdict records shared by the analyses and the CLI.

A Report collects Diagnostic entries instead of stopping at the first
failure, so one `check` run lists every broken premise.
"""

import json
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional

from utils.errors import AsyncstError, ProjectionUndefined, TypingError

REPORT_SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_REJECTED = 1
EXIT_UNKNOWN = 2
EXIT_USAGE = 64


@dataclass
class Diagnostic:
    stage: str
    rule: str
    message: str
    location: str = ""
    formula: Optional[str] = None
    counterexample: Optional[Dict[str, str]] = None
    unknown: bool = False

    def render(self) -> str:
        text = f"[{self.stage}] {self.rule}: {self.message}"
        if self.location:
            text += f" ({self.location})"
        if self.formula:
            text += f"\n    formula: {self.formula}"
        if self.counterexample:
            pairs = ", ".join(f"{k} = {v}" for k, v in self.counterexample.items())
            text += f"\n    counterexample: {pairs}"
        return text


@dataclass
class Report:
    diagnostics: List[Diagnostic] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.diagnostics

    @property
    def unknown(self) -> bool:
        return any(d.unknown for d in self.diagnostics)

    def fail(self, stage: str, rule: str, message: str, **details) -> Diagnostic:
        diagnostic = Diagnostic(stage, rule, message, **details)
        self.diagnostics.append(diagnostic)
        return diagnostic

    def warn(self, message: str) -> None:
        if message not in self.warnings:
            self.warnings.append(message)

    def add_error(self, stage: str, exc: AsyncstError) -> Diagnostic:
        if isinstance(exc, TypingError):
            return self.fail(
                stage, exc.rule, str(exc), location=exc.location, formula=exc.formula,
                counterexample=exc.counterexample, unknown=exc.unknown,
            )
        if isinstance(exc, ProjectionUndefined):
            return self.fail(stage, exc.rule, str(exc), location=exc.location)
        return self.fail(stage, type(exc).__name__, str(exc))

    def extend(self, other: "Report") -> "Report":
        self.diagnostics.extend(other.diagnostics)
        for w in other.warnings:
            self.warn(w)
        return self

    def exit_code(self) -> int:
        """0 if ok, 2 if every failure is an Unknown verdict, 1 otherwise."""
        if self.ok:
            return EXIT_OK
        if all(d.unknown for d in self.diagnostics):
            return EXIT_UNKNOWN
        return EXIT_REJECTED

    def to_dict(self) -> dict:
        return {
            "version": REPORT_SCHEMA_VERSION,
            "ok": self.ok,
            "unknown": self.unknown,
            "diagnostics": [asdict(d) for d in self.diagnostics],
            "warnings": list(self.warnings),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)
