"""诊断信息与源码位置"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class SourceLocation:
    """源码位置（行列均从 1 开始）"""
    line: int
    column: int
    file: Optional[str] = None

    def __str__(self) -> str:
        prefix = f"{self.file}:" if self.file else ""
        return f"{prefix}{self.line}:{self.column}"


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    node: str
    message: str
    location: Optional[SourceLocation] = field(default=None)

    def __str__(self) -> str:
        where = f"{self.location}: " if self.location else ""
        return f"{where}{self.severity.value}: {self.message} [{self.node}]"

    def to_dict(self) -> dict:
        loc = self.location
        return {
            "severity": self.severity.value,
            "node": self.node,
            "message": self.message,
            "file": loc.file if loc else None,
            "line": loc.line if loc else None,
            "column": loc.column if loc else None,
        }


def error(node: str, message: str, location: Optional[SourceLocation] = None) -> Diagnostic:
    return Diagnostic(Severity.ERROR, node, message, location)


def warning(node: str, message: str, location: Optional[SourceLocation] = None) -> Diagnostic:
    return Diagnostic(Severity.WARNING, node, message, location)


def has_errors(diagnostics) -> bool:
    return any(d.severity is Severity.ERROR for d in diagnostics)
