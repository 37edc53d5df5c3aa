"""模型 IR：结构、ML 规格、状态机行为、注解与配置"""
from .diagnostics import Diagnostic, Severity, SourceLocation
from .ir import ModelKind, SourceModel
from .statechart import Event, StateTrace, simulate_statechart
from .validate import validate_structure

__all__ = [
    "Diagnostic",
    "Event",
    "ModelKind",
    "Severity",
    "SourceLocation",
    "SourceModel",
    "StateTrace",
    "simulate_statechart",
    "validate_structure",
]
