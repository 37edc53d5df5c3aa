"""规范化输出：parse(pretty_print(m)) == m"""
import re
from typing import Iterable, List

from ..model import expr as ex
from ..model.ir import (
    Annotation,
    Configuration,
    DataAnalyticsSpec,
    EmitAction,
    Message,
    Port,
    Property,
    SourceModel,
    State,
    Statechart,
    Thing,
    Transition,
)
from .lexer import KEYWORDS, escape

INDENT = "    "
_BAREWORD = re.compile(r"[A-Za-z0-9_+.-]+")
_IDENTIFIER = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, int):
        return str(value)
    return f'"{escape(value)}"'


def _annotation_value(value: str) -> str:
    if _BAREWORD.fullmatch(value):
        return value
    return f'"{escape(value)}"'


def _hyper_value(value) -> str:
    if isinstance(value, str) and _IDENTIFIER.fullmatch(value) and value not in KEYWORDS:
        return value
    return format_value(value)


def format_annotations(annotations: Iterable[Annotation]) -> str:
    return "".join(f" @{a.key} {_annotation_value(a.value)}" for a in annotations)


def format_expr(e: ex.Expr, parent_prec: int = 0, right: bool = False) -> str:
    """只在优先级需要时加括号（二元运算左结合）"""
    if isinstance(e, ex.Literal):
        return format_value(e.value)
    if isinstance(e, ex.Name):
        return e.id
    if isinstance(e, ex.Unary):
        operand = e.operand
        inner = format_expr(operand, ex.UNARY_PRECEDENCE)
        if e.op == "not":
            return f"not {inner}"
        # "-3" 会被读回成负数字面量，因此对数字取负需要括号
        if (isinstance(operand, ex.Literal) and not isinstance(operand.value, bool)
                and isinstance(operand.value, (int, float))):
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(e, ex.Binary):
        prec = ex.PRECEDENCE[e.op]
        text = f"{format_expr(e.left, prec)} {e.op} {format_expr(e.right, prec, right=True)}"
        if prec < parent_prec or (right and prec == parent_prec):
            return f"({text})"
        return text
    raise TypeError(f"unknown expression node {e!r}")


def _action(action) -> str:
    if isinstance(action, EmitAction):
        args = ", ".join(format_expr(a) for a in action.args)
        return f"emit {action.port}!{action.message}({args});"
    return f"set {action.property} = {format_expr(action.value)};"


def _action_block(actions, depth: int) -> List[str]:
    pad = INDENT * depth
    return [pad + _action(a) for a in actions]


class _Printer:
    def __init__(self):
        self.lines: List[str] = []

    def emit(self, depth: int, text: str) -> None:
        self.lines.append(INDENT * depth + text)

    def property(self, p: Property, depth: int) -> None:
        initial = f" = {format_expr(p.initial)}" if p.initial is not None else ""
        self.emit(depth, f"property {p.name} : {p.type}{initial}{format_annotations(p.annotations)};")

    def message(self, m: Message, depth: int) -> None:
        params = ", ".join(f"{p.name} : {p.type}" for p in m.params)
        self.emit(depth, f"message {m.name}({params}){format_annotations(m.annotations)};")

    def port(self, p: Port, depth: int) -> None:
        kind = "provided" if p.provided else "required"
        head = f"{kind} port {p.name}{format_annotations(p.annotations)} {{"
        if not (p.sends or p.receives):
            self.emit(depth, head + " }")
            return
        self.emit(depth, head)
        if p.sends:
            self.emit(depth + 1, f"sends {', '.join(p.sends)};")
        if p.receives:
            self.emit(depth + 1, f"receives {', '.join(p.receives)};")
        self.emit(depth, "}")

    def state(self, s: State, depth: int) -> None:
        head = f"state {s.name}{format_annotations(s.annotations)}"
        if not s.on_entry:
            self.emit(depth, head + ";")
            return
        self.emit(depth, head + " {")
        self.emit(depth + 1, "on entry {")
        self.lines.extend(_action_block(s.on_entry, depth + 2))
        self.emit(depth + 1, "}")
        self.emit(depth, "}")

    def transition(self, t: Transition, depth: int) -> None:
        text = f"transition {t.source} -> {t.target} event {t.trigger.port}?{t.trigger.message}"
        if t.guard is not None:
            text += f" guard {format_expr(t.guard)}"
        tail = f"{format_annotations(t.annotations)};"
        if not t.actions:
            self.emit(depth, text + tail)
            return
        self.emit(depth, text + " action {")
        self.lines.extend(_action_block(t.actions, depth + 1))
        self.emit(depth, "}" + tail)

    def statechart(self, sc: Statechart, depth: int) -> None:
        self.emit(depth, f"statechart {sc.name} init {sc.initial}{format_annotations(sc.annotations)} {{")
        for s in sc.states:
            self.state(s, depth + 1)
        for t in sc.transitions:
            self.transition(t, depth + 1)
        self.emit(depth, "}")

    def analytics(self, da: DataAnalyticsSpec, depth: int) -> None:
        self.emit(depth, f"data_analytics {da.name}{format_annotations(da.annotations)} {{")
        inner = depth + 1
        if da.labels is not None:
            self.emit(inner, f"labels {da.labels.value};")
        if da.features:
            self.emit(inner, f"features {', '.join(da.features)};")
        if da.prediction_results is not None:
            self.emit(inner, f"prediction_results {da.prediction_results};")
        if da.sequential is not None:
            self.emit(inner, f"sequential {format_value(da.sequential)};")
        if da.timestamps is not None:
            self.emit(inner, f"timestamps {da.timestamps.value};")
        if da.model_algorithm is not None:
            algo = da.model_algorithm
            hyper = ", ".join(f"{h.name} {_hyper_value(h.value)}" for h in algo.hyperparameters)
            self.emit(inner, f"model_algorithm {algo.name}({hyper});")
        if da.training_results is not None:
            self.emit(inner, f"training_results {format_value(da.training_results)};")
        if da.dataset is not None:
            self.emit(inner, f"dataset {format_value(da.dataset)};")
        self.emit(depth, "}")

    def thing(self, t: Thing) -> None:
        self.emit(0, f"thing {t.name}{format_annotations(t.annotations)} {{")
        for p in t.properties:
            self.property(p, 1)
        for m in t.messages:
            self.message(m, 1)
        for p in t.ports:
            self.port(p, 1)
        if t.statechart is not None:
            self.statechart(t.statechart, 1)
        if t.analytics is not None:
            self.analytics(t.analytics, 1)
        self.emit(0, "}")

    def configuration(self, c: Configuration) -> None:
        self.emit(0, f"configuration {c.name} {{")
        for i in c.instances:
            self.emit(1, f"instance {i.name} : {i.thing}{format_annotations(i.annotations)};")
        for conn in c.connectors:
            self.emit(1, f"connector {conn.source} => {conn.target}{format_annotations(conn.annotations)};")
        for a in c.annotations:
            self.emit(1, f"@{a.key} {_annotation_value(a.value)};")
        self.emit(0, "}")


def pretty_print(model: SourceModel) -> str:
    """空模型输出空串；否则以单个换行结尾"""
    if model.is_empty:
        return ""
    printer = _Printer()
    sections = []

    if model.imports:
        sections.append([f'import "{escape(i.path)}";' for i in model.imports])
    if model.annotations:
        sections.append([f"@{a.key} {_annotation_value(a.value)};" for a in model.annotations])
    for thing in model.things:
        printer.lines = []
        printer.thing(thing)
        sections.append(printer.lines)
    if model.overlays:
        sections.append([f"annotate {'.'.join(o.target)}{format_annotations(o.annotations)};"
                         for o in model.overlays])
    for config in model.configurations:
        printer.lines = []
        printer.configuration(config)
        sections.append(printer.lines)

    return "\n\n".join("\n".join(lines) for lines in sections) + "\n"
