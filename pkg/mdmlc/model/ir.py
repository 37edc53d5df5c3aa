"""DSML 模型的内存表示 (PIM / PSM)

所有节点都是不可变的 dataclass；源码位置不参与相等比较，
因此 parse(pretty_print(m)) == m 可以直接用 == 判断结构相等。
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple, Union

from .diagnostics import SourceLocation
from .expr import Expr, Value

PRIMITIVE_TYPES = ("Int", "Long", "Float", "Double", "Bool", "String")
NUMERIC_TYPES = ("Int", "Long", "Float", "Double")


def _loc():
    return field(default=None, compare=False, repr=False)


class ModelKind(str, Enum):
    PIM = "PIM"
    PSM = "PSM"


class LabelsMode(str, Enum):
    ON = "ON"
    OFF = "OFF"
    SEMI = "SEMI"


class Toggle(str, Enum):
    ON = "ON"
    OFF = "OFF"


@dataclass(frozen=True)
class TypeRef:
    name: str
    array_size: Optional[int] = None

    @property
    def is_numeric(self) -> bool:
        return self.name in NUMERIC_TYPES

    @property
    def is_bool(self) -> bool:
        return self.name == "Bool"

    @property
    def width(self) -> int:
        """作为 ML 特征时占用的列数"""
        return self.array_size if self.array_size is not None else 1

    def __str__(self) -> str:
        return f"{self.name}[{self.array_size}]" if self.array_size is not None else self.name


@dataclass(frozen=True)
class Annotation:
    key: str
    value: str
    location: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class Property:
    name: str
    type: TypeRef
    initial: Optional[Expr] = None
    annotations: Tuple[Annotation, ...] = ()
    location: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class Parameter:
    name: str
    type: TypeRef
    location: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class Message:
    name: str
    params: Tuple[Parameter, ...] = ()
    annotations: Tuple[Annotation, ...] = ()
    location: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class Port:
    name: str
    provided: bool = True
    sends: Tuple[str, ...] = ()
    receives: Tuple[str, ...] = ()
    annotations: Tuple[Annotation, ...] = ()
    location: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class EmitAction:
    port: str
    message: str
    args: Tuple[Expr, ...] = ()
    location: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class SetAction:
    property: str
    value: Expr
    location: Optional[SourceLocation] = _loc()


Action = Union[EmitAction, SetAction]


@dataclass(frozen=True)
class State:
    name: str
    on_entry: Tuple[Action, ...] = ()
    annotations: Tuple[Annotation, ...] = ()
    location: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class Trigger:
    port: str
    message: str

    def __str__(self) -> str:
        return f"{self.port}?{self.message}"


@dataclass(frozen=True)
class Transition:
    source: str
    target: str
    trigger: Trigger
    guard: Optional[Expr] = None
    actions: Tuple[Action, ...] = ()
    annotations: Tuple[Annotation, ...] = ()
    location: Optional[SourceLocation] = _loc()

    def describe(self, index: int) -> str:
        return f"transition #{index} {self.source} -> {self.target} on {self.trigger}"


@dataclass(frozen=True)
class Statechart:
    name: str
    initial: str
    states: Tuple[State, ...] = ()
    transitions: Tuple[Transition, ...] = ()
    annotations: Tuple[Annotation, ...] = ()
    location: Optional[SourceLocation] = _loc()

    def state(self, name: str) -> Optional[State]:
        return next((s for s in self.states if s.name == name), None)


@dataclass(frozen=True)
class Hyperparameter:
    name: str
    value: Value
    location: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class ModelAlgorithm:
    name: str
    hyperparameters: Tuple[Hyperparameter, ...] = ()
    location: Optional[SourceLocation] = _loc()

    def get(self, name: str, default=None):
        for hp in self.hyperparameters:
            if hp.name == name:
                return hp.value
        return default


@dataclass(frozen=True)
class DataAnalyticsSpec:
    name: str
    labels: Optional[LabelsMode] = None
    features: Tuple[str, ...] = ()
    prediction_results: Optional[str] = None
    sequential: Optional[bool] = None
    timestamps: Optional[Toggle] = None
    model_algorithm: Optional[ModelAlgorithm] = None
    training_results: Optional[str] = None
    dataset: Optional[str] = None
    annotations: Tuple[Annotation, ...] = ()
    location: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class Thing:
    name: str
    properties: Tuple[Property, ...] = ()
    messages: Tuple[Message, ...] = ()
    ports: Tuple[Port, ...] = ()
    statechart: Optional[Statechart] = None
    analytics: Optional[DataAnalyticsSpec] = None
    annotations: Tuple[Annotation, ...] = ()
    location: Optional[SourceLocation] = _loc()

    def property(self, name: str) -> Optional[Property]:
        return next((p for p in self.properties if p.name == name), None)

    def message(self, name: str) -> Optional[Message]:
        return next((m for m in self.messages if m.name == name), None)

    def port(self, name: str) -> Optional[Port]:
        return next((p for p in self.ports if p.name == name), None)


@dataclass(frozen=True)
class Instance:
    name: str
    thing: str
    annotations: Tuple[Annotation, ...] = ()
    location: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class Endpoint:
    instance: str
    port: str

    def __str__(self) -> str:
        return f"{self.instance}.{self.port}"


@dataclass(frozen=True)
class Connector:
    source: Endpoint
    target: Endpoint
    annotations: Tuple[Annotation, ...] = ()
    location: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class Configuration:
    name: str
    instances: Tuple[Instance, ...] = ()
    connectors: Tuple[Connector, ...] = ()
    annotations: Tuple[Annotation, ...] = ()
    location: Optional[SourceLocation] = _loc()

    def instance(self, name: str) -> Optional[Instance]:
        return next((i for i in self.instances if i.name == name), None)

    def annotation_values(self, key: str) -> Tuple[str, ...]:
        return tuple(a.value for a in self.annotations if a.key == key)


@dataclass(frozen=True)
class AnnotationOverlay:
    """`annotate Thing.member @key value`：PSM 给 PIM 节点追加注解"""
    target: Tuple[str, ...]
    annotations: Tuple[Annotation, ...] = ()
    location: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class Import:
    path: str
    location: Optional[SourceLocation] = _loc()


@dataclass(frozen=True)
class SourceModel:
    imports: Tuple[Import, ...] = ()
    things: Tuple[Thing, ...] = ()
    configurations: Tuple[Configuration, ...] = ()
    annotations: Tuple[Annotation, ...] = ()
    overlays: Tuple[AnnotationOverlay, ...] = ()
    path: Optional[str] = field(default=None, compare=False, repr=False)

    @property
    def kind(self) -> ModelKind:
        return ModelKind.PSM if self.configurations else ModelKind.PIM

    @property
    def is_empty(self) -> bool:
        return not (self.imports or self.things or self.configurations
                    or self.annotations or self.overlays)

    def thing(self, name: str) -> Optional[Thing]:
        return next((t for t in self.things if t.name == name), None)

    def configuration(self, name: str) -> Optional[Configuration]:
        return next((c for c in self.configurations if c.name == name), None)


# 节点路径：诊断、来源追踪与有效注解都以它为键
def thing_path(thing: str) -> str:
    return f"thing:{thing}"


def member_path(thing: str, kind: str, name: str) -> str:
    return f"thing:{thing}/{kind}:{name}"


def configuration_path(config: str) -> str:
    return f"configuration:{config}"
