"""语义检查：data_analytics 关键字约定、算法注册表、配置与连接器

check_semantics 返回诊断列表而不抛异常；诊断为空的 LinkedModel 可直接交给
训练与代码生成。
"""
import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

from ..core.config import Config, get_config
from ..core.errors import SemanticError
from ..ml.mlp import ACTIVATIONS, MlpArchitecture
from ..ml.training import TrainConfig
from ..model.diagnostics import Diagnostic, error, has_errors
from ..model.ir import (
    Configuration,
    DataAnalyticsSpec,
    LabelsMode,
    SourceModel,
    Thing,
    configuration_path,
    member_path,
)
from ..model.validate import validate_structure
from .linker import LinkedModel
from .platforms import PlatformRegistry, default_registry

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class HyperparameterSpec:
    name: str
    kind: str  # int | float | choice | layers
    check: Callable[[object], Optional[str]]


def _int_at_least(low: int):
    def check(value):
        if isinstance(value, bool) or not isinstance(value, int):
            return f"expected an integer, got {value!r}"
        if value < low:
            return f"must be at least {low}, got {value}"
        return None
    return check


def _float_range(low: float, high: Optional[float] = None, open_low: bool = False):
    def check(value):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            return f"expected a number, got {value!r}"
        if value < low or (open_low and value == low):
            return f"must be {'>' if open_low else '>='} {low}, got {value}"
        if high is not None and value >= high:
            return f"must be < {high}, got {value}"
        return None
    return check


def _choice(*options: str):
    def check(value):
        if value not in options:
            return f"expected one of {', '.join(options)}, got {value!r}"
        return None
    return check


def parse_layer_sizes(value) -> Tuple[int, ...]:
    """hidden_layer_sizes 32 或 "32,16" """
    if isinstance(value, bool):
        raise ValueError(f"expected layer sizes, got {value!r}")
    if isinstance(value, int):
        sizes = (value,)
    elif isinstance(value, str):
        try:
            sizes = tuple(int(part) for part in value.split(",") if part.strip())
        except ValueError:
            raise ValueError(f"expected comma-separated integers, got {value!r}")
    else:
        raise ValueError(f"expected layer sizes, got {value!r}")
    if not sizes or any(s < 1 for s in sizes):
        raise ValueError(f"layer sizes must be positive integers, got {value!r}")
    return sizes


def _layers(value):
    try:
        parse_layer_sizes(value)
    except ValueError as e:
        return str(e)
    return None


@dataclass(frozen=True)
class AlgorithmSpec:
    name: str
    hyperparameters: Tuple[HyperparameterSpec, ...]
    requires_labels: bool = True

    def parameter(self, name: str) -> Optional[HyperparameterSpec]:
        return next((h for h in self.hyperparameters if h.name == name), None)

    @property
    def parameter_names(self) -> List[str]:
        return [h.name for h in self.hyperparameters]


ALGORITHMS: Dict[str, AlgorithmSpec] = {
    "mlp": AlgorithmSpec("mlp", (
        HyperparameterSpec("hidden_layer_sizes", "layers", _layers),
        HyperparameterSpec("activation", "choice", _choice(*ACTIVATIONS)),
        HyperparameterSpec("output_activation", "choice", _choice(*ACTIVATIONS)),
        HyperparameterSpec("learning_rate", "float", _float_range(0.0)),
        HyperparameterSpec("batch_size", "int", _int_at_least(1)),
        HyperparameterSpec("epochs", "int", _int_at_least(1)),
        HyperparameterSpec("patience", "int", _int_at_least(0)),
        HyperparameterSpec("validation_fraction", "float", _float_range(0.0, 1.0, open_low=True)),
        HyperparameterSpec("optimizer", "choice", _choice("adam")),
        HyperparameterSpec("loss", "choice", _choice("binary_crossentropy")),
    )),
}


def feature_width(thing: Thing, da: DataAnalyticsSpec) -> int:
    """特征列数：数组属性按元素个数计"""
    return sum(thing.property(f).type.width for f in da.features if thing.property(f) is not None)


def _check_analytics(thing: Thing, da: DataAnalyticsSpec, out: List[Diagnostic]) -> None:
    node = member_path(thing.name, "data_analytics", da.name)
    where = da.location

    if not da.features:
        out.append(error(node, f"data_analytics {da.name} declares no features", where))
    for feature in da.features:
        prop = thing.property(feature)
        if prop is not None and not (prop.type.is_numeric or prop.type.is_bool):
            out.append(error(node, f"feature '{feature}' has type {prop.type}; features must be numeric or Bool",
                             where))
    if da.prediction_results is not None:
        prop = thing.property(da.prediction_results)
        if prop is not None and not (prop.type.is_numeric or prop.type.is_bool):
            out.append(error(node, f"prediction_results '{da.prediction_results}' has type {prop.type}; "
                                   f"it must be numeric or Bool", where))
        if prop is not None and prop.type.array_size is not None:
            out.append(error(node, f"prediction_results '{da.prediction_results}' must be a scalar", where))
        if da.prediction_results in da.features:
            out.append(error(node, f"prediction_results '{da.prediction_results}' is also listed as a feature",
                             where))

    if da.labels is LabelsMode.ON and da.prediction_results is None:
        out.append(error(node, "labels ON requires a label column: declare prediction_results", where))

    algo = da.model_algorithm
    if algo is None:
        out.append(error(node, f"data_analytics {da.name} declares no model_algorithm", where))
        return
    spec = ALGORITHMS.get(algo.name)
    if spec is None:
        out.append(error(node, f"unknown model_algorithm '{algo.name}' (known: {', '.join(sorted(ALGORITHMS))})",
                         algo.location or where))
        return
    if spec.requires_labels and da.labels is not LabelsMode.ON:
        shown = da.labels.value if da.labels else "unset"
        out.append(error(node, f"model_algorithm {algo.name} is supervised and requires labels ON "
                               f"(labels is {shown})", algo.location or where))
    seen = set()
    for hp in algo.hyperparameters:
        hp_where = hp.location or algo.location or where
        if hp.name in seen:
            out.append(error(node, f"hyperparameter '{hp.name}' given more than once", hp_where))
        seen.add(hp.name)
        hp_spec = spec.parameter(hp.name)
        if hp_spec is None:
            out.append(error(node, f"unknown hyperparameter '{hp.name}' for {algo.name} "
                                   f"(expected one of {', '.join(spec.parameter_names)})", hp_where))
            continue
        problem = hp_spec.check(hp.value)
        if problem:
            out.append(error(node, f"hyperparameter '{hp.name}': {problem}", hp_where))


def _check_configuration(linked: LinkedModel, config: Configuration, registry: PlatformRegistry,
                         out: List[Diagnostic]) -> None:
    model = linked.model
    node = configuration_path(config.name)
    if not config.instances:
        out.append(error(node, f"configuration {config.name} instantiates no thing", config.location))

    declared = config.annotation_values("compiler")
    if len(declared) > 1:
        out.append(error(node, f"configuration {config.name} has {len(declared)} @compiler annotations; "
                               f"exactly one is required", config.location))
    compiler = linked.compiler_of(config.name)
    if compiler is None:
        out.append(error(node, f"configuration {config.name} has no @compiler annotation "
                               f"(valid targets: {', '.join(registry.ids)})", config.location))
    elif compiler not in registry:
        out.append(error(node, f"@compiler '{compiler}' is not a known target "
                               f"(valid targets: {', '.join(registry.ids)})", config.location))

    analytic = [i for i in config.instances
                if model.thing(i.thing) is not None and model.thing(i.thing).analytics is not None]
    if len(analytic) > 1:
        names = ", ".join(i.name for i in analytic)
        out.append(error(node, f"configuration {config.name} deploys more than one data_analytics "
                               f"instance ({names}); at most one model per configuration", config.location))

    for index, conn in enumerate(config.connectors):
        ends = []
        for end in (conn.source, conn.target):
            inst = config.instance(end.instance)
            thing = model.thing(inst.thing) if inst else None
            port = thing.port(end.port) if thing else None
            if port is None:
                break
            ends.append((thing, port))
        if len(ends) != 2:
            continue
        (t1, p1), (t2, p2) = ends
        for name in sorted(set(p1.sends + p1.receives) & set(p2.sends + p2.receives)):
            m1, m2 = t1.message(name), t2.message(name)
            if m1 is None or m2 is None:
                continue
            sig1 = tuple(str(p.type) for p in m1.params)
            sig2 = tuple(str(p.type) for p in m2.params)
            if sig1 != sig2:
                out.append(error(f"{node}/connector:{index}",
                                 f"connector {conn.source} => {conn.target}: message '{name}' has parameter "
                                 f"types ({', '.join(sig1)}) on {t1.name} but ({', '.join(sig2)}) on {t2.name}",
                                 conn.location))


def check_semantics(linked: LinkedModel, registry: Optional[PlatformRegistry] = None) -> List[Diagnostic]:
    registry = registry or default_registry()
    out: List[Diagnostic] = list(linked.diagnostics)
    out.extend(validate_structure(linked.model))
    for thing in linked.model.things:
        if thing.analytics is not None:
            _check_analytics(thing, thing.analytics, out)
    for config in linked.model.configurations:
        _check_configuration(linked, config, registry, out)
    logger.debug(f"[语义] {linked.model.path or '<model>'}: {len(out)} 条诊断")
    return out


def require_valid(linked: LinkedModel, registry: Optional[PlatformRegistry] = None) -> List[Diagnostic]:
    """有错误时抛出 SemanticError，否则返回（可能包含警告的）诊断"""
    diagnostics = check_semantics(linked, registry)
    if has_errors(diagnostics):
        first = next(d for d in diagnostics if d.severity.value == "error")
        raise SemanticError(str(first), diagnostics)
    return diagnostics


@dataclass(frozen=True)
class TrainingPlan:
    """由 data_analytics 推导出的训练计划，训练命令与代码生成共用"""
    thing: str
    architecture: MlpArchitecture
    train_config: TrainConfig
    features: Tuple[str, ...]
    label: Optional[str]
    dataset: Optional[str]
    training_results: Optional[str]
    train_fraction: float = 0.8

    @property
    def shuffle(self) -> bool:
        return self.train_config.shuffle


def analytics_thing(model: SourceModel, configuration: Optional[str] = None) -> Thing:
    """配置中唯一带 data_analytics 的 thing；无配置名时在全部 thing 中查找"""
    if configuration is not None:
        config = model.configuration(configuration)
        if config is None:
            raise SemanticError(f"unknown configuration '{configuration}'")
        candidates = []
        for inst in config.instances:
            thing = model.thing(inst.thing)
            if thing is not None and thing.analytics is not None and thing not in candidates:
                candidates.append(thing)
    else:
        candidates = [t for t in model.things if t.analytics is not None]
    if not candidates:
        where = f"configuration {configuration}" if configuration else "the model"
        raise SemanticError(f"{where} has no thing with a data_analytics block")
    if len(candidates) > 1:
        names = ", ".join(t.name for t in candidates)
        raise SemanticError(f"several things carry data_analytics ({names}); name a configuration")
    return candidates[0]


def plan_training(linked: LinkedModel, configuration: Optional[str] = None,
                  config: Optional[Config] = None) -> TrainingPlan:
    config = config or get_config()
    thing = analytics_thing(linked.model, configuration)
    da = thing.analytics
    algo = da.model_algorithm
    if algo is None:
        raise SemanticError(f"data_analytics {da.name} declares no model_algorithm")

    hidden = parse_layer_sizes(algo.get("hidden_layer_sizes", 32))
    dims = (feature_width(thing, da),) + hidden + (2,)
    architecture = MlpArchitecture.build(dims, hidden=algo.get("activation", "relu"),
                                         output=algo.get("output_activation", "sigmoid"))
    train_config = TrainConfig.from_config(
        config,
        learning_rate=algo.get("learning_rate"),
        batch_size=algo.get("batch_size"),
        max_epochs=algo.get("epochs"),
        early_stop_patience=algo.get("patience"),
        validation_fraction=algo.get("validation_fraction"),
        # sequential true（或未声明）时不打乱样本
        shuffle=da.sequential is False,
    )
    return TrainingPlan(
        thing=thing.name,
        architecture=architecture,
        train_config=train_config,
        features=da.features,
        label=da.prediction_results,
        dataset=da.dataset,
        training_results=da.training_results,
        train_fraction=float(config.get("training.train_fraction", 0.8)),
    )
