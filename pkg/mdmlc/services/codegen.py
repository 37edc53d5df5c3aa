"""代码生成：按目标平台把 PSM 渲染成完整源码树

模板放在 mdmlc/templates/ 下，每个生成器族一个子目录。表达式、类型映射与
标识符转义都在这里完成，模板里只有对模型集合的循环。
"""
import hashlib
import json
import keyword
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Tuple, Union

from jinja2 import Environment, PackageLoader, StrictUndefined

from ..convert.carray import emit_carray
from ..convert.mlq import save
from ..convert.quantize import QuantizedMlpModel, quantize
from ..core.config import Config, get_config
from ..core.errors import DeploymentRejected, SemanticError
from ..core.files import atomic_write
from ..ml.data import Standardizer
from ..ml.mlp import MlpModel, initial_model
from ..model import expr as ex
from ..model.ir import (
    EmitAction,
    Property,
    SetAction,
    Thing,
    TypeRef,
    member_path,
)
from ..parser.printer import pretty_print
from .linker import LinkedModel
from .platforms import (
    DeployPolicy,
    PlatformProfile,
    PlatformRegistry,
    check_deployability,
    default_registry,
    estimate_sizes,
)
from .semantics import TrainingPlan, analytics_thing, plan_training, require_valid

logger = logging.getLogger(__name__)

AnyModel = Union[MlpModel, QuantizedMlpModel]

MODEL_FILE = "model/model.mlq"
SCALER_FILE = "model/model.scaler.json"
CARRAY_FILE = "model/model_data.cc"

PY_DEFAULTS = {"Int": "0", "Long": "0", "Float": "0.0", "Double": "0.0", "Bool": "False", "String": '""'}
CPP_TYPES = {"Int": "int32_t", "Long": "int64_t", "Float": "float", "Double": "double", "Bool": "bool",
             "String": "String"}
JAVA_TYPES = {"Int": "int", "Long": "long", "Float": "float", "Double": "double", "Bool": "boolean",
              "String": "String"}

CPP_KEYWORDS = frozenset("""
    alignas alignof and and_eq asm auto bitand bitor bool break case catch char class compl const constexpr
    const_cast continue decltype default delete do double dynamic_cast else enum explicit export extern false
    float for friend goto if inline int long mutable namespace new noexcept not not_eq nullptr operator or
    or_eq private protected public register reinterpret_cast return short signed sizeof static static_assert
    static_cast struct switch template this thread_local throw true try typedef typeid typename union unsigned
    using virtual void volatile wchar_t while xor xor_eq setup loop
""".split())
JAVA_KEYWORDS = frozenset("""
    abstract assert boolean break byte case catch char class const continue default do double else enum extends
    final finally float for goto if implements import instanceof int interface long native new package private
    protected public return short static strictfp super switch synchronized this throw throws transient try void
    volatile while true false null var record yield
""".split())


def py_ident(name: str) -> str:
    return f"{name}_" if keyword.iskeyword(name) else name


def cpp_ident(name: str) -> str:
    return f"{name}_" if name in CPP_KEYWORDS else name


def java_ident(name: str) -> str:
    return f"{name}_" if name in JAVA_KEYWORDS else name


def camel(*parts: str) -> str:
    """('receive', 'sensor', 'reading') -> receiveSensorReading"""
    head, *rest = parts
    return head + "".join(p[:1].upper() + p[1:] for p in rest)


def string_literal(value: str) -> str:
    """Python、C++、Java 共用的双引号字符串字面量"""
    return json.dumps(value)


def _float_literal(value: float) -> str:
    text = repr(float(value))
    if text in ("inf", "-inf", "nan"):
        raise SemanticError(f"non-finite literal {text} cannot be generated")
    return text


class ExprRenderer:
    """把守卫/动作表达式翻译成目标语言源码"""

    def __init__(self, language: str, properties: Mapping[str, Property], params: Mapping[str, TypeRef] = None):
        self.language = language
        self.properties = properties
        self.params = dict(params or {})

    def literal(self, value) -> str:
        if isinstance(value, bool):
            if self.language == "python":
                return "True" if value else "False"
            return "true" if value else "false"
        if isinstance(value, int):
            return str(value)
        if isinstance(value, float):
            return _float_literal(value)
        return string_literal(value)

    def name(self, name: str) -> str:
        # 消息参数遮蔽同名属性
        if self.language == "python":
            return py_ident(name) if name in self.params else f"self.{py_ident(name)}"
        if self.language == "java":
            return java_ident(name) if name in self.params else f"this.{java_ident(name)}"
        return cpp_ident(name)

    def render(self, e: ex.Expr, nested: bool = False) -> str:
        if isinstance(e, ex.Literal):
            return self.literal(e.value)
        if isinstance(e, ex.Name):
            return self.name(e.id)
        if isinstance(e, ex.Unary):
            inner = self.render(e.operand, nested=True)
            if e.op == "not":
                text = f"not {inner}" if self.language == "python" else f"!{inner}"
            else:
                text = f"-{inner}"
            return f"({text})" if nested else text
        left = self.render(e.left, nested=True)
        right = self.render(e.right, nested=True)
        if self.language == "python" and e.op == "/":
            return f"_div({left}, {right})"
        if self.language == "java" and e.op in ("==", "!=") and self._is_string(e):
            text = f"java.util.Objects.equals({left}, {right})"
            return text if e.op == "==" else f"!{text}"
        op = e.op
        if self.language != "python":
            op = {"and": "&&", "or": "||"}.get(op, op)
        text = f"{left} {op} {right}"
        return f"({text})" if nested else text

    def _is_string(self, e: ex.Binary) -> bool:
        for side in (e.left, e.right):
            if isinstance(side, ex.Literal) and isinstance(side.value, str):
                return True
            if isinstance(side, ex.Name):
                t = self.params.get(side.id)
                if t is None and side.id in self.properties:
                    t = self.properties[side.id].type
                if t is not None and t.name == "String":
                    return True
        return False


def _mapped_type(linked: LinkedModel, thing: Thing, prop: Property, table: Dict[str, str]) -> str:
    """@type_mapping "Int -> short" 或 @type_mapping short 覆盖默认类型"""
    mapped = linked.annotation(member_path(thing.name, "property", prop.name), "type_mapping")
    if mapped:
        return mapped.split("->")[-1].strip()
    return table[prop.type.name]


def _action_lines(renderer: ExprRenderer, thing: Thing, actions, java_types: Dict[str, str]) -> List[str]:
    lang = renderer.language
    lines = []
    for action in actions:
        if isinstance(action, EmitAction):
            message = thing.message(action.message)
            params = message.params if message else ()
            args = []
            for index, a in enumerate(action.args):
                text = renderer.render(a)
                if lang == "java" and index < len(params):
                    text = _java_cast(JAVA_TYPES[params[index].type.name], text)
                args.append(text)
            if lang == "python":
                lines.append(f"self.send_{action.port}_{action.message}({', '.join(args)})")
            elif lang == "java":
                lines.append(f"{camel('send', action.port, action.message)}({', '.join(args)});")
            else:
                lines.append(f"send_{action.port}_{action.message}({', '.join(args)});")
        elif isinstance(action, SetAction):
            value = renderer.render(action.value)
            if lang == "python":
                lines.append(f"self.{py_ident(action.property)} = {value}")
            elif lang == "java":
                value = _java_cast(java_types.get(action.property, ""), value)
                lines.append(f"this.{java_ident(action.property)} = {value};")
            else:
                lines.append(f"{cpp_ident(action.property)} = {value};")
    return lines


def _java_cast(java_type: str, text: str) -> str:
    if java_type in ("float", "short", "byte", "char"):
        return f"({java_type}) ({text})"
    return text


def _property_view(linked: LinkedModel, thing: Thing, prop: Property) -> dict:
    py_base = PY_DEFAULTS[prop.type.name]
    cpp_type = _mapped_type(linked, thing, prop, CPP_TYPES)
    java_type = _mapped_type(linked, thing, prop, JAVA_TYPES)
    props = {p.name: p for p in thing.properties}
    view = {
        "name": prop.name,
        "py_name": py_ident(prop.name),
        "cpp_name": cpp_ident(prop.name),
        "java_name": java_ident(prop.name),
        "cpp_type": cpp_type,
        "java_type": java_type,
        "array_size": prop.type.array_size,
    }
    if prop.type.array_size is not None:
        view["py_init"] = f"[{py_base}] * {prop.type.array_size}"
        view["cpp_init"] = "{}"
        view["java_init"] = f"new {java_type}[{prop.type.array_size}]"
        view["java_decl"] = f"{java_type}[]"
    else:
        if prop.initial is not None:
            view["py_init"] = ExprRenderer("python", props).render(prop.initial)
            view["cpp_init"] = ExprRenderer("cpp", props).render(prop.initial)
            view["java_init"] = _java_cast(java_type, ExprRenderer("java", props).render(prop.initial))
        else:
            view["py_init"] = py_base
            view["cpp_init"] = "{}"
            view["java_init"] = None
        view["java_decl"] = java_type
    return view


def _signature(params) -> dict:
    """形参表与实参表在三种语言下的写法"""
    py_names = [py_ident(p.name) for p in params]
    cpp_names = [cpp_ident(p.name) for p in params]
    java_names = [java_ident(p.name) for p in params]
    cpp_types = [CPP_TYPES[p.type.name] for p in params]
    java_types = [JAVA_TYPES[p.type.name] for p in params]
    return {
        "py_sig": "".join(f", {n}" for n in py_names),
        "py_args": ", ".join(py_names),
        "cpp_sig": ", ".join(f"{t} {n}" for t, n in zip(cpp_types, cpp_names)),
        "cpp_types": ", ".join(cpp_types),
        "cpp_args": ", ".join(cpp_names),
        "java_sig": ", ".join(f"{t} {n}" for t, n in zip(java_types, java_names)),
        "java_args": ", ".join(java_names),
    }


def _statechart_view(linked: LinkedModel, thing: Thing, language: str) -> dict:
    """按 (端口, 消息) 分组的迁移处理函数；组内保持声明顺序"""
    props = {p.name: p for p in thing.properties}
    java_types = {p.name: _mapped_type(linked, thing, p, JAVA_TYPES) for p in thing.properties
                  if p.type.array_size is None}
    sc = thing.statechart
    states = []
    if sc is not None:
        for state in sc.states:
            renderer = ExprRenderer(language, props)
            states.append({"name": state.name, "const": state.name.upper(),
                           "entry": _action_lines(renderer, thing, state.on_entry, java_types)})

    handlers = []
    for port in thing.ports:
        for message_name in port.receives:
            message = thing.message(message_name)
            params = message.params if message else ()
            renderer = ExprRenderer(language, props, {p.name: p.type for p in params})
            by_state: Dict[str, List[dict]] = {}
            if sc is not None:
                for index, t in enumerate(sc.transitions):
                    if t.trigger.port != port.name or t.trigger.message != message_name:
                        continue
                    guard = renderer.render(t.guard) if t.guard is not None else renderer.literal(True)
                    by_state.setdefault(t.source, []).append({
                        "index": index,
                        "target": t.target,
                        "target_const": t.target.upper(),
                        "guard": guard,
                        "actions": _action_lines(renderer, thing, t.actions, java_types),
                    })
            handlers.append({
                "port": port.name,
                "message": message_name,
                "py_method": f"receive_{port.name}_{message_name}",
                "cpp_method": f"receive_{port.name}_{message_name}",
                "java_method": camel("receive", port.name, message_name),
                **_signature(params),
                "cases": [{"state": s, "const": s.upper(), "transitions": ts} for s, ts in by_state.items()],
            })

    senders = []
    for port in thing.ports:
        for message_name in port.sends:
            message = thing.message(message_name)
            senders.append({
                "port": port.name,
                "message": message_name,
                "py_method": f"send_{port.name}_{message_name}",
                "cpp_method": f"send_{port.name}_{message_name}",
                "java_method": camel("send", port.name, message_name),
                **_signature(message.params if message else ()),
            })

    return {
        "name": thing.name,
        "properties": [_property_view(linked, thing, p) for p in thing.properties],
        "has_statechart": sc is not None,
        "statechart": sc.name if sc else None,
        "initial": sc.initial if sc else None,
        "initial_const": sc.initial.upper() if sc else None,
        "states": states,
        "handlers": handlers,
        "senders": senders,
        "ports": [p.name for p in thing.ports],
    }


def _deployed_things(linked: LinkedModel, configuration: str) -> List[Thing]:
    config = linked.model.configuration(configuration)
    seen, out = set(), []
    for inst in config.instances:
        thing = linked.model.thing(inst.thing)
        if thing is not None and thing.name not in seen:
            seen.add(thing.name)
            out.append(thing)
    return out


def _wiring_view(linked: LinkedModel, configuration: str) -> dict:
    """实例与连接器；routes 把发送端的 (实例, 消息) 映射到所有接收端"""
    model = linked.model
    config = model.configuration(configuration)
    routes: Dict[Tuple[str, str, str], dict] = {}
    for conn in config.connectors:
        ends = []
        for end in (conn.source, conn.target):
            inst = config.instance(end.instance)
            thing = model.thing(inst.thing)
            ends.append((end, thing, thing.port(end.port)))
        for (s_end, s_thing, s_port), (r_end, _, r_port) in (ends, ends[::-1]):
            for message in s_port.sends:
                if message not in r_port.receives:
                    continue
                key = (s_end.instance, s_end.port, message)
                if key not in routes:
                    msg = s_thing.message(message)
                    routes[key] = {
                        "instance": cpp_ident(s_end.instance),
                        "method": f"send_{s_end.port}_{message}",
                        **_signature(msg.params if msg else ()),
                        "targets": [],
                    }
                routes[key]["targets"].append({"instance": cpp_ident(r_end.instance),
                                               "method": f"receive_{r_end.port}_{message}"})
    return {
        "name": config.name,
        "things": sorted({i.thing for i in config.instances}),
        "instances": [{"name": i.name, "py_name": py_ident(i.name), "cpp_name": cpp_ident(i.name),
                       "thing": i.thing} for i in config.instances],
        "connectors": [{"source": c.source.instance, "source_port": c.source.port,
                        "target": c.target.instance, "target_port": c.target.port}
                       for c in config.connectors],
        "routes": list(routes.values()),
    }


def _ml_view(plan: TrainingPlan, thing: Thing, profile: PlatformProfile, symbol: str, payload_size: int,
             has_scaler: bool) -> dict:
    arch = plan.architecture
    cfg = plan.train_config
    return {
        "thing": plan.thing,
        "features": [{"name": f, "width": thing.property(f).type.width} for f in plan.features],
        "feature_width": arch.dims[0],
        "label": plan.label,
        "label_py": py_ident(plan.label) if plan.label else None,
        "label_cpp": cpp_ident(plan.label) if plan.label else None,
        "dataset": plan.dataset,
        "training_results": plan.training_results,
        "dims": list(arch.dims),
        "hidden": list(arch.dims[1:-1]),
        "activations": list(arch.activations),
        "hidden_activation": arch.activations[0] if len(arch.activations) > 1 else arch.activations[-1],
        "output_activation": arch.activations[-1],
        "learning_rate": repr(cfg.learning_rate),
        "batch_size": cfg.batch_size,
        "epochs": cfg.max_epochs,
        "patience": cfg.early_stop_patience,
        "validation_fraction": repr(cfg.validation_fraction),
        "shuffle": cfg.shuffle,
        "seed": cfg.seed,
        "train_fraction": repr(plan.train_fraction),
        "quantized": profile.quantized,
        "dtype": "int8" if profile.quantized else "float32",
        "model_file": MODEL_FILE,
        "scaler_file": SCALER_FILE if has_scaler else None,
        "carray_symbol": symbol,
        "model_bytes": payload_size,
        "max_dim": max(arch.dims[1:]),
    }


@dataclass(frozen=True)
class GeneratedFile:
    path: str
    data: bytes

    @property
    def sha256(self) -> str:
        return hashlib.sha256(self.data).hexdigest()


@dataclass(frozen=True)
class GeneratedTree:
    """一个目标平台的完整输出；路径为相对路径且互不重复"""
    configuration: str
    target: str
    files: Tuple[GeneratedFile, ...]
    manifest: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        seen = set()
        for f in self.files:
            parts = f.path.split("/")
            if os.path.isabs(f.path) or f.path.startswith("/") or "\\" in f.path or ".." in parts or "" in parts:
                raise ValueError(f"generated path '{f.path}' must be relative without parent traversal")
            if f.path in seen:
                raise ValueError(f"generated path '{f.path}' appears twice")
            seen.add(f.path)

    @property
    def paths(self) -> List[str]:
        return [f.path for f in self.files]

    def file(self, path: str) -> bytes:
        for f in self.files:
            if f.path == path:
                return f.data
        raise KeyError(path)

    def text(self, path: str) -> str:
        return self.file(path).decode("utf-8")


def _environment() -> Environment:
    env = Environment(
        loader=PackageLoader("mdmlc", "templates"),
        undefined=StrictUndefined,
        keep_trailing_newline=True,
        trim_blocks=True,
        lstrip_blocks=True,
        autoescape=False,
    )
    env.filters["py_ident"] = py_ident
    env.filters["cpp_ident"] = cpp_ident
    env.filters["java_ident"] = java_ident
    env.filters["string_literal"] = string_literal
    env.filters["pascal"] = lambda s: s[:1].upper() + s[1:]
    return env


_env: Optional[Environment] = None


def get_environment() -> Environment:
    global _env
    if _env is None:
        _env = _environment()
    return _env


def _render(template: str, **context) -> bytes:
    return get_environment().get_template(template).render(**context).encode("utf-8")


def _python_files(prefix: str, things: List[dict], wiring: dict, ml: Optional[dict],
                  trains: bool) -> List[GeneratedFile]:
    # 生成的脚本用相对自身目录的路径找到 model/
    to_root = "../" * prefix.count("/")
    files = [
        GeneratedFile(f"{prefix}things.py", _render("python/things.py.j2", things=things)),
        GeneratedFile(f"{prefix}app.py", _render("python/app.py.j2", configuration=wiring)),
    ]
    if ml is not None:
        files.append(GeneratedFile(f"{prefix}mlq_runtime.py", _render("python/mlq_runtime.py.j2")))
        files.append(GeneratedFile(f"{prefix}predict.py", _render("python/predict.py.j2", ml=ml, to_root=to_root)))
        if trains:
            files.append(GeneratedFile(f"{prefix}train.py", _render("python/train.py.j2", ml=ml, to_root=to_root)))
    return files


def _manifest(linked: LinkedModel, sources: Optional[Mapping[str, bytes]],
              model_bytes: Optional[bytes]) -> Dict[str, str]:
    inputs: Dict[str, str] = {}
    if sources:
        for name in sorted(sources):
            inputs[f"source:{name}"] = hashlib.sha256(sources[name]).hexdigest()
    inputs["model:canonical"] = hashlib.sha256(pretty_print(linked.model).encode("utf-8")).hexdigest()
    if model_bytes is not None:
        inputs[f"artifact:{MODEL_FILE}"] = hashlib.sha256(model_bytes).hexdigest()
    return inputs


def _manifest_text(configuration: str, target: str, inputs: Dict[str, str], files: List[GeneratedFile]) -> bytes:
    lines = [f"configuration {configuration}", f"target {target}", ""]
    lines += [f"{digest}  {name}" for name, digest in inputs.items()]
    lines.append("")
    lines += [f"{f.sha256}  {f.path}" for f in sorted(files, key=lambda f: f.path)]
    return ("\n".join(lines) + "\n").encode("utf-8")


def _resolve_model(plan: TrainingPlan, profile: PlatformProfile, model: Optional[AnyModel]) -> AnyModel:
    if model is None:
        logger.warning(f"[生成] 未提供训练好的模型, 为 {plan.architecture} 嵌入确定性的初始权重")
        model = initial_model(plan.architecture, plan.train_config.seed)
    if model.architecture.dims != plan.architecture.dims:
        raise SemanticError(f"model architecture {model.architecture} does not match the data_analytics "
                            f"declaration {plan.architecture}")
    if isinstance(model, QuantizedMlpModel):
        if not profile.quantized:
            raise SemanticError(f"target {profile.compiler_id} deploys a float model but a quantized one was given")
        return model
    return quantize(model) if profile.quantized else model


def generate(linked: LinkedModel, configuration: str,
             policy: Union[DeployPolicy, str, None] = None,
             model: Optional[AnyModel] = None,
             registry: Optional[PlatformRegistry] = None,
             target: Optional[str] = None,
             standardizer: Optional[Standardizer] = None,
             sources: Optional[Mapping[str, bytes]] = None,
             config: Optional[Config] = None) -> GeneratedTree:
    """生成一个配置的源码树；同样的输入总是得到逐字节相同的输出"""
    config = config or get_config()
    registry = registry or default_registry(config)
    policy = DeployPolicy(policy or config.get("deploy.policy", "source"))
    symbol = config.get("codegen.carray_symbol", "model_data")

    require_valid(linked, registry)
    if linked.model.configuration(configuration) is None:
        names = ", ".join(c.name for c in linked.model.configurations) or "none"
        raise SemanticError(f"unknown configuration '{configuration}' (declared: {names})")
    target = target or linked.compiler_of(configuration)
    if target not in registry:
        raise SemanticError(f"unknown target '{target}' (valid targets: {', '.join(registry.ids)})")
    profile = registry.lookup(target)
    generator = profile.generator

    things = _deployed_things(linked, configuration)
    language = "cpp" if generator == "arduino_cpp" else "python"
    thing_views = [_statechart_view(linked, t, language) for t in things]
    wiring = _wiring_view(linked, configuration)

    ml = None
    payload = None
    files: List[GeneratedFile] = []
    if any(t.analytics is not None for t in things):
        plan = plan_training(linked, configuration, config)
        thing = analytics_thing(linked.model, configuration)
        trains = generator == "python_java"
        if trains and not plan.dataset:
            raise SemanticError(f"target {target} trains the model but data_analytics of {plan.thing} "
                                f"declares no dataset")
        report = estimate_sizes(plan.architecture, symbol)
        decision = check_deployability(report, profile, policy)
        if not decision.accepted:
            raise DeploymentRejected(f"model {plan.architecture} cannot be deployed on {target}: "
                                     f"{decision.binding_constraint} budget exceeded by "
                                     f"{-decision.margin_bytes} bytes", decision)
        deployed = _resolve_model(plan, profile, model)
        payload = save(deployed)
        ml = _ml_view(plan, thing, profile, symbol, len(payload), standardizer is not None)
        config_node = linked.model.configuration(configuration)
        ml["instance"] = cpp_ident(next(i.name for i in config_node.instances if i.thing == plan.thing))
        files.append(GeneratedFile(MODEL_FILE, payload))
        if standardizer is not None:
            files.append(GeneratedFile(SCALER_FILE, (standardizer.to_json() + "\n").encode("utf-8")))
        if generator == "arduino_cpp":
            files.append(GeneratedFile(CARRAY_FILE, emit_carray(payload, symbol).encode("utf-8")))
    else:
        trains = False

    if generator == "python_java":
        files += _python_files("src/python/", thing_views, wiring, ml, trains)
        java_views = [_statechart_view(linked, t, "java") for t in things]
        for view in java_views:
            files.append(GeneratedFile(f"src/java/{view['name']}.java", _render("java/Thing.java.j2", thing=view)))
    elif generator == "rpi_python":
        files += _python_files("src/", thing_views, wiring, ml, False)
    else:
        files.append(GeneratedFile("src/things.h", _render("arduino/things.h.j2", things=thing_views)))
        files.append(GeneratedFile(f"src/{configuration}.ino",
                                   _render("arduino/sketch.ino.j2", configuration=wiring, ml=ml)))
        if ml is not None:
            files.append(GeneratedFile("src/model_data.h", _render("arduino/model_data.h.j2", ml=ml)))
            files.append(GeneratedFile("src/mlp_inference.h", _render("arduino/mlp_inference.h.j2", ml=ml)))

    inputs = _manifest(linked, sources, payload)
    files.append(GeneratedFile("MANIFEST", _manifest_text(configuration, target, inputs, files)))
    files.sort(key=lambda f: f.path)
    logger.info(f"[生成] {configuration} -> {target}: {len(files)} 个文件")
    return GeneratedTree(configuration, target, tuple(files), inputs)


def list_targets(registry: Optional[PlatformRegistry] = None) -> List[Tuple[str, str]]:
    registry = registry or default_registry()
    return [(p.compiler_id, p.description) for p in registry.profiles()]


def write_tree(tree: GeneratedTree, out_dir: Union[str, Path]) -> Path:
    """写到 <out>/<configuration>/<target>/ 下，每个文件原子写入"""
    root = Path(out_dir) / tree.configuration / tree.target
    for f in tree.files:
        atomic_write(root / f.path, f.data)
    logger.info(f"[生成] 已写入 {root}")
    return root
