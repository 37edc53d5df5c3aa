"""导入解析与 PIM -> PSM 组合

PSM = PIM + 平台注解 + 配置。组合是单向的：PIM 的内容从不被修改，
strip() 去掉 overlay 引入的注解与配置后得到原 PIM。
"""
import logging
import os
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Tuple

from ..core.errors import LinkError, MdmlError, MdmlIOError
from ..core.files import read_text
from ..model.diagnostics import Diagnostic, error
from ..model.ir import (
    Annotation,
    AnnotationOverlay,
    Configuration,
    SourceModel,
    Thing,
    configuration_path,
    member_path,
    thing_path,
)
from ..parser.parser import parse

logger = logging.getLogger(__name__)

Loader = Callable[[str], str]
MODEL_PATH = "model"


@dataclass(frozen=True)
class LinkedModel:
    """合并后的模型 + 来源追踪 + 引用表 + 有效注解"""
    model: SourceModel
    pim: SourceModel
    overlay: SourceModel
    provenance: Dict[str, str] = field(default_factory=dict)
    references: Dict[str, str] = field(default_factory=dict)
    effective_annotations: Dict[str, Dict[str, str]] = field(default_factory=dict)
    diagnostics: Tuple[Diagnostic, ...] = ()

    @property
    def kind(self):
        return self.model.kind

    def annotations_of(self, node: str) -> Dict[str, str]:
        return dict(self.effective_annotations.get(node, {}))

    def annotation(self, node: str, key: str) -> Optional[str]:
        return self.effective_annotations.get(node, {}).get(key)

    def compiler_of(self, configuration: str) -> Optional[str]:
        return self.annotation(configuration_path(configuration), "compiler")


def _node_annotations(model: SourceModel) -> List[Tuple[str, Tuple[Annotation, ...]]]:
    """按声明顺序列出模型中每个带注解节点的 (路径, 注解)"""
    out = [(MODEL_PATH, model.annotations)]
    for thing in model.things:
        tp = thing_path(thing.name)
        out.append((tp, thing.annotations))
        for prop in thing.properties:
            out.append((member_path(thing.name, "property", prop.name), prop.annotations))
        for message in thing.messages:
            out.append((member_path(thing.name, "message", message.name), message.annotations))
        for port in thing.ports:
            out.append((member_path(thing.name, "port", port.name), port.annotations))
        sc = thing.statechart
        if sc is not None:
            sp = member_path(thing.name, "statechart", sc.name)
            out.append((sp, sc.annotations))
            for state in sc.states:
                out.append((f"{sp}/state:{state.name}", state.annotations))
            for index, transition in enumerate(sc.transitions):
                out.append((f"{sp}/transition:{index}", transition.annotations))
        if thing.analytics is not None:
            out.append((member_path(thing.name, "data_analytics", thing.analytics.name),
                        thing.analytics.annotations))
    for config in model.configurations:
        cp = configuration_path(config.name)
        out.append((cp, config.annotations))
        for inst in config.instances:
            out.append((f"{cp}/instance:{inst.name}", inst.annotations))
        for index, conn in enumerate(config.connectors):
            out.append((f"{cp}/connector:{index}", conn.annotations))
    return out


def _resolve_overlay_target(model: SourceModel, overlay: AnnotationOverlay) -> Optional[str]:
    """`annotate T` / `annotate T.member` / `annotate C` -> 节点路径"""
    target = overlay.target
    thing = model.thing(target[0])
    if len(target) == 1:
        if thing is not None:
            return thing_path(thing.name)
        if model.configuration(target[0]) is not None:
            return configuration_path(target[0])
        return None
    if thing is None or len(target) != 2:
        return None
    name = target[1]
    for kind, items in (("property", thing.properties), ("message", thing.messages), ("port", thing.ports)):
        if any(item.name == name for item in items):
            return member_path(thing.name, kind, name)
    if thing.statechart is not None and thing.statechart.name == name:
        return member_path(thing.name, "statechart", name)
    if thing.analytics is not None and thing.analytics.name == name:
        return member_path(thing.name, "data_analytics", name)
    return None


def _references(model: SourceModel) -> Dict[str, str]:
    refs: Dict[str, str] = {}
    for thing in model.things:
        da = thing.analytics
        if da is None:
            continue
        dp = member_path(thing.name, "data_analytics", da.name)
        for feature in da.features:
            if thing.property(feature) is not None:
                refs[f"{dp}/feature:{feature}"] = member_path(thing.name, "property", feature)
        if da.prediction_results and thing.property(da.prediction_results) is not None:
            refs[f"{dp}/prediction_results"] = member_path(thing.name, "property", da.prediction_results)
    for config in model.configurations:
        cp = configuration_path(config.name)
        for inst in config.instances:
            if model.thing(inst.thing) is not None:
                refs[f"{cp}/instance:{inst.name}"] = thing_path(inst.thing)
        for index, conn in enumerate(config.connectors):
            for role, end in (("source", conn.source), ("target", conn.target)):
                inst = config.instance(end.instance)
                thing = model.thing(inst.thing) if inst else None
                if thing is not None and thing.port(end.port) is not None:
                    refs[f"{cp}/connector:{index}/{role}"] = member_path(thing.name, "port", end.port)
    return refs


def _link(pim: SourceModel, overlay: SourceModel, provenance: Dict[str, str]) -> LinkedModel:
    merged = SourceModel(
        imports=pim.imports + overlay.imports,
        things=pim.things,
        configurations=pim.configurations + overlay.configurations,
        annotations=pim.annotations + overlay.annotations,
        overlays=pim.overlays + overlay.overlays,
        path=overlay.path or pim.path,
    )

    effective: Dict[str, Dict[str, str]] = {}
    for node, annotations in _node_annotations(merged):
        for a in annotations:
            effective.setdefault(node, {})[a.key] = a.value

    references = _references(merged)
    diagnostics: List[Diagnostic] = []
    # PIM 自身的 annotate 先生效，overlay 的同名键随后覆盖
    for index, ov in enumerate(merged.overlays):
        node = _resolve_overlay_target(merged, ov)
        if node is None:
            diagnostics.append(error(f"annotate:{index}",
                                     f"annotate target '{'.'.join(ov.target)}' does not name a thing, "
                                     f"a thing member or a configuration", ov.location))
            continue
        references[f"annotate:{index}"] = node
        for a in ov.annotations:
            effective.setdefault(node, {})[a.key] = a.value

    return LinkedModel(merged, pim, overlay, dict(provenance), references, effective, tuple(diagnostics))


def _default_provenance(pim: SourceModel, overlay: SourceModel) -> Dict[str, str]:
    out = {}
    for thing in pim.things:
        out[thing_path(thing.name)] = pim.path or "<pim>"
    for config in overlay.configurations:
        out[configuration_path(config.name)] = overlay.path or "<overlay>"
    return out


def compose_psm(pim: SourceModel, overlay: SourceModel) -> LinkedModel:
    """PIM + overlay (注解与配置) -> LinkedModel；pim 本身不被修改"""
    if pim.configurations:
        raise LinkError(f"{pim.path or 'PIM'}: a PIM must not contain configurations")
    if overlay.things:
        names = ", ".join(t.name for t in overlay.things)
        raise LinkError("PSM overlay must not define things",
                        [error(thing_path(t.name), f"PSM overlay must not define things (found {names})",
                               t.location) for t in overlay.things])
    return _link(pim, overlay, _default_provenance(pim, overlay))


def strip(linked: LinkedModel) -> SourceModel:
    """去掉 overlay 引入的注解与配置"""
    model = linked.model
    ov = linked.overlay

    def drop_tail(items: tuple, tail: tuple) -> tuple:
        return items[:len(items) - len(tail)] if tail else items

    return replace(
        model,
        imports=drop_tail(model.imports, ov.imports),
        configurations=drop_tail(model.configurations, ov.configurations),
        annotations=drop_tail(model.annotations, ov.annotations),
        overlays=drop_tail(model.overlays, ov.overlays),
        path=linked.pim.path,
    )


def _canonical(path: str) -> str:
    return os.path.normpath(path)


def _resolve_relative(importer: str, target: str) -> str:
    if os.path.isabs(target):
        return _canonical(target)
    return _canonical(os.path.join(os.path.dirname(importer), target))


def resolve_imports(entry: str, loader: Optional[Loader] = None) -> LinkedModel:
    """递归内联导入：每个文件只内联一次，检测循环与跨文件重名"""
    loader = loader or read_text
    entry = _canonical(entry)
    models: Dict[str, SourceModel] = {}
    order: List[str] = []
    diagnostics: List[Diagnostic] = []

    def visit(path: str, stack: List[str], importer: Optional[Tuple[str, object]]) -> None:
        if path in stack:
            cycle = " -> ".join(stack[stack.index(path):] + [path])
            diagnostics.append(error(f"file:{path}", f"import cycle: {cycle}",
                                     importer[1] if importer else None))
            return
        if path in models:
            return  # 菱形导入只内联一次
        try:
            text = loader(path)
        except (OSError, KeyError, MdmlError) as e:
            if importer is None:
                if isinstance(e, MdmlError):
                    raise
                raise MdmlIOError(f"{path}: cannot load file: {e}") from e
            diagnostics.append(error(f"file:{path}", f"cannot load '{path}' (imported from {importer[0]}): {e}",
                                     importer[1]))
            return
        model = parse(text, path, allow_empty=False)
        models[path] = model
        for imp in model.imports:
            visit(_resolve_relative(path, imp.path), stack + [path], (path, imp.location))
        order.append(path)

    visit(entry, [], None)
    if diagnostics:
        raise LinkError(diagnostics[0].message, diagnostics)

    provenance: Dict[str, str] = {}
    things: List[Thing] = []
    configurations: List[Configuration] = []
    pim_annotations: List[Annotation] = []
    pim_overlays: List[AnnotationOverlay] = []
    for path in order:
        model = models[path]
        for thing in model.things:
            node = thing_path(thing.name)
            if node in provenance and provenance[node] != path:
                diagnostics.append(error(node, f"thing '{thing.name}' is defined in both {provenance[node]} "
                                               f"and {path}", thing.location))
                continue
            if node not in provenance:
                provenance[node] = path
            things.append(thing)
        if path == entry:
            continue
        for config in model.configurations:
            provenance.setdefault(configuration_path(config.name), path)
            configurations.append(config)
        pim_annotations.extend(model.annotations)
        pim_overlays.extend(model.overlays)

    root = models[entry]
    if root.imports and root.configurations and root.things:
        names = ", ".join(t.name for t in root.things)
        raise LinkError("PSM overlay must not define things",
                        [error(thing_path(t.name), f"PSM overlay must not define things (found {names})",
                               t.location) for t in root.things])
    for config in root.configurations:
        node = configuration_path(config.name)
        if node in provenance and provenance[node] != entry:
            diagnostics.append(error(node, f"configuration '{config.name}' is defined in both "
                                           f"{provenance[node]} and {entry}", config.location))
        provenance.setdefault(node, entry)
    if diagnostics:
        raise LinkError(diagnostics[0].message, diagnostics)

    # 入口文件若带配置则视为 PSM：其顶层注解与 annotate 属于平台注解
    if root.configurations or root.imports:
        overlay = SourceModel(root.imports, (), tuple(configurations) + root.configurations,
                              root.annotations, root.overlays, path=entry)
    else:
        pim_annotations.extend(root.annotations)
        pim_overlays.extend(root.overlays)
        overlay = SourceModel(configurations=tuple(configurations), path=entry)
    pim = SourceModel(things=tuple(things), annotations=tuple(pim_annotations),
                      overlays=tuple(pim_overlays), path=entry)
    logger.debug(f"[链接] {entry}: {len(order)} 个文件, {len(things)} 个 thing, "
                 f"{len(overlay.configurations)} 个配置")
    return _link(pim, overlay, provenance)
