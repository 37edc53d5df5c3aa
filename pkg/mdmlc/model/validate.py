"""结构良构性检查（元模型约束）"""
from typing import Iterable, List, Optional, Set

from . import expr as ex
from .diagnostics import Diagnostic, error
from .ir import (
    PRIMITIVE_TYPES,
    Action,
    Configuration,
    EmitAction,
    SetAction,
    SourceModel,
    Statechart,
    Thing,
    TypeRef,
    configuration_path,
    member_path,
    thing_path,
)


def _duplicates(items: Iterable, what: str, path_of, out: List[Diagnostic]) -> None:
    seen: Set[str] = set()
    for item in items:
        if item.name in seen:
            out.append(error(path_of(item), f"duplicate {what} name '{item.name}'", item.location))
        seen.add(item.name)


def _check_type(t: TypeRef, node: str, location, out: List[Diagnostic]) -> None:
    if t.name not in PRIMITIVE_TYPES:
        out.append(error(node, f"unknown type '{t.name}'", location))
    if t.array_size is not None and t.array_size < 1:
        out.append(error(node, f"array size must be at least 1, got {t.array_size}", location))


def _check_expr_names(e: Optional[ex.Expr], scope: Set[str], node: str, what: str,
                      location, out: List[Diagnostic]) -> None:
    if e is None:
        return
    for name in ex.names(e):
        if name not in scope:
            out.append(error(node, f"{what} references unknown name '{name}'", location))


def _check_actions(thing: Thing, actions: Iterable[Action], scope: Set[str], node: str,
                   location, out: List[Diagnostic]) -> None:
    for action in actions:
        where = action.location or location
        if isinstance(action, EmitAction):
            port = thing.port(action.port)
            message = thing.message(action.message)
            if port is None:
                out.append(error(node, f"emit uses undeclared port '{action.port}'", where))
            elif action.message not in port.sends:
                out.append(error(node, f"port '{action.port}' does not send '{action.message}'", where))
            if message is None:
                out.append(error(node, f"emit uses undeclared message '{action.message}'", where))
            elif len(message.params) != len(action.args):
                out.append(error(
                    node,
                    f"message '{message.name}' expects {len(message.params)} argument(s), "
                    f"got {len(action.args)}",
                    where,
                ))
            for arg in action.args:
                _check_expr_names(arg, scope, node, "emit argument", where, out)
        elif isinstance(action, SetAction):
            if thing.property(action.property) is None:
                out.append(error(node, f"set targets undeclared property '{action.property}'", where))
            _check_expr_names(action.value, scope, node, "set value", where, out)


def _check_statechart(thing: Thing, sc: Statechart, out: List[Diagnostic]) -> None:
    sc_path = member_path(thing.name, "statechart", sc.name)
    props = {p.name for p in thing.properties}
    state_names = {s.name for s in sc.states}

    _duplicates(sc.states, "state", lambda s: f"{sc_path}/state:{s.name}", out)
    # 生成代码里状态常量为大写名
    folded = {}
    for state in sc.states:
        other = folded.setdefault(state.name.upper(), state.name)
        if other != state.name:
            out.append(error(f"{sc_path}/state:{state.name}",
                             f"state names '{other}' and '{state.name}' differ only in case", state.location))
    if sc.initial not in state_names:
        out.append(error(sc_path, f"initial state '{sc.initial}' is not declared", sc.location))

    for state in sc.states:
        _check_actions(thing, state.on_entry, props, f"{sc_path}/state:{state.name}", state.location, out)

    for index, t in enumerate(sc.transitions):
        node = f"{sc_path}/transition:{index}"
        label = t.describe(index)
        for role, name in (("source", t.source), ("target", t.target)):
            if name not in state_names:
                out.append(error(node, f"{label}: {role} state '{name}' is not declared", t.location))

        scope = set(props)
        port = thing.port(t.trigger.port)
        message = thing.message(t.trigger.message)
        if port is None:
            out.append(error(node, f"{label}: trigger port '{t.trigger.port}' is not declared", t.location))
        elif t.trigger.message not in port.receives:
            out.append(error(
                node, f"{label}: port '{port.name}' does not receive '{t.trigger.message}'", t.location))
        if message is None:
            out.append(error(
                node, f"{label}: trigger message '{t.trigger.message}' is not declared", t.location))
        else:
            scope |= {p.name for p in message.params}

        _check_expr_names(t.guard, scope, node, f"{label}: guard", t.location, out)
        _check_actions(thing, t.actions, scope, node, t.location, out)


def _check_thing(thing: Thing, out: List[Diagnostic]) -> None:
    _duplicates(thing.properties, "property", lambda p: member_path(thing.name, "property", p.name), out)
    _duplicates(thing.messages, "message", lambda m: member_path(thing.name, "message", m.name), out)
    _duplicates(thing.ports, "port", lambda p: member_path(thing.name, "port", p.name), out)

    for prop in thing.properties:
        node = member_path(thing.name, "property", prop.name)
        _check_type(prop.type, node, prop.location, out)
        _check_expr_names(prop.initial, set(), node, "initial value", prop.location, out)

    declared_messages = {m.name for m in thing.messages}
    for message in thing.messages:
        node = member_path(thing.name, "message", message.name)
        _duplicates(message.params, "parameter", lambda p, n=node: f"{n}/param:{p.name}", out)
        for param in message.params:
            _check_type(param.type, node, param.location, out)

    for port in thing.ports:
        node = member_path(thing.name, "port", port.name)
        for ref in port.sends + port.receives:
            if ref not in declared_messages:
                out.append(error(node, f"port '{port.name}' references undeclared message '{ref}'",
                                 port.location))

    if thing.statechart is not None:
        _check_statechart(thing, thing.statechart, out)

    da = thing.analytics
    if da is not None:
        node = member_path(thing.name, "data_analytics", da.name)
        for feature in da.features:
            if thing.property(feature) is None:
                out.append(error(node, f"feature '{feature}' is not a declared property of {thing.name}",
                                 da.location))
        if da.prediction_results is not None and thing.property(da.prediction_results) is None:
            out.append(error(
                node,
                f"prediction_results '{da.prediction_results}' is not a declared property of {thing.name}",
                da.location,
            ))


def _check_configuration(model: SourceModel, config: Configuration, out: List[Diagnostic]) -> None:
    cp = configuration_path(config.name)
    _duplicates(config.instances, "instance", lambda i: f"{cp}/instance:{i.name}", out)

    for inst in config.instances:
        if model.thing(inst.thing) is None:
            out.append(error(f"{cp}/instance:{inst.name}",
                             f"instance '{inst.name}' references unknown thing '{inst.thing}'",
                             inst.location))

    for index, conn in enumerate(config.connectors):
        node = f"{cp}/connector:{index}"
        ports = []
        for end in (conn.source, conn.target):
            inst = config.instance(end.instance)
            if inst is None:
                out.append(error(node, f"connector endpoint '{end}' references undeclared instance "
                                       f"'{end.instance}'", conn.location))
                continue
            thing = model.thing(inst.thing)
            if thing is None:
                continue
            port = thing.port(end.port)
            if port is None:
                out.append(error(node, f"connector endpoint '{end}': thing {thing.name} has no port "
                                       f"'{end.port}'", conn.location))
                continue
            ports.append(port)
        if len(ports) != 2:
            continue
        src, dst = ports
        for sender, receiver, s_end, r_end in ((src, dst, conn.source, conn.target),
                                               (dst, src, conn.target, conn.source)):
            for message in sender.sends:
                if message not in receiver.receives:
                    out.append(error(node, f"connector {conn.source} => {conn.target}: message "
                                           f"'{message}' sent by {s_end} is not received by {r_end}",
                                     conn.location))


def validate_structure(model: SourceModel) -> List[Diagnostic]:
    """检查元模型约束；诊断为空当且仅当模型良构。纯函数，可重复调用。"""
    out: List[Diagnostic] = []
    _duplicates(model.things, "thing", lambda t: thing_path(t.name), out)
    _duplicates(model.configurations, "configuration", lambda c: configuration_path(c.name), out)
    for thing in model.things:
        _check_thing(thing, out)
    for config in model.configurations:
        _check_configuration(model, config, out)
    return out
