"""状态机解释器：扁平状态，按声明顺序选择转移，每个事件运行至完成"""
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from ..core.errors import GuardError, SemanticError
from . import expr as ex
from .ir import Action, EmitAction, SetAction, Thing, TypeRef

logger = logging.getLogger(__name__)

_DEFAULTS = {"Int": 0, "Long": 0, "Float": 0.0, "Double": 0.0, "Bool": False, "String": ""}


@dataclass(frozen=True)
class Event:
    port: str
    message: str
    args: Tuple[ex.Value, ...] = ()

    def __str__(self) -> str:
        suffix = f"({', '.join(repr(a) for a in self.args)})" if self.args else ""
        return f"{self.port}?{self.message}{suffix}"


@dataclass(frozen=True)
class Emission:
    port: str
    message: str
    args: Tuple[ex.Value, ...] = ()


@dataclass(frozen=True)
class Step:
    event: Event
    transition: Optional[int]  # None 表示事件被丢弃


@dataclass(frozen=True)
class StateTrace:
    states: Tuple[str, ...]
    emitted: Tuple[Emission, ...] = ()
    steps: Tuple[Step, ...] = ()
    properties: Dict[str, object] = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        return {
            "states": list(self.states),
            "emitted": [{"port": e.port, "message": e.message, "args": list(e.args)} for e in self.emitted],
            "steps": [{"event": str(s.event), "transition": s.transition} for s in self.steps],
        }


def _default_value(t: TypeRef):
    base = _DEFAULTS.get(t.name, 0)
    if t.array_size is not None:
        return tuple([base] * t.array_size)
    return base


class _Simulation:
    """单次仿真持有自己的可变游标；IR 本身不被修改"""

    def __init__(self, thing: Thing):
        if thing.statechart is None:
            raise SemanticError(f"thing {thing.name} has no statechart")
        self.thing = thing
        self.sc = thing.statechart
        if self.sc.state(self.sc.initial) is None:
            raise SemanticError(f"statechart {self.sc.name}: initial state '{self.sc.initial}' is not declared")
        self.properties: Dict[str, object] = {}
        for prop in thing.properties:
            if prop.initial is not None:
                self.properties[prop.name] = ex.evaluate(prop.initial, {})
            else:
                self.properties[prop.name] = _default_value(prop.type)
        self.current = self.sc.initial
        self.states: List[str] = [self.current]
        self.emitted: List[Emission] = []
        self.steps: List[Step] = []

    def _run_actions(self, actions: Iterable[Action], params: Dict[str, object], where: str) -> None:
        for action in actions:
            env = {**self.properties, **params}
            try:
                if isinstance(action, EmitAction):
                    args = tuple(ex.evaluate(a, env) for a in action.args)
                    self.emitted.append(Emission(action.port, action.message, args))
                elif isinstance(action, SetAction):
                    self.properties[action.property] = ex.evaluate(action.value, env)
            except ex.ExpressionError as e:
                raise GuardError(f"{where}: action evaluation failed: {e}") from e

    def _params(self, event: Event) -> Dict[str, object]:
        message = self.thing.message(event.message)
        if message is None:
            return {}
        return {p.name: v for p, v in zip(message.params, event.args)}

    def start(self) -> None:
        initial = self.sc.state(self.current)
        self._run_actions(initial.on_entry, {}, f"state {initial.name} on entry")

    def dispatch(self, event: Event) -> None:
        params = self._params(event)
        for index, t in enumerate(self.sc.transitions):
            if t.source != self.current:
                continue
            if t.trigger.port != event.port or t.trigger.message != event.message:
                continue
            if t.guard is not None:
                try:
                    result = ex.evaluate(t.guard, {**self.properties, **params})
                except ex.ExpressionError as e:
                    raise GuardError(f"{t.describe(index)}: guard evaluation failed: {e}") from e
                if not isinstance(result, bool):
                    raise GuardError(f"{t.describe(index)}: guard evaluated to non-Bool {result!r}")
                if not result:
                    continue
            self._run_actions(t.actions, params, t.describe(index))
            self.current = t.target
            self.states.append(self.current)
            target = self.sc.state(self.current)
            if target is not None:
                self._run_actions(target.on_entry, {}, f"state {target.name} on entry")
            self.steps.append(Step(event, index))
            return
        logger.debug(f"[仿真] 状态 {self.current} 下没有匹配的迁移, 丢弃事件 {event}")
        self.steps.append(Step(event, None))

    def trace(self) -> StateTrace:
        return StateTrace(tuple(self.states), tuple(self.emitted), tuple(self.steps), dict(self.properties))


def _as_event(item: Union[Event, Sequence]) -> Event:
    if isinstance(item, Event):
        return item
    port, message, *rest = item
    return Event(port, message, tuple(rest[0]) if rest else ())


def simulate_statechart(thing: Thing, events: Iterable[Union[Event, Sequence]]) -> StateTrace:
    """按 FIFO 顺序消费事件；每个事件最多触发一条（最先声明的）迁移"""
    sim = _Simulation(thing)
    sim.start()
    for item in events:
        sim.dispatch(_as_event(item))
    return sim.trace()
