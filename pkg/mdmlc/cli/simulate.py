"""simulate：在宿主机上运行一个 thing 的状态机"""
import logging

from ..core.config import Config
from ..core.errors import ExitStatus, SemanticError
from ..model.diagnostics import has_errors
from ..model.statechart import simulate_statechart
from ..model.validate import validate_structure
from ..parser import parse_events
from .common import add_json_flag, emit_json, load_model

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("simulate", help="run a statechart over a list of events")
    parser.add_argument("file", help=".mdml source file")
    parser.add_argument("--thing", required=True, help="thing whose statechart runs")
    parser.add_argument("--events", default="", help="events, e.g. 'sensor?reading(42), timer?tick'")
    add_json_flag(parser)
    parser.set_defaults(func=run)


def run(args, config: Config) -> int:
    linked = load_model(args.file)
    diagnostics = validate_structure(linked.model)
    if has_errors(diagnostics):
        raise SemanticError(f"{args.file}: model is not well-formed", diagnostics)
    thing = linked.model.thing(args.thing)
    if thing is None:
        known = ", ".join(t.name for t in linked.model.things) or "none"
        raise SemanticError(f"--thing: unknown thing '{args.thing}' (declared: {known})")

    trace = simulate_statechart(thing, parse_events(args.events))
    if args.json:
        emit_json(trace.to_dict())
        return ExitStatus.OK
    print(" -> ".join(trace.states))
    for step in trace.steps:
        fired = f"transition {step.transition}" if step.transition is not None else "dropped"
        print(f"{step.event}: {fired}")
    for e in trace.emitted:
        args_text = ", ".join(repr(a) for a in e.args)
        print(f"emit {e.port}!{e.message}({args_text})")
    return ExitStatus.OK
