"""targets：列出可用的代码生成目标"""
from ..core.config import Config
from ..core.errors import ExitStatus
from ..services.codegen import list_targets
from .common import add_json_flag, emit_json, registry_for


def register(subparsers) -> None:
    parser = subparsers.add_parser("targets", help="list code-generation targets")
    add_json_flag(parser)
    parser.set_defaults(func=run)


def run(args, config: Config) -> int:
    targets = list_targets(registry_for(args, config))
    if args.json:
        emit_json([{"compiler_id": cid, "description": desc} for cid, desc in targets])
    else:
        for cid, desc in targets:
            print(f"{cid:32} {desc}")
    return ExitStatus.OK
