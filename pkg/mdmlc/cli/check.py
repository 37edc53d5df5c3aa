"""check：解析 + 链接 + 语义检查"""
import logging

from ..core.config import Config
from ..core.errors import ExitStatus
from ..model.diagnostics import Severity, has_errors
from ..services.semantics import check_semantics
from .common import add_json_flag, emit_json, load_model, print_diagnostics, registry_for

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("check", help="parse, link and check a model file")
    parser.add_argument("file", help=".mdml source file")
    add_json_flag(parser)
    parser.set_defaults(func=run)


def run(args, config: Config) -> int:
    linked = load_model(args.file)
    diagnostics = check_semantics(linked, registry_for(args, config))
    failed = has_errors(diagnostics)
    if args.json:
        emit_json({
            "file": args.file,
            "kind": linked.kind.value,
            "ok": not failed,
            "diagnostics": [d.to_dict() for d in diagnostics],
        })
    else:
        print_diagnostics(diagnostics)
        errors = sum(1 for d in diagnostics if d.severity is Severity.ERROR)
        warnings = len(diagnostics) - errors
        logger.info(f"[检查] {args.file}: {linked.kind.value}, {errors} 个错误, {warnings} 个警告")
    return ExitStatus.SEMANTIC_ERROR if failed else ExitStatus.OK
