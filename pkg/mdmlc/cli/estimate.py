"""estimate：模型大小估算与可部署性判断"""
import logging

from ..core.config import Config
from ..core.errors import ExitStatus, SemanticError
from ..ml.mlp import MlpArchitecture
from ..services.platforms import DeployPolicy, check_deployability, estimate_sizes
from .common import add_json_flag, emit_json, registry_for

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("estimate", help="estimate model sizes and check a platform budget")
    parser.add_argument("--arch", required=True, help="layer dimensions, e.g. 6120,32,2")
    parser.add_argument("--platform", help="compiler id of the target platform")
    parser.add_argument("--policy", choices=[p.value for p in DeployPolicy], help="deployability policy")
    parser.add_argument("--symbol", help="C identifier used for the array size")
    add_json_flag(parser)
    parser.set_defaults(func=run)


def run(args, config: Config) -> int:
    try:
        arch = MlpArchitecture.parse(args.arch)
    except ValueError as e:
        raise SemanticError(f"--arch: {e}") from e
    try:
        report = estimate_sizes(arch, args.symbol or config.get("codegen.carray_symbol", "model_data"))
    except ValueError as e:
        raise SemanticError(f"--symbol: {e}") from e

    decision = None
    if args.platform:
        registry = registry_for(args, config)
        profile = registry.lookup(args.platform)
        if profile is None:
            raise SemanticError(f"--platform: unknown target '{args.platform}' "
                                f"(valid targets: {', '.join(registry.ids)})")
        decision = check_deployability(report, profile, args.policy or config.get("deploy.policy", "source"))

    if args.json:
        emit_json({
            "report": report.model_dump(mode="json"),
            "decision": decision.model_dump(mode="json") if decision else None,
        })
    else:
        print(f"architecture        {arch}")
        print(f"parameters          {report.param_count}")
        print(f"float .mlq          {report.float_serialized_bytes} B")
        print(f"quantized .mlq      {report.quantized_serialized_bytes} B")
        print(f"C array source      {report.carray_source_bytes} B (x{report.expansion_ratio:.3f})")
        print(f"C array (float)     {report.float_carray_source_bytes} B")
        print(f"activation arena    {report.arena_bytes} B")
        if decision is not None:
            print(decision.summary())
    if decision is not None and not decision.accepted:
        return ExitStatus.DEPLOY_REJECTED
    return ExitStatus.OK
