"""generate：为一个配置生成目标平台源码树"""
import logging

from ..convert.mlq import load
from ..core.config import Config
from ..core.errors import ExitStatus
from ..core.files import read_bytes
from ..ml.data import Standardizer, standardizer_path
from ..services.codegen import generate, write_tree
from ..services.platforms import DeployPolicy
from .common import add_json_flag, emit_json, load_model, pick_configuration, registry_for, source_files

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("generate", help="generate the source tree of a configuration")
    parser.add_argument("file", help="PSM source file")
    parser.add_argument("--config", dest="configuration", help="configuration name (default: the only one)")
    parser.add_argument("-o", "--out", required=True, help="output directory")
    parser.add_argument("--target", help="override the @compiler annotation")
    parser.add_argument("--model", help="trained .mlq model to embed (default: initial weights)")
    parser.add_argument("--policy", choices=[p.value for p in DeployPolicy], help="deployability policy")
    add_json_flag(parser)
    parser.set_defaults(func=run)


def run(args, config: Config) -> int:
    linked = load_model(args.file)
    configuration = pick_configuration(linked, args.configuration)

    model = standardizer = None
    if args.model:
        model = load(read_bytes(args.model))
        scaler = standardizer_path(args.model)
        if scaler.exists():
            standardizer = Standardizer.load(scaler)

    tree = generate(linked, configuration, policy=args.policy, model=model,
                    registry=registry_for(args, config), target=args.target,
                    standardizer=standardizer, sources=source_files(linked), config=config)
    root = write_tree(tree, args.out)
    if args.json:
        emit_json({
            "configuration": tree.configuration,
            "target": tree.target,
            "root": str(root),
            "files": [{"path": f.path, "sha256": f.sha256, "bytes": len(f.data)} for f in tree.files],
        })
    else:
        for path in tree.paths:
            print(root / path)
    return ExitStatus.OK
