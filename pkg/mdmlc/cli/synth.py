"""synth-data：生成液压系统合成数据集"""
import logging

from ..core.config import Config
from ..core.errors import ExitStatus, SemanticError
from ..ml.data import write_csv
from ..ml.synth import DEFAULT_NEGATIVE_SHARE, DEFAULT_SEPARATION, synth_hydraulic_dataset

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("synth-data", help="write a synthetic hydraulic-system dataset")
    parser.add_argument("-n", type=int, default=2205, help="number of rows")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--negative-share", type=float, default=DEFAULT_NEGATIVE_SHARE,
                        help="share of label-0 rows")
    parser.add_argument("--separation", type=float, default=DEFAULT_SEPARATION,
                        help="distance between the class means of the latent severity")
    parser.add_argument("-o", "--out", required=True, help="output CSV")
    parser.set_defaults(func=run)


def run(args, config: Config) -> int:
    try:
        data = synth_hydraulic_dataset(seed=args.seed, n=args.n, negative_share=args.negative_share,
                                       separation=args.separation)
    except ValueError as e:
        raise SemanticError(f"synth-data: {e}") from e
    write_csv(data, args.out)
    logger.info(f"[数据] 已写入 {args.out}: {data.n} 行, {data.d} 个特征")
    return ExitStatus.OK
