"""train：在本机执行 标准化 -> 时间顺序划分 -> 训练 -> 评估 流程"""
import json
import logging
from pathlib import Path

from ..convert.mlq import save
from ..core.config import Config
from ..core.errors import DatasetError, ExitStatus
from ..core.files import atomic_write
from ..ml.data import read_csv, standardizer_path
from ..ml.metrics import Averaging
from ..ml.training import train_pipeline
from ..services.semantics import plan_training, require_valid
from .common import add_json_flag, emit_json, load_model, registry_for, relative_to

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("train", help="train the model described by a data_analytics block")
    parser.add_argument("file", help="PIM or PSM source file")
    parser.add_argument("--data", help="dataset CSV (default: the dataset named in the model)")
    parser.add_argument("-o", "--out", required=True, help="output .mlq model")
    parser.add_argument("--config", dest="configuration", help="configuration whose thing is trained")
    parser.add_argument("--seed", type=int, help="initialisation / shuffling seed")
    parser.add_argument("--learning-rate", type=float, help="override the learning rate")
    parser.add_argument("--epochs", type=int, help="override the maximum number of epochs")
    parser.add_argument("--averaging", choices=[a.value for a in Averaging], default=Averaging.WEIGHTED.value,
                        help="precision/recall averaging")
    add_json_flag(parser)
    parser.set_defaults(func=run)


def run(args, config: Config) -> int:
    linked = load_model(args.file)
    require_valid(linked, registry_for(args, config))
    plan = plan_training(linked, args.configuration, config)

    data_path = args.data or (relative_to(linked.model.path, plan.dataset) if plan.dataset else None)
    if not data_path:
        raise DatasetError(f"data_analytics of {plan.thing} declares no dataset; pass --data")
    data = read_csv(data_path)

    overrides = {k: v for k, v in (("seed", args.seed), ("learning_rate", args.learning_rate),
                                   ("max_epochs", args.epochs)) if v is not None}
    cfg = plan.train_config.model_copy(update=overrides)
    result = train_pipeline(plan.architecture, data, cfg, plan.train_fraction, Averaging(args.averaging))

    out = Path(args.out)
    atomic_write(out, save(result.model))
    result.standardizer.save(standardizer_path(out))
    metrics_path = out.with_name(out.stem + ".metrics.json")
    report = {
        "architecture": list(plan.architecture.dims),
        "train_rows": result.train_rows,
        "test_rows": result.test_rows,
        "metrics": result.metrics.model_dump(mode="json"),
        "best_epoch": result.history.best_epoch,
        "stopped_epoch": result.history.stopped_epoch,
        "stop_reason": result.history.stop_reason,
    }
    atomic_write(metrics_path, json.dumps(report, indent=2) + "\n")
    log_path = out.with_name(Path(plan.training_results).name if plan.training_results else "Training_results")
    atomic_write(log_path, result.history.to_log())
    logger.info(f"[训练] 模型已写入 {out}, 训练日志 {log_path}")

    if args.json:
        emit_json({**report, "model": str(out), "training_results": str(log_path)})
    else:
        m = result.metrics
        print(f"accuracy  {m.accuracy:.4f}")
        print(f"precision {m.precision:.4f}")
        print(f"recall    {m.recall:.4f}")
    return ExitStatus.OK
