"""predict：用 .mlq 模型对 CSV 逐行分类并给出指标"""
import logging
import sys

from ..convert.mlq import load
from ..convert.quantize import QuantizedMlpModel, quantize
from ..core.config import Config
from ..core.errors import ExitStatus
from ..core.files import read_bytes
from ..ml.data import Standardizer, read_csv, standardizer_path
from ..ml.metrics import Averaging, confusion_matrix, metrics_from_confusion
from ..ml.mlp import predict_batch
from .common import add_json_flag, emit_json

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("predict", help="classify the rows of a dataset CSV")
    parser.add_argument("model", help=".mlq model")
    parser.add_argument("--data", required=True, help="dataset CSV with a label column")
    parser.add_argument("--quantized", action="store_true", help="quantize a float model before predicting")
    parser.add_argument("--averaging", choices=[a.value for a in Averaging], default=Averaging.WEIGHTED.value)
    add_json_flag(parser)
    parser.set_defaults(func=run)


def run(args, config: Config) -> int:
    model = load(read_bytes(args.model))
    if args.quantized and not isinstance(model, QuantizedMlpModel):
        model = quantize(model)
    data = read_csv(args.data)
    scaler = standardizer_path(args.model)
    if scaler.exists():
        data = Standardizer.load(scaler).apply(data)
    else:
        logger.warning(f"[预测] 没有找到 {scaler}, 使用未标准化的特征")

    classes, _ = predict_batch(model, data.features)
    metrics = metrics_from_confusion(confusion_matrix(data.labels, classes), Averaging(args.averaging))
    if args.json:
        emit_json({
            "model": args.model,
            "quantized": isinstance(model, QuantizedMlpModel),
            "metrics": metrics.model_dump(mode="json"),
            "predictions": [int(c) for c in classes],
        })
        return ExitStatus.OK

    out = sys.stdout
    out.write("row,class,label\n")
    for index, (predicted, label) in enumerate(zip(classes, data.labels)):
        out.write(f"{index},{int(predicted)},{int(label)}\n")
    out.write(f"# accuracy={metrics.accuracy:.6f} precision={metrics.precision:.6f} "
              f"recall={metrics.recall:.6f} averaging={metrics.averaging.value}\n")
    return ExitStatus.OK
