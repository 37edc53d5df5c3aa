"""convert / dump：模型量化与 C 数组导出"""
import logging
import sys

from ..convert.carray import check_symbol, emit_carray
from ..convert.mlq import describe, load, save
from ..convert.quantize import QuantizedMlpModel, quantize
from ..core.config import Config
from ..core.errors import ExitStatus, ModelFormatError, SemanticError
from ..core.files import atomic_write, read_bytes
from .common import add_json_flag, emit_json

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    convert = subparsers.add_parser("convert", help="post-training int8 quantization of a .mlq model")
    convert.add_argument("model", help="float32 .mlq model")
    convert.add_argument("--quantize", action="store_true", required=True, help="quantize weights to int8")
    convert.add_argument("-o", "--out", required=True, help="output .mlq model")
    add_json_flag(convert)
    convert.set_defaults(func=run_convert)

    dump = subparsers.add_parser("dump", help="render a .mlq model as a C byte array")
    dump.add_argument("model", help=".mlq model")
    dump.add_argument("--symbol", help="C identifier of the array (default from configuration)")
    dump.add_argument("-o", "--out", help="output .cc file (default: stdout)")
    dump.set_defaults(func=run_dump)


def run_convert(args, config: Config) -> int:
    model = load(read_bytes(args.model))
    if isinstance(model, QuantizedMlpModel):
        raise ModelFormatError(f"{args.model}: model is already quantized")
    quantized = quantize(model)
    payload = save(quantized)
    atomic_write(args.out, payload)
    info = describe(quantized)
    logger.info(f"[量化] {args.model} -> {args.out}: {len(payload)} 字节")
    if args.json:
        emit_json({**info, "bytes": len(payload), "out": args.out})
    return ExitStatus.OK


def run_dump(args, config: Config) -> int:
    payload = read_bytes(args.model)
    load(payload)  # 只导出合法的模型
    try:
        symbol = check_symbol(args.symbol or config.get("codegen.carray_symbol", "model_data"))
    except ValueError as e:
        raise SemanticError(f"--symbol: {e}") from e
    text = emit_carray(payload, symbol)
    if args.out:
        atomic_write(args.out, text)
        logger.info(f"[导出] {args.model} -> {args.out}: {len(text)} 字节源码")
    else:
        sys.stdout.write(text)
    return ExitStatus.OK
