"""模型转换：.mlq 序列化、int8 量化、C 数组导出"""
from .carray import carray_size, emit_carray, parse_carray
from .mlq import load, save, serialized_size
from .quantize import QuantizedMlpModel, predict_quantized, quantize

__all__ = [
    "QuantizedMlpModel",
    "carray_size",
    "emit_carray",
    "load",
    "parse_carray",
    "predict_quantized",
    "quantize",
    "save",
    "serialized_size",
]
