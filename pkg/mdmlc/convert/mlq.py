""".mlq 二进制模型格式

    magic "MLQ1" | version u8 | dtype u8 (0=float32, 1=int8) | layers u16
    每层: in u32 | out u32 | activation u8 | payload
      float32: W (out×in 行主序) f32 | b f32
      int8:    scale f32 | zero_point i32 | W i8 | b f32

所有整数均为小端序。
"""
import struct
from typing import Union

import numpy as np

from ..core.errors import BadMagicError, ModelFormatError, TruncatedModelError, UnsupportedVersionError
from ..ml.mlp import MlpArchitecture, MlpModel
from .quantize import QuantizedMlpModel, QuantParams

MAGIC = b"MLQ1"
VERSION = 1
DTYPE_FLOAT32 = 0
DTYPE_INT8 = 1

ACTIVATION_CODES = {"linear": 0, "relu": 1, "sigmoid": 2}
ACTIVATION_NAMES = {code: name for name, code in ACTIVATION_CODES.items()}

_HEADER = struct.Struct("<4sBBH")
_LAYER = struct.Struct("<IIB")
_QUANT = struct.Struct("<fi")

HEADER_BYTES = _HEADER.size        # 8
LAYER_HEADER_BYTES = _LAYER.size   # 9
QUANT_META_BYTES = _QUANT.size     # 8

AnyModel = Union[MlpModel, QuantizedMlpModel]


def serialized_size(arch: MlpArchitecture, quantized: bool = False) -> int:
    """save() 输出长度的闭式解"""
    size = HEADER_BYTES + LAYER_HEADER_BYTES * len(arch.layers)
    if quantized:
        return size + QUANT_META_BYTES * len(arch.layers) + arch.weight_count + 4 * arch.bias_count
    return size + 4 * arch.param_count


def save(model: AnyModel) -> bytes:
    quantized = isinstance(model, QuantizedMlpModel)
    arch = model.architecture
    out = bytearray(_HEADER.pack(MAGIC, VERSION, DTYPE_INT8 if quantized else DTYPE_FLOAT32, len(arch.layers)))
    for index, ((n_in, n_out), act) in enumerate(zip(arch.layers, arch.activations)):
        out += _LAYER.pack(n_in, n_out, ACTIVATION_CODES[act])
        if quantized:
            p = model.params[index]
            out += _QUANT.pack(p.scale, p.zero_point)
            out += np.ascontiguousarray(model.weights[index], dtype=np.int8).tobytes()
        else:
            out += np.ascontiguousarray(model.weights[index], dtype="<f4").tobytes()
        out += np.ascontiguousarray(model.biases[index], dtype="<f4").tobytes()
    return bytes(out)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.data):
            raise TruncatedModelError(
                f"truncated model: {what} needs {n} bytes at offset {self.pos}, "
                f"only {len(self.data) - self.pos} left")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: struct.Struct, what: str):
        return fmt.unpack(self.take(fmt.size, what))

    def array(self, dtype: str, count: int, what: str) -> np.ndarray:
        itemsize = np.dtype(dtype).itemsize
        return np.frombuffer(self.take(itemsize * count, what), dtype=dtype).copy()


def load(data: bytes) -> AnyModel:
    """bad magic / 不支持的版本 / 截断 各自抛出不同的错误"""
    data = bytes(data)
    head = data[:len(MAGIC)]
    if head != MAGIC[:len(head)] or (not head and data):
        raise BadMagicError(f"not an .mlq model: bad magic {head!r}")
    reader = _Reader(data)
    magic, version, dtype, n_layers = reader.unpack(_HEADER, "header")
    if magic != MAGIC:
        raise BadMagicError(f"not an .mlq model: bad magic {magic!r}")
    if version != VERSION:
        raise UnsupportedVersionError(f"unsupported .mlq version {version} (supported: {VERSION})")
    if dtype not in (DTYPE_FLOAT32, DTYPE_INT8):
        raise ModelFormatError(f"unknown dtype byte {dtype}")
    if n_layers == 0:
        raise ModelFormatError("model has no layers")

    dims, activations, weights, biases, params = [], [], [], [], []
    for index in range(n_layers):
        n_in, n_out, act = reader.unpack(_LAYER, f"layer {index} header")
        if act not in ACTIVATION_NAMES:
            raise ModelFormatError(f"layer {index}: unknown activation code {act}")
        if n_in == 0 or n_out == 0:
            raise ModelFormatError(f"layer {index}: zero dimension")
        if dims and dims[-1] != n_in:
            raise ModelFormatError(f"layer {index}: input dimension {n_in} does not match previous "
                                   f"output dimension {dims[-1]}")
        if not dims:
            dims.append(n_in)
        dims.append(n_out)
        activations.append(ACTIVATION_NAMES[act])
        if dtype == DTYPE_INT8:
            scale, zero_point = reader.unpack(_QUANT, f"layer {index} quantization parameters")
            params.append(QuantParams(scale, zero_point))
            weights.append(reader.array("i1", n_in * n_out, f"layer {index} weights").reshape(n_out, n_in))
        else:
            weights.append(reader.array("<f4", n_in * n_out, f"layer {index} weights").reshape(n_out, n_in))
        biases.append(reader.array("<f4", n_out, f"layer {index} biases"))

    if reader.pos != len(data):
        raise ModelFormatError(f"{len(data) - reader.pos} trailing bytes after the last layer")

    arch = MlpArchitecture(dims=tuple(dims), activations=tuple(activations))
    if dtype == DTYPE_INT8:
        try:
            return QuantizedMlpModel(arch, tuple(w.astype(np.int8) for w in weights), tuple(params),
                                     tuple(b.astype(np.float32) for b in biases))
        except ValueError as e:
            raise ModelFormatError(str(e)) from e
    return MlpModel.from_arrays(arch, weights, biases)


def describe(model: AnyModel) -> dict:
    arch = model.architecture
    quantized = isinstance(model, QuantizedMlpModel)
    return {
        "dtype": "int8" if quantized else "float32",
        "architecture": list(arch.dims),
        "activations": list(arch.activations),
        "param_count": arch.param_count,
        "serialized_bytes": serialized_size(arch, quantized),
    }
