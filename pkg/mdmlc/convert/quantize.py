"""训练后量化：逐张量仿射 int8 权重，偏置保持 float32"""
import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..core.errors import NumericError
from ..ml.mlp import MlpArchitecture, MlpModel, check_input, forward, predict

logger = logging.getLogger(__name__)

QMIN, QMAX = -128, 127


@dataclass(frozen=True)
class QuantParams:
    scale: float  # 以 float32 存储
    zero_point: int

    def dequantize(self, q: np.ndarray) -> np.ndarray:
        return np.float64(self.scale) * (q.astype(np.float64) - self.zero_point)


def quant_params(tensor: np.ndarray) -> QuantParams:
    """s = (max-min)/255, z = round(-128 - min/s)

    范围先扩展到包含 0，这样 z 不会被截断，误差上界 s/2 对任意张量都成立；
    只有范围退化（常数张量）时取 s = 1。
    """
    lo, hi = float(tensor.min()), float(tensor.max())
    if hi == lo:
        scale = np.float32(1.0)
    else:
        lo, hi = min(lo, 0.0), max(hi, 0.0)
        exact = (hi - lo) / 255.0
        scale = np.float32(exact)
        # float32 舍入后 s 不能变小，否则 [min, max] 放不进 256 个格点
        if float(scale) < exact:
            scale = np.nextafter(scale, np.float32(np.inf))
    zero_point = int(np.clip(np.round(-128.0 - lo / float(scale)), QMIN, QMAX))
    return QuantParams(float(scale), zero_point)


def quantize_tensor(tensor: np.ndarray, params: QuantParams) -> np.ndarray:
    q = np.round(tensor.astype(np.float64) / params.scale + params.zero_point)
    return np.clip(q, QMIN, QMAX).astype(np.int8)


@dataclass(frozen=True, eq=False)
class QuantizedMlpModel:
    architecture: MlpArchitecture
    weights: Tuple[np.ndarray, ...]  # int8, out×in
    params: Tuple[QuantParams, ...]
    biases: Tuple[np.ndarray, ...]   # float32

    def __post_init__(self):
        for index, ((n_in, n_out), q, p, b) in enumerate(
                zip(self.architecture.layers, self.weights, self.params, self.biases)):
            if q.shape != (n_out, n_in) or q.dtype != np.int8 or b.shape != (n_out,):
                raise ValueError(f"layer {index}: tensor shapes do not match the architecture")
            if not p.scale > 0 or not QMIN <= p.zero_point <= QMAX:
                raise ValueError(f"layer {index}: invalid quantization parameters {p}")

    def __eq__(self, other) -> bool:
        if not isinstance(other, QuantizedMlpModel) or self.architecture != other.architecture:
            return False
        if self.params != other.params:
            return False
        return all(np.array_equal(a, b) for a, b in zip(self.weights + self.biases,
                                                        other.weights + other.biases))

    def dequantized_weights(self):
        return [p.dequantize(q) for q, p in zip(self.weights, self.params)]

    def scores(self, x: np.ndarray) -> np.ndarray:
        """推理时按需反量化权重"""
        x = check_input(self.architecture, x)
        return forward(self.dequantized_weights(), [b.astype(np.float64) for b in self.biases],
                       self.architecture.activations, x)


def quantize(model: MlpModel) -> QuantizedMlpModel:
    weights, params = [], []
    for index, w in enumerate(model.weights):
        if not np.isfinite(w).all():
            raise NumericError(f"layer {index}: weights contain NaN or Inf, cannot quantize")
        p = quant_params(w)
        weights.append(quantize_tensor(w, p))
        params.append(p)
        logger.debug(f"[量化] layer {index}: scale={p.scale:.6g} zero_point={p.zero_point}")
    for index, b in enumerate(model.biases):
        if not np.isfinite(b).all():
            raise NumericError(f"layer {index}: biases contain NaN or Inf, cannot quantize")
    return QuantizedMlpModel(model.architecture, tuple(weights), tuple(params),
                             tuple(b.astype(np.float32) for b in model.biases))


def predict_quantized(qmodel: QuantizedMlpModel, x):
    """与 float 模型相同的接口与并列规则"""
    return predict(qmodel, x)
