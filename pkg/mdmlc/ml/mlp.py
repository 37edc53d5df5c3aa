"""多层感知机：结构定义、前向推理"""
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from ..core.errors import DatasetError

ACTIVATIONS = ("linear", "relu", "sigmoid")
MAX_DIM = 0xFFFFFFFF  # .mlq 中维度为 uint32
MAX_LAYERS = 0xFFFF


class MlpArchitecture(BaseModel):
    """层维度 [d0, d1, ..., dL] 与每个非输入层的激活函数"""
    model_config = ConfigDict(frozen=True)

    dims: Tuple[int, ...]
    activations: Tuple[str, ...]

    @field_validator("dims")
    @classmethod
    def _check_dims(cls, dims):
        if len(dims) < 2:
            raise ValueError("an MLP needs at least an input and an output layer")
        if len(dims) - 1 > MAX_LAYERS:
            raise ValueError(f"too many layers: {len(dims) - 1}")
        for d in dims:
            if d < 1:
                raise ValueError(f"layer dimensions must be at least 1, got {d}")
            if d > MAX_DIM:
                raise ValueError(f"layer dimension {d} overflows 32 bits")
        return dims

    @model_validator(mode="after")
    def _check_activations(self):
        if len(self.activations) != len(self.dims) - 1:
            raise ValueError(f"expected {len(self.dims) - 1} activations, got {len(self.activations)}")
        for a in self.activations:
            if a not in ACTIVATIONS:
                raise ValueError(f"unknown activation '{a}' (expected one of {', '.join(ACTIVATIONS)})")
        return self

    @classmethod
    def build(cls, dims: Sequence[int], hidden: str = "relu", output: str = "sigmoid") -> "MlpArchitecture":
        dims = tuple(int(d) for d in dims)
        n_layers = max(len(dims) - 1, 0)
        activations = tuple([hidden] * (n_layers - 1) + [output]) if n_layers else ()
        return cls(dims=dims, activations=activations)

    @classmethod
    def parse(cls, text: str, hidden: str = "relu", output: str = "sigmoid") -> "MlpArchitecture":
        """'6120,32,2' -> MlpArchitecture"""
        try:
            dims = [int(part) for part in text.split(",") if part.strip()]
        except ValueError:
            raise ValueError(f"invalid architecture '{text}': expected comma-separated integers")
        return cls.build(dims, hidden, output)

    @property
    def layers(self) -> List[Tuple[int, int]]:
        return list(zip(self.dims[:-1], self.dims[1:]))

    @property
    def weight_count(self) -> int:
        return sum(i * o for i, o in self.layers)

    @property
    def bias_count(self) -> int:
        return sum(o for _, o in self.layers)

    @property
    def param_count(self) -> int:
        return self.weight_count + self.bias_count

    def __str__(self) -> str:
        return ",".join(str(d) for d in self.dims)


def activate(name: str, z: np.ndarray) -> np.ndarray:
    if name == "relu":
        return np.maximum(z, 0)
    if name == "sigmoid":
        # 截断避免 exp 溢出告警
        return 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))
    return z


def forward(weights: Sequence[np.ndarray], biases: Sequence[np.ndarray],
            activations: Sequence[str], x: np.ndarray) -> np.ndarray:
    """a0 = x; a_l = act(W_l a_{l-1} + b_l)，按行批量计算"""
    a = x
    for w, b, act in zip(weights, biases, activations):
        a = activate(act, a @ w.T + b)
    return a


def classify(scores: np.ndarray) -> np.ndarray:
    # argmax 遇到并列时返回第一个，即类别 0
    return np.argmax(scores, axis=-1)


def check_input(arch: MlpArchitecture, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != arch.dims[0]:
        raise DatasetError(f"input has {x.shape[-1]} features, model expects {arch.dims[0]}")
    return x


@dataclass(frozen=True, eq=False)
class MlpModel:
    """float32 权重：W 为 out×in 行主序"""
    architecture: MlpArchitecture
    weights: Tuple[np.ndarray, ...]
    biases: Tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.weights) != len(self.architecture.layers) or len(self.biases) != len(self.weights):
            raise ValueError("layer count does not match the architecture")
        for index, ((n_in, n_out), w, b) in enumerate(zip(self.architecture.layers, self.weights, self.biases)):
            if w.shape != (n_out, n_in) or b.shape != (n_out,):
                raise ValueError(f"layer {index}: expected weight {(n_out, n_in)} and bias {(n_out,)}, "
                                 f"got {w.shape} and {b.shape}")

    @classmethod
    def from_arrays(cls, architecture: MlpArchitecture, weights, biases) -> "MlpModel":
        return cls(
            architecture,
            tuple(np.ascontiguousarray(w, dtype=np.float32) for w in weights),
            tuple(np.ascontiguousarray(b, dtype=np.float32) for b in biases),
        )

    @classmethod
    def zeros(cls, architecture: MlpArchitecture) -> "MlpModel":
        return cls.from_arrays(
            architecture,
            [np.zeros((o, i)) for i, o in architecture.layers],
            [np.zeros(o) for _, o in architecture.layers],
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, MlpModel) or self.architecture != other.architecture:
            return False
        return all(np.array_equal(a, b) for a, b in zip(self.weights + self.biases, other.weights + other.biases))

    def scores(self, x: np.ndarray) -> np.ndarray:
        x = check_input(self.architecture, x)
        return forward([w.astype(np.float64) for w in self.weights],
                       [b.astype(np.float64) for b in self.biases],
                       self.architecture.activations, x)


def initial_parameters(architecture: MlpArchitecture, seed: int = 0):
    """缩放均匀分布初始化 (bound = sqrt(6/(in+out)))，偏置为 0；float64"""
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for n_in, n_out in architecture.layers:
        bound = np.sqrt(6.0 / (n_in + n_out))
        weights.append(rng.uniform(-bound, bound, size=(n_out, n_in)))
        biases.append(np.zeros(n_out))
    return weights, biases


def initial_model(architecture: MlpArchitecture, seed: int = 0) -> MlpModel:
    weights, biases = initial_parameters(architecture, seed)
    return MlpModel.from_arrays(architecture, weights, biases)


def predict(model, x) -> Tuple[int, np.ndarray]:
    """单个样本 -> (类别, 各类分数)；float 与量化模型共用"""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise DatasetError(f"expected a single feature vector, got shape {x.shape}")
    scores = model.scores(x[None, :])[0]
    return int(classify(scores)), scores


def predict_batch(model, x) -> Tuple[np.ndarray, np.ndarray]:
    scores = model.scores(np.atleast_2d(np.asarray(x, dtype=np.float64)))
    return classify(scores), scores
