"""小批量 Adam + 二元交叉熵训练，验证集早停"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from ..core.config import Config
from ..core.errors import DatasetError, NumericError
from .data import Dataset, Standardizer, chronological_split, fit_standardizer
from .metrics import Averaging, Metrics, evaluate
from .mlp import MlpArchitecture, MlpModel, activate, check_input, classify, initial_parameters

logger = logging.getLogger(__name__)

PROB_EPSILON = 1e-7


class TrainConfig(BaseModel):
    """训练超参数；默认值即原始实验配方"""
    learning_rate: float = Field(1e-5, ge=0)
    batch_size: int = Field(100, ge=1)
    max_epochs: int = Field(200, ge=1)
    early_stop_patience: int = Field(3, ge=0)
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-7
    shuffle: bool = False
    validation_fraction: float = Field(0.1, gt=0, lt=1)
    seed: int = 0

    @classmethod
    def from_config(cls, config: Config, **overrides) -> "TrainConfig":
        values = {
            "learning_rate": config.get("training.learning_rate"),
            "batch_size": config.get("training.batch_size"),
            "max_epochs": config.get("training.max_epochs"),
            "early_stop_patience": config.get("training.patience"),
            "validation_fraction": config.get("training.validation_fraction"),
            "seed": config.get("training.seed"),
        }
        values = {k: v for k, v in values.items() if v is not None}
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


class TrainHistory(BaseModel):
    loss: List[float] = []
    val_loss: List[float] = []
    accuracy: List[float] = []
    val_accuracy: List[float] = []
    best_epoch: int = 0
    stopped_epoch: int = 0
    stop_reason: str = "max_epochs"

    def to_log(self) -> str:
        """Training_results 日志：每个 epoch 一行"""
        lines = ["epoch,loss,accuracy,val_loss,val_accuracy"]
        for i, values in enumerate(zip(self.loss, self.accuracy, self.val_loss, self.val_accuracy), start=1):
            lines.append(f"{i}," + ",".join(f"{v:.6f}" for v in values))
        lines.append(f"# best_epoch={self.best_epoch} stopped_epoch={self.stopped_epoch} "
                     f"stop_reason={self.stop_reason}")
        return "\n".join(lines) + "\n"


def binary_cross_entropy(scores: np.ndarray, targets: np.ndarray) -> float:
    """逐单元 BCE 取平均，概率两端对称截断到 [ε, 1-ε]"""
    p = np.clip(scores, PROB_EPSILON, 1 - PROB_EPSILON)
    return float(-np.mean(targets * np.log(p) + (1 - targets) * np.log(1 - p)))


def _activation_grad(name: str, z: np.ndarray, a: np.ndarray) -> np.ndarray:
    if name == "relu":
        return (z > 0).astype(z.dtype)
    if name == "sigmoid":
        return a * (1 - a)
    return np.ones_like(z)


def loss_and_gradients(weights: Sequence[np.ndarray], biases: Sequence[np.ndarray],
                       activations: Sequence[str], x: np.ndarray, targets: np.ndarray):
    """返回 (loss, dW 列表, db 列表)，反向传播使用 float64"""
    pre, post = [], [x]
    a = x
    for w, b, act in zip(weights, biases, activations):
        z = a @ w.T + b
        a = activate(act, z)
        pre.append(z)
        post.append(a)

    loss = binary_cross_entropy(a, targets)
    inside = (a > PROB_EPSILON) & (a < 1 - PROB_EPSILON)
    safe = np.where(inside, a, 0.5)
    d_a = np.where(inside, (safe - targets) / (safe * (1 - safe)), 0.0) / targets.size

    grads_w: List[np.ndarray] = [None] * len(weights)
    grads_b: List[np.ndarray] = [None] * len(weights)
    for layer in reversed(range(len(weights))):
        d_z = d_a * _activation_grad(activations[layer], pre[layer], post[layer + 1])
        grads_w[layer] = d_z.T @ post[layer]
        grads_b[layer] = d_z.sum(axis=0)
        d_a = d_z @ weights[layer]
    return loss, grads_w, grads_b


class Adam:
    def __init__(self, params: List[np.ndarray], cfg: TrainConfig):
        self.params = params
        self.cfg = cfg
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, grads: List[np.ndarray]) -> None:
        cfg = self.cfg
        self.t += 1
        lr_t = cfg.learning_rate * np.sqrt(1 - cfg.beta2 ** self.t) / (1 - cfg.beta1 ** self.t)
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= cfg.beta1
            m += (1 - cfg.beta1) * g
            v *= cfg.beta2
            v += (1 - cfg.beta2) * g * g
            p -= lr_t * m / (np.sqrt(v) + cfg.epsilon)


class EarlyStopping:
    """验证损失连续 patience 个 epoch 没有严格下降则停止"""

    def __init__(self, patience: int):
        self.patience = patience
        self.best = np.inf
        self.best_epoch = 0
        self.wait = 0

    def update(self, epoch: int, val_loss: float) -> bool:
        if val_loss < self.best:
            self.best = val_loss
            self.best_epoch = epoch
            self.wait = 0
            return False
        self.wait += 1
        return self.wait >= max(self.patience, 1)


def _accuracy(scores: np.ndarray, labels: np.ndarray) -> float:
    return float(np.mean(classify(scores) == labels)) if labels.size else 0.0


def train(arch: MlpArchitecture, data: Dataset, cfg: Optional[TrainConfig] = None,
          initial: Optional[Tuple[list, list]] = None) -> Tuple[MlpModel, TrainHistory]:
    """训练集末尾 validation_fraction 的行作为验证集（保持时间顺序）"""
    cfg = cfg or TrainConfig()
    if arch.dims[-1] != 2:
        raise ValueError(f"the output layer must have 2 units, got {arch.dims[-1]}")
    x = check_input(arch, data.features)
    targets = data.one_hot()

    n_val = int(data.n * cfg.validation_fraction)
    if n_val < 1 or n_val >= data.n:
        raise DatasetError(f"{data.n} training rows are too few for a validation fraction of "
                           f"{cfg.validation_fraction}")
    n_fit = data.n - n_val
    x_fit, y_fit, labels_fit = x[:n_fit], targets[:n_fit], data.labels[:n_fit]
    x_val, y_val, labels_val = x[n_fit:], targets[n_fit:], data.labels[n_fit:]

    if initial is None:
        weights, biases = initial_parameters(arch, cfg.seed)
    else:
        weights = [np.array(w, dtype=np.float64) for w in initial[0]]
        biases = [np.array(b, dtype=np.float64) for b in initial[1]]
    optimizer = Adam(weights + biases, cfg)
    shuffle_rng = np.random.default_rng(cfg.seed)
    stopper = EarlyStopping(cfg.early_stop_patience)
    history = TrainHistory()
    best = ([w.copy() for w in weights], [b.copy() for b in biases])

    def scores_of(inputs):
        a = inputs
        for w, b, act in zip(weights, biases, arch.activations):
            a = activate(act, a @ w.T + b)
        return a

    for epoch in range(1, cfg.max_epochs + 1):
        order = shuffle_rng.permutation(n_fit) if cfg.shuffle else np.arange(n_fit)
        for batch, start in enumerate(range(0, n_fit, cfg.batch_size), start=1):
            idx = order[start:start + cfg.batch_size]
            loss, grads_w, grads_b = loss_and_gradients(weights, biases, arch.activations, x_fit[idx], y_fit[idx])
            if not np.isfinite(loss):
                raise NumericError(f"training diverged: loss is {loss} at epoch {epoch}, batch {batch}")
            optimizer.step(grads_w + grads_b)

        fit_scores = scores_of(x_fit)
        val_scores = scores_of(x_val)
        history.loss.append(binary_cross_entropy(fit_scores, y_fit))
        history.accuracy.append(_accuracy(fit_scores, labels_fit))
        history.val_loss.append(binary_cross_entropy(val_scores, y_val))
        history.val_accuracy.append(_accuracy(val_scores, labels_val))
        if not np.isfinite(history.val_loss[-1]):
            raise NumericError(f"validation loss is {history.val_loss[-1]} at epoch {epoch}")
        logger.debug(f"[训练] epoch {epoch}: loss={history.loss[-1]:.6f} "
                     f"val_loss={history.val_loss[-1]:.6f} val_acc={history.val_accuracy[-1]:.4f}")

        history.stopped_epoch = epoch
        stop = stopper.update(epoch, history.val_loss[-1])
        if stopper.best_epoch == epoch:
            best = ([w.copy() for w in weights], [b.copy() for b in biases])
        if stop:
            history.stop_reason = "early_stopping"
            break

    history.best_epoch = stopper.best_epoch
    logger.info(f"[训练] 结束于 epoch {history.stopped_epoch} ({history.stop_reason}), "
                f"最佳 epoch {history.best_epoch}, val_loss={stopper.best:.6f}")
    return MlpModel.from_arrays(arch, best[0], best[1]), history


@dataclass(frozen=True)
class PipelineResult:
    model: MlpModel
    standardizer: Standardizer
    history: TrainHistory
    metrics: Metrics
    train_rows: int
    test_rows: int


def train_pipeline(arch: MlpArchitecture, data: Dataset, cfg: Optional[TrainConfig] = None,
                   train_fraction: float = 0.8,
                   averaging: Averaging = Averaging.WEIGHTED) -> PipelineResult:
    """标准化 -> 按时间划分 -> 训练 -> 在测试集上评估"""
    train_set, test_set = chronological_split(data, train_fraction)
    standardizer = fit_standardizer(train_set)
    model, history = train(arch, standardizer.apply(train_set), cfg)
    metrics = evaluate(model, standardizer.apply(test_set), averaging)
    logger.info(f"[训练] 测试集 {test_set.n} 行: accuracy={metrics.accuracy:.4f} "
                f"precision={metrics.precision:.4f} recall={metrics.recall:.4f}")
    return PipelineResult(model, standardizer, history, metrics, train_set.n, test_set.n)
