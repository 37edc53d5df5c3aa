"""数据集、z-score 标准化与按时间顺序的划分"""
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np

from ..core.errors import DatasetError, MdmlIOError
from ..core.files import atomic_write, read_text

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Dataset:
    """n×d 特征矩阵 + 0/1 标签，行按时间顺序排列"""
    features: np.ndarray
    labels: np.ndarray
    feature_names: Tuple[str, ...] = ()
    chronological: bool = True

    def __post_init__(self):
        if self.features.ndim != 2:
            raise DatasetError(f"feature matrix must be 2-D, got shape {self.features.shape}")
        if self.labels.shape != (self.features.shape[0],):
            raise DatasetError(f"{self.features.shape[0]} rows but {self.labels.shape[0]} labels")
        if self.labels.size and not np.isin(self.labels, (0, 1)).all():
            raise DatasetError("labels must be 0 or 1")
        if not np.isfinite(self.features).all():
            raise DatasetError("feature matrix contains missing or non-finite values")
        if not self.feature_names:
            object.__setattr__(self, "feature_names", tuple(f"f{i}" for i in range(self.features.shape[1])))

    @classmethod
    def from_arrays(cls, features, labels, **kwargs) -> "Dataset":
        return cls(np.asarray(features, dtype=np.float64), np.asarray(labels, dtype=np.int64), **kwargs)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def rows(self, start: int, stop: Optional[int] = None) -> "Dataset":
        return Dataset(self.features[start:stop], self.labels[start:stop], self.feature_names, self.chronological)

    def with_features(self, features: np.ndarray) -> "Dataset":
        return Dataset(features, self.labels, self.feature_names, self.chronological)

    def one_hot(self) -> np.ndarray:
        """标签 -> 两列目标 [1-y, y]，对应 2 单元 sigmoid 输出层"""
        return np.stack([1 - self.labels, self.labels], axis=1).astype(np.float64)


def read_csv(path: Union[str, Path]) -> Dataset:
    """表头 f0,...,f{d-1},label；数值为十进制浮点"""
    text = read_text(path)
    lines = text.splitlines()
    if not lines:
        raise DatasetError(f"{path}: empty dataset file")
    header = [h.strip() for h in lines[0].split(",")]
    if len(header) < 2 or header[-1] != "label":
        raise DatasetError(f"{path}: expected header 'f0,...,label', got '{lines[0][:60]}'")
    if len(lines) == 1:
        raise DatasetError(f"{path}: dataset has no rows")
    try:
        table = np.loadtxt(lines[1:], delimiter=",", ndmin=2, dtype=np.float64)
    except ValueError as e:
        raise DatasetError(f"{path}: {e}") from e
    if table.shape[1] != len(header):
        raise DatasetError(f"{path}: header has {len(header)} columns, rows have {table.shape[1]}")
    labels = table[:, -1]
    if not np.isin(labels, (0.0, 1.0)).all():
        bad = int(np.flatnonzero(~np.isin(labels, (0.0, 1.0)))[0])
        raise DatasetError(f"{path}: row {bad + 2}: label must be 0 or 1, got {labels[bad]!r}")
    logger.debug(f"[数据] 读取 {path}: {table.shape[0]} 行, {table.shape[1] - 1} 个特征")
    try:
        return Dataset(table[:, :-1], labels.astype(np.int64), tuple(header[:-1]))
    except DatasetError as e:
        raise DatasetError(f"{path}: {e}") from e


def write_csv(data: Dataset, path: Union[str, Path]) -> None:
    """数值用最短可往返表示，read_csv 读回的矩阵逐位相同"""
    lines = [",".join(data.feature_names) + ",label"]
    for row, label in zip(data.features.tolist(), data.labels.tolist()):
        lines.append(",".join(map(repr, row)) + f",{int(label)}")
    atomic_write(path, "\n".join(lines) + "\n")


@dataclass(frozen=True, eq=False)
class Standardizer:
    """z-score 参数（总体标准差；零方差特征的 std 置为 1）"""
    mean: np.ndarray
    std: np.ndarray
    count: int = 0

    def transform(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.mean.shape[0]:
            raise DatasetError(f"standardizer fitted on {self.mean.shape[0]} features, got {x.shape[-1]}")
        return (x - self.mean) / self.std

    def inverse_transform(self, z: np.ndarray) -> np.ndarray:
        return np.asarray(z, dtype=np.float64) * self.std + self.mean

    def apply(self, data: Dataset) -> Dataset:
        return data.with_features(self.transform(data.features))

    def to_json(self) -> str:
        return json.dumps({
            "count": self.count,
            "mean": self.mean.tolist(),
            "std": self.std.tolist(),
        })

    @classmethod
    def from_json(cls, text: str) -> "Standardizer":
        try:
            obj = json.loads(text)
            return cls(np.asarray(obj["mean"], dtype=np.float64),
                       np.asarray(obj["std"], dtype=np.float64),
                       int(obj.get("count", 0)))
        except (ValueError, KeyError, TypeError) as e:
            raise MdmlIOError(f"invalid standardizer file: {e}") from e

    def save(self, path: Union[str, Path]) -> None:
        atomic_write(path, self.to_json() + "\n")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "Standardizer":
        try:
            return cls.from_json(read_text(path))
        except MdmlIOError as e:
            raise MdmlIOError(f"{path}: {e}") from e


def fit_standardizer(train: Dataset) -> Standardizer:
    """只在训练数据上计算每个特征的均值与标准差"""
    if train.n == 0:
        raise DatasetError("cannot fit a standardizer on an empty dataset")
    if train.n < 2:
        raise DatasetError("cannot fit a standardizer on fewer than 2 rows")
    constant = np.ptp(train.features, axis=0) == 0
    mean = np.where(constant, train.features[0], train.features.mean(axis=0))
    std = np.where(constant, 1.0, train.features.std(axis=0))
    return Standardizer(mean, std, train.n)


def standardizer_path(model_path: Union[str, Path]) -> Path:
    """标准化参数与模型文件放在一起：model.mlq -> model.scaler.json"""
    path = Path(model_path)
    return path.with_name(path.stem + ".scaler.json")


def chronological_split(data: Dataset, train_fraction: float = 0.8) -> Tuple[Dataset, Dataset]:
    """前 floor(fraction·n) 行训练，其余测试；不打乱顺序"""
    if not 0 < train_fraction < 1:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    if data.n < 2:
        raise DatasetError(f"cannot split a dataset with {data.n} row(s)")
    cut = min(max(math.floor(train_fraction * data.n), 1), data.n - 1)
    return data.rows(0, cut), data.rows(cut)
