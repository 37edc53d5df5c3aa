"""分类指标：全部由混淆矩阵推导"""
from enum import Enum
from typing import List

import numpy as np
from pydantic import BaseModel

from ..core.errors import DatasetError
from .data import Dataset
from .mlp import predict_batch


class Averaging(str, Enum):
    WEIGHTED = "weighted"
    MACRO = "macro"
    POSITIVE = "positive"


class Metrics(BaseModel):
    accuracy: float
    precision: float
    recall: float
    averaging: Averaging
    # 行 = 真实类别，列 = 预测类别
    confusion: List[List[int]]
    support: List[int]


def _ratio(num: float, den: float) -> float:
    return float(num) / float(den) if den else 0.0


def confusion_matrix(y_true, y_pred) -> np.ndarray:
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    matrix = np.zeros((2, 2), dtype=np.int64)
    np.add.at(matrix, (y_true, y_pred), 1)
    return matrix


def metrics_from_confusion(matrix, averaging: Averaging = Averaging.WEIGHTED) -> Metrics:
    matrix = np.asarray(matrix, dtype=np.int64)
    averaging = Averaging(averaging)
    total = int(matrix.sum())
    support = matrix.sum(axis=1)
    predicted = matrix.sum(axis=0)
    diag = np.diag(matrix)

    per_precision = [_ratio(diag[c], predicted[c]) for c in range(2)]
    per_recall = [_ratio(diag[c], support[c]) for c in range(2)]

    if averaging is Averaging.POSITIVE:
        precision, recall = per_precision[1], per_recall[1]
    elif averaging is Averaging.MACRO:
        precision, recall = float(np.mean(per_precision)), float(np.mean(per_recall))
    else:
        weights = [_ratio(s, total) for s in support]
        precision = float(np.dot(weights, per_precision))
        recall = float(np.dot(weights, per_recall))

    return Metrics(
        accuracy=_ratio(diag.sum(), total),
        precision=precision,
        recall=recall,
        averaging=averaging,
        confusion=matrix.tolist(),
        support=support.tolist(),
    )


def evaluate(model, test: Dataset, averaging: Averaging = Averaging.WEIGHTED) -> Metrics:
    if test.n == 0:
        raise DatasetError("cannot evaluate on an empty test set")
    classes, _ = predict_batch(model, test.features)
    return metrics_from_confusion(confusion_matrix(test.labels, classes), averaging)
