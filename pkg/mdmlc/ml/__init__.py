"""数值核心：MLP、训练、标准化、指标与合成数据"""
from .data import Dataset, Standardizer, chronological_split, fit_standardizer, read_csv, write_csv
from .metrics import Averaging, Metrics, evaluate
from .mlp import MlpArchitecture, MlpModel, predict, predict_batch
from .synth import synth_hydraulic_dataset
from .training import TrainConfig, TrainHistory, train, train_pipeline

__all__ = [
    "Averaging",
    "Dataset",
    "Metrics",
    "MlpArchitecture",
    "MlpModel",
    "Standardizer",
    "TrainConfig",
    "TrainHistory",
    "chronological_split",
    "evaluate",
    "fit_standardizer",
    "predict",
    "predict_batch",
    "read_csv",
    "synth_hydraulic_dataset",
    "train",
    "train_pipeline",
    "write_csv",
]
