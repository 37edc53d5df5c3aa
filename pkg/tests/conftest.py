"""共用 fixtures"""
import os
from pathlib import Path

import numpy as np
import pytest

from mdmlc.core.config import Config, set_config
from mdmlc.ml.data import Dataset
from mdmlc.services.platforms import default_registry

ROOT = Path(__file__).resolve().parent.parent
MODELS = ROOT / "models"
HYDRAULIC = MODELS / "hydraulic"
TUTORIAL = MODELS / "tutorial"
GOLDEN = Path(__file__).resolve().parent / "golden"


@pytest.fixture(autouse=True)
def isolated(tmp_path, monkeypatch):
    """每个测试在空目录中运行，且不受 MDML_* 环境变量影响"""
    for key in list(os.environ):
        if key.startswith("MDML_") and key != "MDML_UPDATE_GOLDEN":
            monkeypatch.delenv(key)
    monkeypatch.chdir(tmp_path)
    set_config(None)
    yield
    set_config(None)


@pytest.fixture
def config():
    cfg = Config()
    set_config(cfg)
    return cfg


@pytest.fixture
def registry(config):
    return default_registry(config)


@pytest.fixture
def separable_dataset():
    """两个高斯团，按时间交错排列；4 个特征"""
    rng = np.random.default_rng(7)
    n = 400
    labels = (rng.random(n) < 0.5).astype(np.int64)
    features = rng.normal(size=(n, 4)) + labels[:, None] * 3.0
    return Dataset.from_arrays(features, labels)


@pytest.fixture
def memory_loader():
    """resolve_imports 使用的内存文件系统"""
    files = {}

    def add(path, text):
        files[os.path.normpath(path)] = text
        return os.path.normpath(path)

    def load(path):
        return files[path]

    load.add = add
    return load
