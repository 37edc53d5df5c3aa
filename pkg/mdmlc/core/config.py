"""配置管理模块"""
import copy
import logging
from pathlib import Path
from typing import Dict, Optional

import yaml
from pydantic_settings import BaseSettings, SettingsConfigDict

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_NAME = "mdml.yaml"

DEFAULT_CONFIG: Dict = {
    'training': {
        # 原始实验配方；合成数据集上建议把学习率放大 100 倍
        'learning_rate': 1e-5,
        'batch_size': 100,
        'max_epochs': 200,
        'patience': 3,
        'validation_fraction': 0.1,
        'train_fraction': 0.8,
        'seed': 0
    },
    'deploy': {
        'policy': 'source',
        'program_reserve': '128KiB'
    },
    'codegen': {
        'carray_symbol': 'model_data'
    },
    'logging': {
        'level': 'INFO',
        'dir': None
    }
}


class Settings(BaseSettings):
    """环境变量设置（前缀 MDML_）"""
    model_config = SettingsConfigDict(env_prefix="MDML_")

    config: Optional[Path] = None
    platforms: Optional[Path] = None
    log_level: Optional[str] = None
    log_dir: Optional[Path] = None


def _deep_merge(base: Dict, override: Dict) -> Dict:
    merged = copy.deepcopy(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


class Config:
    """配置管理类"""

    def __init__(self, config_path: Optional[str] = None, settings: Optional[Settings] = None):
        self.settings = settings or Settings()
        self.config_path = self._resolve_config_path(config_path)

        # 加载配置
        self._config = self._load_config()

    def _resolve_config_path(self, config_path: Optional[str]) -> Optional[Path]:
        """命令行参数 > MDML_CONFIG > 当前目录下的 mdml.yaml"""
        if config_path:
            return Path(config_path)
        if self.settings.config:
            return Path(self.settings.config)
        candidate = Path.cwd() / DEFAULT_CONFIG_NAME
        return candidate if candidate.exists() else None

    def _load_config(self) -> Dict:
        """加载配置文件，缺失时使用内置默认值"""
        if self.config_path is None:
            return copy.deepcopy(DEFAULT_CONFIG)

        path = Path(self.config_path)
        if not path.exists():
            logger.warning(f"配置文件不存在, 使用默认配置: {path}")
            return copy.deepcopy(DEFAULT_CONFIG)

        with open(path, 'r', encoding='utf-8') as f:
            loaded = yaml.safe_load(f) or {}
        if not isinstance(loaded, dict):
            raise ValueError(f"{path}: configuration root must be a mapping")

        logger.debug(f"已加载配置: {path}")
        return _deep_merge(DEFAULT_CONFIG, loaded)

    def get(self, key: str, default=None):
        """获取配置值，支持点号分隔的嵌套键"""
        keys = key.split('.')
        value = self._config
        for k in keys:
            if isinstance(value, dict):
                value = value.get(k)
                if value is None:
                    return default
            else:
                return default
        return value

    def set(self, key: str, value):
        """设置配置值，支持点号分隔的嵌套键"""
        keys = key.split('.')
        config = self._config
        for k in keys[:-1]:
            if k not in config:
                config[k] = {}
            config = config[k]
        config[keys[-1]] = value

    @property
    def log_level(self) -> str:
        return (self.settings.log_level or self.get('logging.level', 'INFO')).upper()

    @property
    def log_dir(self) -> Optional[Path]:
        """日志目录；未配置时只输出到 stderr"""
        if self.settings.log_dir:
            return Path(self.settings.log_dir)
        value = self.get('logging.dir')
        return Path(value) if value else None

    @property
    def platforms_path(self) -> Optional[Path]:
        """用户平台文件 (MDML_PLATFORMS)"""
        return Path(self.settings.platforms) if self.settings.platforms else None


_config: Optional[Config] = None


def get_config() -> Config:
    """获取全局配置实例"""
    global _config
    if _config is None:
        _config = Config()
    return _config


def set_config(config: Optional[Config]) -> None:
    """替换全局配置（命令行 --config 与测试使用）"""
    global _config
    _config = config
