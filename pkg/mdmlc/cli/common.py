"""子命令共用的辅助函数"""
import json
import logging
import os
import sys
from pathlib import Path
from typing import Dict, Iterable, Optional

from ..core.config import Config
from ..core.errors import SemanticError
from ..core.files import read_bytes
from ..model.diagnostics import Diagnostic
from ..services.linker import LinkedModel, resolve_imports
from ..services.platforms import PlatformRegistry, default_registry

logger = logging.getLogger(__name__)


def add_json_flag(parser) -> None:
    parser.add_argument("--json", action="store_true", help="machine-readable output on stdout")


def emit_json(payload) -> None:
    sys.stdout.write(json.dumps(payload, indent=2, ensure_ascii=False) + "\n")


def print_diagnostics(diagnostics: Iterable[Diagnostic]) -> None:
    for d in diagnostics:
        sys.stderr.write(f"{d}\n")


def load_model(path: str) -> LinkedModel:
    """解析入口文件并内联全部导入"""
    return resolve_imports(path)


def registry_for(args, config: Config) -> PlatformRegistry:
    platforms = getattr(args, "platforms", None)
    return default_registry(config, Path(platforms) if platforms else None)


def pick_configuration(linked: LinkedModel, name: Optional[str]) -> str:
    """未指定 --config 时，模型中必须恰好有一个配置"""
    if name:
        return name
    names = [c.name for c in linked.model.configurations]
    if len(names) != 1:
        shown = ", ".join(names) if names else "none"
        raise SemanticError(f"{linked.model.path}: choose a configuration with --config (declared: {shown})")
    return names[0]


def source_files(linked: LinkedModel) -> Dict[str, bytes]:
    """参与链接的源文件内容，键为相对入口文件目录的路径"""
    entry = linked.model.path
    base = os.path.dirname(entry) if entry else "."
    out: Dict[str, bytes] = {}
    for path in sorted(set(linked.provenance.values()) | ({entry} if entry else set())):
        if not path or path.startswith("<"):
            continue
        name = os.path.relpath(path, base).replace(os.sep, "/")
        out[name] = read_bytes(path)
    return out


def relative_to(model_path: Optional[str], target: str) -> str:
    """模型中的相对路径按模型文件所在目录解析"""
    if os.path.isabs(target) or not model_path:
        return target
    return os.path.join(os.path.dirname(model_path), target)
