"""错误类型与退出码"""
from enum import IntEnum
from typing import List, Optional, TYPE_CHECKING

if TYPE_CHECKING:
    from ..model.diagnostics import Diagnostic


class ExitStatus(IntEnum):
    """命令行退出码（跨版本保持稳定）"""
    OK = 0
    PARSE_ERROR = 1
    SEMANTIC_ERROR = 2
    DEPLOY_REJECTED = 3
    IO_ERROR = 4
    NUMERIC_ERROR = 5


class MdmlError(Exception):
    """所有工具链错误的基类"""
    exit_status = ExitStatus.SEMANTIC_ERROR


class ParseFailure(MdmlError):
    """语法分析失败，可能同时包含多个 ParseError"""
    exit_status = ExitStatus.PARSE_ERROR

    def __init__(self, errors: list):
        self.errors = list(errors)
        first = self.errors[0] if self.errors else None
        super().__init__(str(first) if first else "parse failed")


class SemanticError(MdmlError):
    """模型语义错误，携带诊断列表"""
    exit_status = ExitStatus.SEMANTIC_ERROR

    def __init__(self, message: str, diagnostics: Optional[List["Diagnostic"]] = None):
        super().__init__(message)
        self.diagnostics = list(diagnostics or [])


class LinkError(SemanticError):
    """导入解析 / PIM-PSM 组合失败"""


class GuardError(SemanticError):
    """守卫表达式求值失败"""


class DeploymentRejected(MdmlError):
    """模型超出目标平台的存储预算"""
    exit_status = ExitStatus.DEPLOY_REJECTED

    def __init__(self, message: str, decision=None):
        super().__init__(message)
        self.decision = decision


class MdmlIOError(MdmlError):
    """文件读写错误"""
    exit_status = ExitStatus.IO_ERROR


class ModelFormatError(MdmlIOError):
    """.mlq 二进制格式错误"""


class BadMagicError(ModelFormatError):
    pass


class UnsupportedVersionError(ModelFormatError):
    pass


class TruncatedModelError(ModelFormatError):
    pass


class CArrayFormatError(MdmlIOError):
    """C 数组源文件格式错误"""


class NumericError(MdmlError):
    """数值失败（例如训练中出现 NaN 损失）"""
    exit_status = ExitStatus.NUMERIC_ERROR


class DatasetError(MdmlIOError):
    """数据集为空、维度不符或标签非法"""
