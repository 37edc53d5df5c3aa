"""平台注册表、模型大小估算与可部署性判断"""
import logging
import re
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, computed_field, field_validator

from ..convert.carray import EXPANSION_RATIO, carray_size, check_symbol
from ..convert.mlq import serialized_size
from ..core.config import Config, get_config
from ..core.errors import MdmlIOError
from ..core.files import read_text
from ..ml.mlp import MlpArchitecture

logger = logging.getLogger(__name__)

KiB = 1024
MiB = 1024 * KiB
GiB = 1024 * MiB

DEFAULT_PROGRAM_RESERVE = 128 * KiB
GENERATORS = ("python_java", "rpi_python", "arduino_cpp")

_SIZE_UNITS = {
    "": 1, "b": 1,
    "kb": 10 ** 3, "mb": 10 ** 6, "gb": 10 ** 9,
    "kib": KiB, "mib": MiB, "gib": GiB,
}
_CLOCK_UNITS = {"": 1, "hz": 1, "khz": 10 ** 3, "mhz": 10 ** 6, "ghz": 10 ** 9}
_QUANTITY = re.compile(r"^\s*(\d+(?:\.\d+)?)\s*([A-Za-z]*)\s*$")


def _parse_quantity(value: Union[int, float, str], units: Dict[str, int], what: str) -> int:
    if isinstance(value, bool):
        raise ValueError(f"invalid {what}: {value!r}")
    if isinstance(value, (int, float)):
        return int(value)
    match = _QUANTITY.match(str(value))
    if not match or match.group(2).lower() not in units:
        raise ValueError(f"invalid {what} '{value}' (units: {', '.join(u for u in units if u)})")
    return int(round(float(match.group(1)) * units[match.group(2).lower()]))


def parse_size(value: Union[int, float, str]) -> int:
    """'1MB' -> 1000000, '1MiB' -> 1048576（KB/MB 为十进制，KiB/MiB 为二进制）"""
    return _parse_quantity(value, _SIZE_UNITS, "size")


def parse_clock(value: Union[int, float, str]) -> int:
    return _parse_quantity(value, _CLOCK_UNITS, "clock")


class PlatformProfile(BaseModel):
    """代码生成目标；ram/flash 为 None 表示不受限"""
    model_config = ConfigDict(frozen=True)

    compiler_id: str
    display_name: str = ""
    ram_bytes: Optional[int] = Field(None, gt=0)
    flash_bytes: Optional[int] = Field(None, gt=0)
    cpu_clock_hz: Optional[int] = Field(None, gt=0)
    language: str = "python"
    ml_backend: str = "tensorflow"
    quantized: bool = False
    generator: str = "rpi_python"
    program_reserve_bytes: int = Field(DEFAULT_PROGRAM_RESERVE, ge=0)

    @field_validator("generator")
    @classmethod
    def _check_generator(cls, value):
        if value not in GENERATORS:
            raise ValueError(f"unknown generator '{value}' (expected one of {', '.join(GENERATORS)})")
        return value

    @property
    def unconstrained(self) -> bool:
        return self.ram_bytes is None and self.flash_bytes is None

    @property
    def description(self) -> str:
        parts = [self.display_name or self.compiler_id]
        if self.unconstrained:
            parts.append("unconstrained")
        else:
            if self.ram_bytes:
                parts.append(f"RAM {format_bytes(self.ram_bytes)}")
            if self.flash_bytes:
                parts.append(f"flash {format_bytes(self.flash_bytes)}")
        if self.cpu_clock_hz:
            parts.append(f"{self.cpu_clock_hz / 1e6:g} MHz")
        if self.quantized:
            parts.append("int8")
        return ", ".join(parts)


def format_bytes(n: int) -> str:
    for unit, size in (("GiB", GiB), ("MiB", MiB), ("KiB", KiB)):
        if n >= size and n % size == 0:
            return f"{n // size} {unit}"
    return f"{n} B"


def builtin_registry() -> List[PlatformProfile]:
    return [
        PlatformProfile(
            compiler_id="python_java",
            display_name="x86 workstation (Python + Java)",
            language="python+java",
            ml_backend="tensorflow",
            generator="python_java",
        ),
        PlatformProfile(
            compiler_id="rpi_3b+_python",
            display_name="Raspberry Pi 3B+ (Python)",
            ram_bytes=1 * GiB,
            cpu_clock_hz=1_400_000_000,
            language="python",
            ml_backend="tensorflow",
            generator="rpi_python",
        ),
        PlatformProfile(
            compiler_id="rpi_3b+_python_quantized",
            display_name="Raspberry Pi 3B+ (Python, quantized)",
            ram_bytes=1 * GiB,
            cpu_clock_hz=1_400_000_000,
            language="python",
            ml_backend="tflite",
            quantized=True,
            generator="rpi_python",
        ),
        PlatformProfile(
            compiler_id="arduino_nano_33_ble_sense_cpp",
            display_name="Arduino Nano 33 BLE Sense (C++)",
            ram_bytes=256 * KiB,
            flash_bytes=1 * MiB,
            cpu_clock_hz=64_000_000,
            language="cpp",
            ml_backend="tflite-micro",
            quantized=True,
            generator="arduino_cpp",
        ),
    ]


class PlatformRegistry:
    """compiler_id -> PlatformProfile；构造完成后只读"""

    def __init__(self, profiles: Iterable[PlatformProfile] = ()):
        self._profiles: Dict[str, PlatformProfile] = {}
        for profile in profiles:
            self.register(profile)

    def register(self, profile: PlatformProfile) -> None:
        if profile.compiler_id in self._profiles:
            raise ValueError(f"duplicate platform '{profile.compiler_id}'")
        self._profiles[profile.compiler_id] = profile

    def lookup(self, compiler_id: str) -> Optional[PlatformProfile]:
        return self._profiles.get(compiler_id)

    def __contains__(self, compiler_id: str) -> bool:
        return compiler_id in self._profiles

    @property
    def ids(self) -> List[str]:
        return sorted(self._profiles)

    def profiles(self) -> List[PlatformProfile]:
        return [self._profiles[i] for i in self.ids]


def _profile_from_record(record: dict, origin: str) -> PlatformProfile:
    if not isinstance(record, dict) or "compiler_id" not in record:
        raise MdmlIOError(f"{origin}: every platform record needs a compiler_id")
    try:
        values = {
            "compiler_id": str(record["compiler_id"]),
            "display_name": str(record.get("name", record["compiler_id"])),
            "quantized": bool(record.get("quantized", False)),
        }
        if record.get("ram") is not None:
            values["ram_bytes"] = parse_size(record["ram"])
        if record.get("flash") is not None:
            values["flash_bytes"] = parse_size(record["flash"])
        if record.get("clock") is not None:
            values["cpu_clock_hz"] = parse_clock(record["clock"])
        if record.get("program_reserve") is not None:
            values["program_reserve_bytes"] = parse_size(record["program_reserve"])
        values["generator"] = record.get(
            "generator", "arduino_cpp" if values.get("flash_bytes") else "rpi_python")
        for key in ("language", "ml_backend"):
            if key in record:
                values[key] = str(record[key])
        return PlatformProfile(**values)
    except (ValueError, ValidationError) as e:
        raise MdmlIOError(f"{origin}: platform '{record['compiler_id']}': {e}") from e


def load_platform_file(path: Union[str, Path]) -> List[PlatformProfile]:
    """YAML：记录列表，或 {platforms: [...]}"""
    try:
        loaded = yaml.safe_load(read_text(path))
    except yaml.YAMLError as e:
        raise MdmlIOError(f"{path}: invalid YAML: {e}") from e
    if isinstance(loaded, dict):
        loaded = loaded.get("platforms", [])
    if loaded is None:
        return []
    if not isinstance(loaded, list):
        raise MdmlIOError(f"{path}: expected a list of platform records")
    profiles = [_profile_from_record(r, str(path)) for r in loaded]
    logger.debug(f"[平台] 从 {path} 加载 {len(profiles)} 个自定义平台")
    return profiles


def default_registry(config: Optional[Config] = None, platforms_path: Optional[Path] = None) -> PlatformRegistry:
    """内置平台 + MDML_PLATFORMS（或 --platforms）指定的文件"""
    config = config or get_config()
    reserve = parse_size(config.get('deploy.program_reserve', DEFAULT_PROGRAM_RESERVE))
    registry = PlatformRegistry(p.model_copy(update={"program_reserve_bytes": reserve})
                                for p in builtin_registry())
    path = platforms_path or config.platforms_path
    if path is not None:
        for profile in load_platform_file(path):
            try:
                registry.register(profile)
            except ValueError as e:
                raise MdmlIOError(f"{path}: {e}") from e
    return registry


class SizeReport(BaseModel):
    """大小单位均为字节；x86 厂商格式的大小不建模"""
    architecture: List[int]
    param_count: int
    weight_count: int
    bias_count: int
    float_serialized_bytes: int
    quantized_serialized_bytes: int
    carray_source_bytes: int
    float_carray_source_bytes: int
    # 每个负载字节渐近占用的源码字节数，与网络结构无关
    expansion_ratio: float = EXPANSION_RATIO
    arena_bytes: int
    carray_symbol: str = "model_data"
    vendor_format: str = "not modeled"


def arena_estimate(arch: MlpArchitecture) -> int:
    """推理时需要同时存在的两层激活 (float32)"""
    return 4 * max(a + b for a, b in zip(arch.dims[:-1], arch.dims[1:]))


def estimate_sizes(arch: MlpArchitecture, symbol: str = "model_data") -> SizeReport:
    check_symbol(symbol)
    quantized = serialized_size(arch, quantized=True)
    floating = serialized_size(arch, quantized=False)
    return SizeReport(
        architecture=list(arch.dims),
        param_count=arch.param_count,
        weight_count=arch.weight_count,
        bias_count=arch.bias_count,
        float_serialized_bytes=floating,
        quantized_serialized_bytes=quantized,
        carray_source_bytes=carray_size(quantized, symbol),
        float_carray_source_bytes=carray_size(floating, symbol),
        arena_bytes=arena_estimate(arch),
        carray_symbol=symbol,
    )


class DeployPolicy(str, Enum):
    SOURCE = "source"    # C 数组源文件大小 vs flash
    STRICT = "strict"  # 模型 + 程序预留 vs flash，模型 + arena vs RAM


class ConstraintCheck(BaseModel):
    constraint: str
    required_bytes: int
    budget_bytes: int

    @computed_field
    @property
    def margin_bytes(self) -> int:
        return self.budget_bytes - self.required_bytes

    @computed_field
    @property
    def ok(self) -> bool:
        return self.required_bytes <= self.budget_bytes


class DeployDecision(BaseModel):
    accepted: bool
    compiler_id: str
    policy: DeployPolicy
    binding_constraint: Optional[str] = None
    margin_bytes: Optional[int] = None
    checks: List[ConstraintCheck] = []

    def summary(self) -> str:
        if not self.checks:
            return f"{self.compiler_id}: accepted (unconstrained target)"
        verdict = "accepted" if self.accepted else "rejected"
        lines = [f"{self.compiler_id}: {verdict} under {self.policy.value} policy"]
        for c in self.checks:
            lines.append(f"  {c.constraint}: need {c.required_bytes} B, budget {c.budget_bytes} B, "
                         f"margin {c.margin_bytes} B")
        return "\n".join(lines)


def check_deployability(report: SizeReport, profile: PlatformProfile,
                        policy: DeployPolicy = DeployPolicy.SOURCE) -> DeployDecision:
    """拒绝当且仅当至少一项预算不满足"""
    policy = DeployPolicy(policy)
    model_bytes = report.quantized_serialized_bytes if profile.quantized else report.float_serialized_bytes
    checks: List[ConstraintCheck] = []
    if policy is DeployPolicy.SOURCE:
        if profile.flash_bytes is not None:
            carray = report.carray_source_bytes if profile.quantized else report.float_carray_source_bytes
            checks.append(ConstraintCheck(constraint="flash", required_bytes=carray,
                                          budget_bytes=profile.flash_bytes))
        elif profile.ram_bytes is not None:
            checks.append(ConstraintCheck(constraint="ram", required_bytes=model_bytes,
                                          budget_bytes=profile.ram_bytes))
    else:
        if profile.flash_bytes is not None:
            checks.append(ConstraintCheck(constraint="flash",
                                          required_bytes=model_bytes + profile.program_reserve_bytes,
                                          budget_bytes=profile.flash_bytes))
        if profile.ram_bytes is not None:
            checks.append(ConstraintCheck(constraint="ram", required_bytes=model_bytes + report.arena_bytes,
                                          budget_bytes=profile.ram_bytes))

    failed = [c for c in checks if not c.ok]
    if failed:
        binding = failed[0]
    elif checks:
        binding = min(checks, key=lambda c: c.margin_bytes)
    else:
        binding = None
    decision = DeployDecision(
        accepted=not failed,
        compiler_id=profile.compiler_id,
        policy=policy,
        binding_constraint=binding.constraint if failed else None,
        margin_bytes=binding.margin_bytes if binding else None,
        checks=checks,
    )
    if failed:
        logger.warning(f"[部署] {profile.compiler_id}: {binding.constraint} 预算不足 "
                       f"(需要 {binding.required_bytes} B, 预算 {binding.budget_bytes} B)")
    return decision
