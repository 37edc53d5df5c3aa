import pytest

from mdmlc.convert.carray import carray_size
from mdmlc.core.config import Config
from mdmlc.core.errors import MdmlIOError
from mdmlc.ml.mlp import MlpArchitecture
from mdmlc.services.platforms import (
    DeployPolicy,
    PlatformProfile,
    check_deployability,
    default_registry,
    estimate_sizes,
    format_bytes,
    parse_size,
)

ARDUINO = "arduino_nano_33_ble_sense_cpp"
WIDE = MlpArchitecture.build((6120, 32, 2))
COMPACT = MlpArchitecture.build((6120, 8, 2))


def test_builtin_targets(registry):
    assert registry.ids == sorted(["python_java", "rpi_3b+_python", "rpi_3b+_python_quantized", ARDUINO])
    arduino = registry.lookup(ARDUINO)
    assert arduino.ram_bytes == 256 * 1024
    assert arduino.flash_bytes == 1024 * 1024
    assert arduino.quantized
    assert registry.lookup("esp32") is None


def test_wide_network_sizes():
    report = estimate_sizes(WIDE)
    assert report.param_count == 195_938
    assert report.float_serialized_bytes == 783_778
    assert report.quantized_serialized_bytes == 196_082
    assert report.carray_source_bytes == 1_209_245
    assert report.arena_bytes == 24_608
    assert report.float_carray_source_bytes == carray_size(783_778)


def test_compact_network_sizes():
    report = estimate_sizes(COMPACT)
    assert report.float_serialized_bytes == 195_970
    assert report.quantized_serialized_bytes == 49_058
    assert report.carray_source_bytes == 302_596
    assert report.arena_bytes == 24_512


def test_wide_network_rejected_on_arduino(registry):
    decision = check_deployability(estimate_sizes(WIDE), registry.lookup(ARDUINO), DeployPolicy.SOURCE)
    assert not decision.accepted
    assert decision.binding_constraint == "flash"
    assert decision.margin_bytes == -160_669
    assert "rejected under source policy" in decision.summary()


def test_wide_network_fits_under_strict_policy(registry):
    decision = check_deployability(estimate_sizes(WIDE), registry.lookup(ARDUINO), "strict")
    assert decision.accepted
    flash, ram = decision.checks
    assert (flash.constraint, flash.required_bytes) == ("flash", 327_154)
    assert (ram.constraint, ram.required_bytes) == ("ram", 220_690)
    assert decision.margin_bytes == min(flash.margin_bytes, ram.margin_bytes)
    assert decision.binding_constraint is None


def test_compact_network_accepted_on_arduino(registry):
    decision = check_deployability(estimate_sizes(COMPACT), registry.lookup(ARDUINO))
    assert decision.accepted
    assert decision.margin_bytes == 1_048_576 - 302_596


def test_ram_only_target_compares_model_file(registry):
    report = estimate_sizes(WIDE)
    float_decision = check_deployability(report, registry.lookup("rpi_3b+_python"))
    assert float_decision.checks[0].required_bytes == 783_778
    quant_decision = check_deployability(report, registry.lookup("rpi_3b+_python_quantized"))
    assert quant_decision.checks[0].required_bytes == 196_082
    assert float_decision.accepted and quant_decision.accepted


def test_unconstrained_target_always_accepts(registry):
    decision = check_deployability(estimate_sizes(WIDE), registry.lookup("python_java"), "strict")
    assert decision.accepted
    assert decision.checks == []
    assert decision.margin_bytes is None
    assert "unconstrained" in decision.summary()


def test_rejection_is_monotone_in_hidden_width(registry):
    arduino = registry.lookup(ARDUINO)
    verdicts = [check_deployability(estimate_sizes(MlpArchitecture.build((6120, h, 2))), arduino).accepted
                for h in (4, 8, 16, 24, 32, 64)]
    assert verdicts == sorted(verdicts, reverse=True)
    assert verdicts[1] and not verdicts[4]


def test_bad_symbol_is_rejected():
    with pytest.raises(ValueError):
        estimate_sizes(COMPACT, "1bad")


@pytest.mark.parametrize("text, expected", [
    ("1MiB", 1_048_576), ("1MB", 1_000_000), ("256KiB", 262_144), ("64 kb", 64_000), (512, 512), ("1.5KiB", 1536),
])
def test_parse_size(text, expected):
    assert parse_size(text) == expected


@pytest.mark.parametrize("text", ["", "12 parsecs", "-1KiB", True])
def test_parse_size_rejects(text):
    with pytest.raises(ValueError):
        parse_size(text)


def test_format_bytes():
    assert format_bytes(256 * 1024) == "256 KiB"
    assert format_bytes(1 << 30) == "1 GiB"
    assert format_bytes(1000) == "1000 B"


def test_platform_file_extends_registry(tmp_path, config):
    path = tmp_path / "boards.yaml"
    path.write_text(
        "platforms:\n"
        "  - compiler_id: esp32_cpp\n"
        "    name: ESP32\n"
        "    ram: 520KiB\n"
        "    flash: 4MiB\n"
        "    clock: 240MHz\n"
        "    quantized: true\n"
        "  - compiler_id: jetson_python\n"
        "    ram: 4GiB\n",
        encoding="utf-8",
    )
    registry = default_registry(config, path)
    esp32 = registry.lookup("esp32_cpp")
    assert esp32.flash_bytes == 4 * 1024 * 1024
    assert esp32.cpu_clock_hz == 240_000_000
    assert esp32.generator == "arduino_cpp"
    assert registry.lookup("jetson_python").generator == "rpi_python"
    assert "python_java" in registry


def test_platform_file_from_environment(tmp_path, monkeypatch):
    path = tmp_path / "boards.yaml"
    path.write_text("- compiler_id: tiny\n  flash: 64KiB\n", encoding="utf-8")
    monkeypatch.setenv("MDML_PLATFORMS", str(path))
    assert "tiny" in default_registry(Config())


@pytest.mark.parametrize("text", [
    "- compiler_id: python_java\n",
    "- name: nameless\n",
    "- compiler_id: x\n  ram: lots\n",
    "- compiler_id: x\n  generator: cobol\n",
    "platforms: [",
    "just a string\n",
])
def test_bad_platform_files(tmp_path, config, text):
    path = tmp_path / "boards.yaml"
    path.write_text(text, encoding="utf-8")
    with pytest.raises(MdmlIOError):
        default_registry(config, path)


def test_program_reserve_comes_from_config(config):
    config.set("deploy.program_reserve", "256KiB")
    arduino = default_registry(config).lookup(ARDUINO)
    assert arduino.program_reserve_bytes == 256 * 1024
    decision = check_deployability(estimate_sizes(WIDE), arduino, DeployPolicy.STRICT)
    assert decision.checks[0].required_bytes == 196_082 + 262_144


def test_profile_rejects_unknown_generator():
    with pytest.raises(ValueError):
        PlatformProfile(compiler_id="x", generator="cobol")


@pytest.mark.parametrize("dims", [(1, 1), (4, 2, 1), (4, 20, 1), (6120, 8, 2), (6120, 32, 2), (6120, 32, 16, 2)])
def test_size_report_ratios(dims):
    report = estimate_sizes(MlpArchitecture.build(dims))
    assert 6.0 <= report.expansion_ratio <= 6.2
    assert report.expansion_ratio == estimate_sizes(WIDE).expansion_ratio


def test_float_payload_is_about_four_times_quantized():
    report = estimate_sizes(WIDE)
    assert report.quantized_serialized_bytes < report.float_serialized_bytes
    assert report.carray_source_bytes < report.float_carray_source_bytes
    assert report.float_serialized_bytes / report.quantized_serialized_bytes == pytest.approx(4.0, rel=0.01)


@pytest.mark.parametrize("before, after", [
    ((4, 2, 1), (4, 20, 1)),
    ((4, 2, 1), (5, 2, 1)),
    ((4, 2, 1), (4, 2, 3)),
    ((6120, 8, 2), (6120, 32, 2)),
    ((1, 1), (1, 2)),
])
def test_widening_never_shrinks_a_size_field(before, after):
    small = estimate_sizes(MlpArchitecture.build(before)).model_dump()
    large = estimate_sizes(MlpArchitecture.build(after)).model_dump()
    for name, value in small.items():
        if isinstance(value, (int, float)):
            assert large[name] >= value, name


def test_unquantized_flash_target_checks_float_carray():
    board = PlatformProfile(compiler_id="big_cpp", flash_bytes=4 * 1024 * 1024, quantized=False,
                            generator="arduino_cpp")
    report = estimate_sizes(WIDE)
    decision = check_deployability(report, board, DeployPolicy.SOURCE)
    assert decision.checks[0].required_bytes == report.float_carray_source_bytes
    assert not decision.accepted
    quantized = check_deployability(report, board.model_copy(update={"quantized": True}), DeployPolicy.SOURCE)
    assert quantized.accepted
