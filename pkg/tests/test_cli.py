import json
import logging
import logging.handlers

import pytest

from mdmlc.convert.mlq import load
from mdmlc.convert.quantize import QuantizedMlpModel
from mdmlc.main import main
from mdmlc.ml.data import write_csv

from .conftest import HYDRAULIC, TUTORIAL

THERMOSTAT = str(TUTORIAL / "thermostat.mdml")

PROBE = """
thing Probe {
    property x : Float[4];
    property leak : Int;
    data_analytics Leak {
        labels ON;
        dataset "data/probe.csv";
        features x;
        prediction_results leak;
        training_results "Training_results";
        model_algorithm mlp(hidden_layer_sizes 6, learning_rate 0.01, batch_size 20, epochs 60, patience 10);
    }
}
"""


@pytest.fixture(autouse=True)
def reset_logging():
    """main() 会替换根 logger 的 handler；测试结束后关闭它们"""
    yield
    root = logging.getLogger()
    for handler in list(root.handlers):
        if type(handler) in (logging.StreamHandler, logging.handlers.TimedRotatingFileHandler):
            root.removeHandler(handler)
            handler.close()


@pytest.fixture
def probe(tmp_path, separable_dataset):
    """一个 4 维特征的小模型和它的数据集"""
    write_csv(separable_dataset, tmp_path / "data" / "probe.csv")
    (tmp_path / "probe.mdml").write_text(PROBE, encoding="utf-8")
    return tmp_path / "probe.mdml"


def test_check_ok(capsys):
    assert main(["check", str(HYDRAULIC / "rpi.mdml")]) == 0
    assert main(["check", "--json", str(HYDRAULIC / "rpi.mdml")]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["ok"] is True
    assert payload["kind"] == "PSM"


def test_check_parse_error(tmp_path, capsys):
    (tmp_path / "bad.mdml").write_text("thing T {\n    property a Int;\n}\n", encoding="utf-8")
    assert main(["check", "bad.mdml"]) == 1
    assert "bad.mdml:2:" in capsys.readouterr().err


def test_check_semantic_error(tmp_path, capsys):
    (tmp_path / "bad.mdml").write_text("thing T { property a : Bogus; }\n", encoding="utf-8")
    assert main(["check", "bad.mdml"]) == 2
    assert "error" in capsys.readouterr().err


def test_missing_file_is_an_io_error(capsys):
    assert main(["check", "nope.mdml"]) == 4


def test_invalid_utf8_source_is_an_io_error(tmp_path, capsys):
    (tmp_path / "bad.mdml").write_bytes(b"thing T {}\n\xff\xfe")
    assert main(["check", "bad.mdml"]) == 4
    err = capsys.readouterr().err
    assert "not valid UTF-8" in err
    assert "offset 11" in err
    assert "Traceback" not in err


def test_json_error_payload(tmp_path, capsys):
    (tmp_path / "bad.mdml").write_text("thing T {\n", encoding="utf-8")
    assert main(["check", "--json", "bad.mdml"]) == 1
    payload = json.loads(capsys.readouterr().out)
    assert payload["ok"] is False
    assert payload["exit_status"] == 1
    assert payload["diagnostics"][0]["line"] >= 1


def test_estimate_rejects_wide_network_on_arduino(capsys):
    code = main(["estimate", "--arch", "6120,32,2", "--platform", "arduino_nano_33_ble_sense_cpp"])
    assert code == 3
    out = capsys.readouterr().out
    assert "parameters          195938" in out
    assert "rejected under source policy" in out


def test_estimate_json(capsys):
    code = main(["estimate", "--arch", "6120,32,2", "--platform", "arduino_nano_33_ble_sense_cpp",
                 "--policy", "strict", "--json"])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["report"]["carray_source_bytes"] == 1_209_245
    assert payload["decision"]["accepted"] is True


def test_estimate_without_platform(capsys):
    assert main(["estimate", "--arch", "6120,8,2", "--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["decision"] is None
    assert payload["report"]["quantized_serialized_bytes"] == 49_058


@pytest.mark.parametrize("argv", [
    ["estimate", "--arch", "6120"],
    ["estimate", "--arch", "6120,32,2", "--platform", "nope"],
    ["estimate", "--arch", "6120,32,2", "--symbol", "1bad"],
])
def test_estimate_bad_arguments(argv, capsys):
    assert main(argv) == 2


def test_simulate(capsys):
    events = "sensor?reading(18), sensor?reading(19), sensor?reading(23)"
    assert main(["simulate", THERMOSTAT, "--thing", "Thermostat", "--events", events]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "Idle -> Heating -> Idle"
    assert lines[2].endswith("dropped")
    assert "emit heater!heat_on()" in lines
    assert "emit heater!heat_off()" in lines


def test_simulate_unknown_thing(capsys):
    assert main(["simulate", THERMOSTAT, "--thing", "Nope"]) == 2


def test_synth_data(tmp_path):
    assert main(["synth-data", "-n", "12", "--seed", "3", "-o", "d.csv"]) == 0
    lines = (tmp_path / "d.csv").read_text(encoding="utf-8").splitlines()
    assert len(lines) == 13
    assert lines[0] == ",".join(f"f{i}" for i in range(6120)) + ",label"
    assert main(["synth-data", "-n", "12", "--negative-share", "2", "-o", "e.csv"]) == 2


def test_train_predict_convert_dump(tmp_path, probe, capsys):
    assert main(["train", "probe.mdml", "-o", "out/probe.mlq", "--json"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["architecture"] == [4, 6, 2]
    assert (report["train_rows"], report["test_rows"]) == (320, 80)
    assert report["metrics"]["accuracy"] >= 0.9
    out = tmp_path / "out"
    assert (out / "probe.scaler.json").exists()
    assert json.loads((out / "probe.metrics.json").read_text(encoding="utf-8"))["test_rows"] == 80
    assert (out / "Training_results").read_text(encoding="utf-8").startswith("epoch,loss,accuracy")

    assert main(["predict", "out/probe.mlq", "--data", "data/probe.csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "row,class,label"
    assert len(lines) == 402
    assert lines[-1].startswith("# accuracy=")

    assert main(["convert", "out/probe.mlq", "--quantize", "-o", "out/probe_q.mlq"]) == 0
    assert isinstance(load((out / "probe_q.mlq").read_bytes()), QuantizedMlpModel)
    assert main(["convert", "out/probe_q.mlq", "--quantize", "-o", "out/again.mlq"]) == 4

    capsys.readouterr()
    assert main(["dump", "out/probe_q.mlq"]) == 0
    text = capsys.readouterr().out
    assert text.startswith("unsigned char model_data[] = {")
    assert main(["dump", "out/probe_q.mlq", "--symbol", "1bad"]) == 2


def test_train_with_overrides(probe, capsys):
    assert main(["train", "probe.mdml", "-o", "m.mlq", "--epochs", "2", "--seed", "5"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("accuracy  ")
    assert "recall    " in out


def test_targets(capsys):
    assert main(["targets"]) == 0
    out = capsys.readouterr().out
    assert "arduino_nano_33_ble_sense_cpp" in out
    assert main(["targets", "--json"]) == 0
    ids = [t["compiler_id"] for t in json.loads(capsys.readouterr().out)]
    assert "python_java" in ids and "rpi_3b+_python" in ids


def test_generate(tmp_path, capsys):
    assert main(["generate", THERMOSTAT, "-o", "gen"]) == 0
    root = tmp_path / "gen" / "Home" / "rpi_3b+_python"
    assert (root / "src" / "things.py").exists()
    assert (root / "MANIFEST").exists()
    assert "Home/rpi_3b+_python/src/app.py" in capsys.readouterr().out


def test_generate_rejected(tmp_path, capsys):
    assert main(["generate", str(HYDRAULIC / "arduino.mdml"), "-o", "gen", "--json"]) == 3
    payload = json.loads(capsys.readouterr().out)
    assert payload["exit_status"] == 3
    assert payload["decision"]["binding_constraint"] == "flash"
    assert not (tmp_path / "gen").exists()


def test_bad_configuration_file(tmp_path, capsys):
    (tmp_path / "mdml.yaml").write_text("- a\n- b\n", encoding="utf-8")
    assert main(["targets"]) == 4
    assert "cannot load configuration" in capsys.readouterr().err


def test_log_directory(tmp_path, monkeypatch):
    monkeypatch.setenv("MDML_LOG_DIR", str(tmp_path / "logs"))
    assert main(["targets"]) == 0
    assert (tmp_path / "logs" / "mdmlc.log").exists()


def test_usage_errors_exit_two():
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(["generate", THERMOSTAT])
    assert info.value.code == 2
