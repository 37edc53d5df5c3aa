import pytest

from mdmlc.core.errors import (
    BadMagicError,
    CArrayFormatError,
    ModelFormatError,
    TruncatedModelError,
    UnsupportedVersionError,
)
from mdmlc.convert.carray import carray_size, check_symbol, emit_carray, parse_carray
from mdmlc.convert.mlq import describe, load, save, serialized_size
from mdmlc.convert.quantize import QuantizedMlpModel, quantize
from mdmlc.ml.mlp import MlpArchitecture, MlpModel, initial_model

ARCH = MlpArchitecture.build((5, 3, 2), hidden="relu", output="sigmoid")


@pytest.fixture
def model():
    return initial_model(ARCH, 1)


def test_float_model_file(model):
    data = save(model)
    assert data[:4] == b"MLQ1"
    assert len(data) == serialized_size(ARCH)
    assert load(data) == model
    assert describe(model)["dtype"] == "float32"


def test_quantized_model_file(model):
    qmodel = quantize(model)
    data = save(qmodel)
    assert data[5] == 1
    assert len(data) == serialized_size(ARCH, quantized=True)
    loaded = load(data)
    assert isinstance(loaded, QuantizedMlpModel)
    assert loaded == qmodel
    assert describe(loaded)["serialized_bytes"] == len(data)


def test_save_is_deterministic(model):
    assert save(model) == save(initial_model(ARCH, 1))


@pytest.mark.parametrize("dims, quantized, size", [
    ((6120, 8, 2), False, 195_970),
    ((6120, 8, 2), True, 49_058),
])
def test_real_sizes(dims, quantized, size):
    m = initial_model(MlpArchitecture.build(dims), 0)
    data = save(quantize(m) if quantized else m)
    assert len(data) == size == serialized_size(m.architecture, quantized)


def test_bad_magic(model):
    with pytest.raises(BadMagicError):
        load(b"GIF8" + save(model)[4:])
    with pytest.raises(BadMagicError):
        load(b"x")


def test_unsupported_version(model):
    data = bytearray(save(model))
    data[4] = 2
    with pytest.raises(UnsupportedVersionError):
        load(bytes(data))


@pytest.mark.parametrize("cut", [0, 3, 8, 12, 40])
def test_truncated(model, cut):
    with pytest.raises(TruncatedModelError):
        load(save(model)[:cut])


def test_truncated_by_one_byte(model):
    data = save(model)
    with pytest.raises(TruncatedModelError):
        load(data[:-1])


def test_trailing_bytes(model):
    with pytest.raises(ModelFormatError):
        load(save(model) + b"\x00")


def test_format_errors_are_io_errors():
    assert issubclass(BadMagicError, ModelFormatError)
    assert issubclass(TruncatedModelError, ModelFormatError)


def test_emit_carray_layout():
    text = emit_carray(bytes(range(14)), "blob")
    assert text.splitlines() == [
        "unsigned char blob[] = {",
        "  0x00, 0x01, 0x02, 0x03, 0x04, 0x05, 0x06, 0x07, 0x08, 0x09, 0x0a, 0x0b,",
        "  0x0c, 0x0d",
        "};",
        "unsigned int blob_len = 14;",
    ]
    assert parse_carray(text) == bytes(range(14))


@pytest.mark.parametrize("n", [0, 1, 11, 12, 13, 24, 100, 1000])
@pytest.mark.parametrize("symbol", ["m", "model_data"])
def test_carray_size_matches_emitted_text(n, symbol):
    assert len(emit_carray(bytes(n), symbol).encode("ascii")) == carray_size(n, symbol)


def test_carray_size_reference_values():
    assert carray_size(51_000) == 314_570
    assert carray_size(198_000) == 1_221_071
    assert carray_size(196_082) == 1_209_245
    assert carray_size(49_058) == 302_596


def test_carray_of_model_file_round_trips(model):
    data = save(quantize(model))
    assert load(parse_carray(emit_carray(data))) == quantize(model)


@pytest.mark.parametrize("text, fragment", [
    ("", "empty C array source"),
    ("int x;\n", "expected 'unsigned char"),
    ("unsigned char m[] = {\n  0x01, 0xZZ\n};\nunsigned int m_len = 2;\n", "2:9: malformed hex literal '0xZZ'"),
    ("unsigned char m[] = {\n  0x01\n", "missing closing"),
    ("unsigned char m[] = {\n  0x01\n};\n", "missing 'm_len'"),
    ("unsigned char m[] = {\n  0x01\n};\nunsigned int other_len = 1;\n", "expected 'unsigned int m_len"),
    ("unsigned char m[] = {\n  0x01\n};\nunsigned int m_len = 2;\n", "declares 2 bytes but the array holds 1"),
])
def test_parse_carray_errors(text, fragment):
    with pytest.raises(CArrayFormatError) as info:
        parse_carray(text)
    assert fragment in str(info.value)


def test_parse_carray_accepts_const():
    text = "const unsigned char m[] = {\n  0xFF\n};\nconst unsigned int m_len = 1;\n"
    assert parse_carray(text) == b"\xff"


@pytest.mark.parametrize("symbol", ["1abc", "model-data", "", "a b"])
def test_bad_symbols(symbol):
    with pytest.raises(ValueError):
        check_symbol(symbol)
    with pytest.raises(ValueError):
        emit_carray(b"\x00", symbol)


def test_zero_model_file():
    data = save(MlpModel.zeros(ARCH))
    assert load(data) == MlpModel.zeros(ARCH)
