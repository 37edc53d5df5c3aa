import pytest

from mdmlc.core.errors import ExitStatus, ParseFailure
from mdmlc.model import expr as ex
from mdmlc.model.ir import LabelsMode, ModelKind, SourceModel, TypeRef
from mdmlc.parser import ParseError, TokenKind, parse, parse_events, parse_expression, pretty_print, tokenize

from .conftest import HYDRAULIC, TUTORIAL
from .model_factory import random_model

SENSOR = """
thing Sensor @doc "temperature probe" {
    property temperature : Float = 0.0;
    property window : Int[8];
    message reading(value : Float);
    provided port out {
        sends reading;
    }
    statechart Behaviour init Idle {
        state Idle;
        state Active {
            on entry {
                emit out!reading(temperature * 2);
            }
        }
        transition Idle -> Active event out?reading guard value > 10.5 and not false;
    }
    data_analytics Anomaly {
        labels ON;
        features window;
        prediction_results temperature;
        model_algorithm mlp(hidden_layer_sizes 16, activation relu);
        dataset "data/sensor.csv";
    }
}
"""


def _first_error(text):
    with pytest.raises(ParseFailure) as info:
        parse(text, "m.mdml")
    return info.value.errors[0]


def test_tokenize_skips_comments_and_reads_barewords():
    tokens = tokenize("// line\n/* block */ @compiler rpi_3b+_python; x")
    kinds = [(t.kind, t.lexeme) for t in tokens]
    assert kinds == [
        (TokenKind.ANNOTATION, "@compiler"),
        (TokenKind.IDENTIFIER, "rpi_3b+_python"),
        (TokenKind.PUNCT, ";"),
        (TokenKind.IDENTIFIER, "x"),
    ]
    assert (tokens[0].line, tokens[0].column) == (2, 13)


def test_parse_thing_members():
    model = parse(SENSOR)
    sensor = model.thing("Sensor")
    assert model.kind is ModelKind.PIM
    assert sensor.property("window").type == TypeRef("Int", 8)
    assert sensor.property("temperature").initial == ex.Literal(0.0)
    assert sensor.port("out").sends == ("reading",)
    assert [s.name for s in sensor.statechart.states] == ["Idle", "Active"]
    guard = sensor.statechart.transitions[0].guard
    assert guard == ex.Binary("and", ex.Binary(">", ex.Name("value"), ex.Literal(10.5)),
                              ex.Unary("not", ex.Literal(False)))
    da = sensor.analytics
    assert da.labels is LabelsMode.ON
    assert da.model_algorithm.get("hidden_layer_sizes") == 16
    assert da.dataset == "data/sensor.csv"
    assert sensor.annotations[0].value == "temperature probe"


def test_configuration_makes_psm():
    model = parse("configuration Deploy { instance s : Sensor; connector s.out => s.out; "
                  "@compiler rpi_3b+_python; }")
    config = model.configuration("Deploy")
    assert model.kind is ModelKind.PSM
    assert config.annotation_values("compiler") == ("rpi_3b+_python",)
    assert str(config.connectors[0].source) == "s.out"


def test_empty_text_is_the_empty_model():
    assert parse("") == SourceModel()
    assert parse("  // nothing\n").is_empty
    assert pretty_print(SourceModel()) == ""


def test_empty_source_file_is_rejected_when_required():
    with pytest.raises(ParseFailure) as info:
        parse("", "empty.mdml", allow_empty=False)
    error = info.value.errors[0]
    assert (error.location.line, error.location.column) == (1, 1)
    assert info.value.exit_status is ExitStatus.PARSE_ERROR


def test_error_reports_location_and_expected_set():
    error = _first_error("thing T {\n    property x Int;\n}\n")
    assert (error.location.line, error.location.column) == (2, 16)
    assert "':'" in error.expected
    assert error.found.lexeme == "Int"
    assert str(error).startswith("m.mdml:2:16:")


def test_unterminated_string_points_at_its_start():
    error = _first_error('thing T { property s : String = "abc\n}')
    assert "unterminated" in error.message
    assert error.location.line == 1


def test_several_errors_are_collected():
    with pytest.raises(ParseFailure) as info:
        parse("thing A { property : Int; }\nthing B { message m(; }\n")
    assert len(info.value.errors) >= 2
    assert info.value.errors[0].location.line == 1


def test_duplicate_statechart_is_a_parse_error():
    error = _first_error("thing T { statechart A init S { state S; } statechart B init S { state S; } }")
    assert "more than one statechart" in error.message


def test_parse_error_to_dict():
    error = _first_error("thing {")
    d = error.to_dict()
    assert d["line"] == 1 and d["column"] == 7
    assert d["file"] == "m.mdml"
    assert "identifier" in " ".join(d["expected"])


@pytest.mark.parametrize("text, expected", [
    ("1 + 2 * 3", ex.Binary("+", ex.Literal(1), ex.Binary("*", ex.Literal(2), ex.Literal(3)))),
    ("(1 + 2) * 3", ex.Binary("*", ex.Binary("+", ex.Literal(1), ex.Literal(2)), ex.Literal(3))),
    ("a - b - c", ex.Binary("-", ex.Binary("-", ex.Name("a"), ex.Name("b")), ex.Name("c"))),
    ("-3", ex.Literal(-3)),
    ("-x", ex.Unary("-", ex.Name("x"))),
    ("a or b and c", ex.Binary("or", ex.Name("a"), ex.Binary("and", ex.Name("b"), ex.Name("c")))),
    ("x <= 2 == true", ex.Binary("==", ex.Binary("<=", ex.Name("x"), ex.Literal(2)), ex.Literal(True))),
])
def test_expression_precedence(text, expected):
    assert parse_expression(text) == expected


def test_parse_events():
    events = parse_events("sensor?reading(18, -2.5), timer?tick; probe?name(\"a\")")
    assert [str(e) for e in events] == ["sensor?reading(18, -2.5)", "timer?tick", "probe?name('a')"]
    assert parse_events("") == []


def test_pretty_print_is_canonical():
    model = parse(SENSOR)
    text = pretty_print(model)
    assert text.endswith("}\n")
    assert pretty_print(parse(text)) == text
    assert "model_algorithm mlp(hidden_layer_sizes 16, activation relu);" in text


@pytest.mark.parametrize("path", sorted(HYDRAULIC.glob("*.mdml")) + sorted(TUTORIAL.glob("*.mdml")),
                         ids=lambda p: p.name)
def test_sample_models_round_trip(path):
    model = parse(path.read_text(encoding="utf-8"), str(path))
    assert parse(pretty_print(model)) == model


@pytest.mark.parametrize("seed", range(60))
def test_random_models_round_trip(seed):
    model = random_model(seed)
    text = pretty_print(model)
    assert parse(text) == model, text


def test_round_trip_keeps_escapes_and_negative_numbers():
    model = parse('thing T { property s : String = "a\\"b\\n"; property n : Int = -(-3); '
                  'property f : Double = 1e-05 @unit "m/s"; }')
    again = parse(pretty_print(model))
    assert again == model
    assert again.thing("T").property("s").initial == ex.Literal('a"b\n')
    assert again.thing("T").property("n").initial == ex.Unary("-", ex.Literal(-3))


def test_parse_error_is_not_raised_for_optional_semicolons():
    model = parse("thing T { property a : Int property b : Bool message m() }")
    assert [p.name for p in model.thing("T").properties] == ["a", "b"]


def test_parse_error_class_is_reexported():
    assert issubclass(ParseError, Exception)


@pytest.mark.parametrize("text, column", [
    ("thing T { property x : Int = 2²; }", 31),
    ("thing T { property x¹ : Int; }", 21),
    ("thing ١ { }", 7),
])
def test_non_ascii_digits_and_letters_are_rejected(text, column):
    error = _first_error(text)
    assert "unexpected character" in error.message
    assert (error.location.line, error.location.column) == (1, column)
