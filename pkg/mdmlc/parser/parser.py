"""递归下降语法分析：Token -> SourceModel

出错时在语句边界同步，尽可能一次收集多个错误。
"""
import logging
from typing import Iterable, List, Optional, Tuple

from ..core.errors import ParseFailure
from ..model import expr as ex
from ..model.diagnostics import SourceLocation
from ..model.ir import (
    Annotation,
    AnnotationOverlay,
    Configuration,
    Connector,
    DataAnalyticsSpec,
    EmitAction,
    Endpoint,
    Hyperparameter,
    Import,
    Instance,
    LabelsMode,
    Message,
    ModelAlgorithm,
    Parameter,
    Port,
    Property,
    SetAction,
    SourceModel,
    State,
    Statechart,
    Thing,
    Toggle,
    Transition,
    Trigger,
    TypeRef,
)
from ..model.statechart import Event
from .lexer import ParseError, Token, TokenKind, end_location, tokenize

logger = logging.getLogger(__name__)

TOP_LEVEL_STARTS = frozenset({"import", "thing", "configuration", "annotate"})
THING_MEMBER_STARTS = frozenset({"property", "message", "provided", "required", "statechart", "data_analytics"})
STATECHART_MEMBER_STARTS = frozenset({"state", "transition"})
CONFIG_MEMBER_STARTS = frozenset({"instance", "connector"})
ANALYTICS_KEYWORDS = ("labels", "features", "prediction_results", "sequential", "timestamps",
                      "model_algorithm", "training_results", "dataset")

_BINARY_OPS = {"or", "and", "==", "!=", "<", "<=", ">", ">=", "+", "-", "*", "/"}


class Parser:
    def __init__(self, tokens: List[Token], text: str, path: Optional[str] = None):
        line, column = end_location(text)
        self.tokens = tokens + [Token(TokenKind.EOF, "", line, column, len(text))]
        self.path = path
        self.pos = 0
        self.errors: List[ParseError] = []

    # ---- token 游标 ----

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def _loc(self, token: Optional[Token] = None) -> SourceLocation:
        token = token or self.tok
        return SourceLocation(token.line, token.column, self.path)

    def _advance(self) -> Token:
        token = self.tok
        if token.kind is not TokenKind.EOF:
            self.pos += 1
        return token

    def _is(self, lexeme: str, kind: Optional[TokenKind] = None) -> bool:
        token = self.tok
        if kind is not None and token.kind is not kind:
            return False
        return token.lexeme == lexeme and token.kind in (TokenKind.KEYWORD, TokenKind.PUNCT)

    def _accept(self, lexeme: str) -> bool:
        if self._is(lexeme):
            self._advance()
            return True
        return False

    def _fail(self, expected: Iterable[str], what: Optional[str] = None) -> ParseError:
        expected = frozenset(expected)
        found = self.tok
        shown = ", ".join(sorted(expected))
        message = what or f"expected {shown}, found {found.describe()}"
        return ParseError(message, self._loc(found), expected, found)

    def _expect(self, lexeme: str) -> Token:
        if not self._is(lexeme):
            raise self._fail({f"'{lexeme}'"})
        return self._advance()

    def _expect_kind(self, kind: TokenKind, what: Optional[str] = None) -> Token:
        if self.tok.kind is not kind:
            raise self._fail({what or kind.value})
        return self._advance()

    def _name(self) -> Token:
        return self._expect_kind(TokenKind.IDENTIFIER, "identifier")

    # ---- 错误恢复 ----

    def _synchronize(self, starts: frozenset, start_pos: int) -> None:
        """跳到下一个语句边界：同层的 ';'（消费）、语句关键字或 '}'（不消费）"""
        depth = 0
        while self.tok.kind is not TokenKind.EOF:
            token = self.tok
            if depth == 0:
                if token.kind is TokenKind.PUNCT and token.lexeme == ";":
                    self._advance()
                    return
                if token.kind is TokenKind.PUNCT and token.lexeme == "}":
                    break
                if self.pos > start_pos and (
                        (token.kind is TokenKind.KEYWORD and token.lexeme in starts)
                        or token.kind is TokenKind.ANNOTATION):
                    return
            if token.kind is TokenKind.PUNCT and token.lexeme == "{":
                depth += 1
            elif token.kind is TokenKind.PUNCT and token.lexeme == "}":
                depth -= 1
            self._advance()
        if self.pos == start_pos and self.tok.kind is not TokenKind.EOF and not self._is("}"):
            self._advance()

    def _block(self, starts: frozenset, member) -> None:
        """解析 `{ member* }` 的主体部分（左括号已被消费）"""
        while not self._is("}") and self.tok.kind is not TokenKind.EOF:
            start = self.pos
            try:
                member()
            except ParseError as e:
                self.errors.append(e)
                self._synchronize(starts, start)
        self._expect("}")

    # ---- 注解 ----

    def _annotation(self) -> Annotation:
        key_token = self._expect_kind(TokenKind.ANNOTATION)
        if self.tok.kind in (TokenKind.STRING, TokenKind.IDENTIFIER):
            value = self._advance().value
        else:
            raise self._fail({"string", "bareword"}, f"annotation @{key_token.value} needs a value")
        return Annotation(key_token.value, value, self._loc(key_token))

    def _annotations(self) -> Tuple[Annotation, ...]:
        out = []
        while self.tok.kind is TokenKind.ANNOTATION:
            out.append(self._annotation())
        return tuple(out)

    # ---- 表达式 ----

    def expression(self, min_prec: int = 1) -> ex.Expr:
        left = self._unary()
        while True:
            token = self.tok
            op = token.lexeme
            if token.kind not in (TokenKind.KEYWORD, TokenKind.PUNCT) or op not in _BINARY_OPS:
                return left
            prec = ex.PRECEDENCE[op]
            if prec < min_prec:
                return left
            self._advance()
            right = self.expression(prec + 1)
            left = ex.Binary(op, left, right)

    def _unary(self) -> ex.Expr:
        if self._accept("not"):
            return ex.Unary("not", self._unary())
        if self._accept("-"):
            if self.tok.kind in (TokenKind.INTEGER, TokenKind.FLOAT):
                return ex.Literal(-self._advance().value)
            return ex.Unary("-", self._unary())
        return self._primary()

    def _primary(self) -> ex.Expr:
        token = self.tok
        if token.kind in (TokenKind.INTEGER, TokenKind.FLOAT, TokenKind.STRING):
            return ex.Literal(self._advance().value)
        if self._accept("true"):
            return ex.Literal(True)
        if self._accept("false"):
            return ex.Literal(False)
        if token.kind is TokenKind.IDENTIFIER:
            return ex.Name(self._advance().lexeme)
        if self._accept("("):
            inner = self.expression()
            self._expect(")")
            return inner
        raise self._fail({"expression"})

    # ---- 类型 ----

    def _type(self) -> TypeRef:
        name = self._name().lexeme
        size = None
        if self._accept("["):
            size = self._expect_kind(TokenKind.INTEGER, "array size").value
            self._expect("]")
        return TypeRef(name, size)

    # ---- thing ----

    def _property(self) -> Property:
        start = self._expect("property")
        name = self._name().lexeme
        self._expect(":")
        type_ref = self._type()
        initial = self.expression() if self._accept("=") else None
        annotations = self._annotations()
        self._accept(";")
        return Property(name, type_ref, initial, annotations, self._loc(start))

    def _message(self) -> Message:
        start = self._expect("message")
        name = self._name().lexeme
        self._expect("(")
        params = []
        if not self._is(")"):
            while True:
                p_tok = self._name()
                self._expect(":")
                params.append(Parameter(p_tok.lexeme, self._type(), self._loc(p_tok)))
                if not self._accept(","):
                    break
        self._expect(")")
        annotations = self._annotations()
        self._accept(";")
        return Message(name, tuple(params), annotations, self._loc(start))

    def _port(self) -> Port:
        start = self.tok
        if not (self._accept("provided") or self._accept("required")):
            raise self._fail({"'provided'", "'required'"})
        provided = start.lexeme == "provided"
        self._expect("port")
        name = self._name().lexeme
        annotations = self._annotations()
        sends: List[str] = []
        receives: List[str] = []
        self._expect("{")
        while not self._is("}"):
            if self._accept("sends"):
                target = sends
            elif self._accept("receives"):
                target = receives
            else:
                raise self._fail({"'sends'", "'receives'", "'}'"})
            target.append(self._name().lexeme)
            while self._accept(","):
                target.append(self._name().lexeme)
            self._accept(";")
        self._expect("}")
        self._accept(";")
        return Port(name, provided, tuple(sends), tuple(receives), annotations, self._loc(start))

    def _action(self):
        start = self.tok
        if self._accept("emit"):
            port = self._name().lexeme
            self._expect("!")
            message = self._name().lexeme
            self._expect("(")
            args = []
            if not self._is(")"):
                args.append(self.expression())
                while self._accept(","):
                    args.append(self.expression())
            self._expect(")")
            return EmitAction(port, message, tuple(args), self._loc(start))
        if self._accept("set"):
            prop = self._name().lexeme
            self._expect("=")
            return SetAction(prop, self.expression(), self._loc(start))
        raise self._fail({"'emit'", "'set'"})

    def _action_block(self) -> tuple:
        self._expect("{")
        actions = []
        while not self._is("}"):
            actions.append(self._action())
            self._accept(";")
        self._expect("}")
        return tuple(actions)

    def _state(self) -> State:
        start = self._expect("state")
        name = self._name().lexeme
        annotations = self._annotations()
        on_entry: tuple = ()
        if self._accept("{"):
            if self._accept("on"):
                self._expect("entry")
                on_entry = self._action_block()
            self._expect("}")
        self._accept(";")
        return State(name, on_entry, annotations, self._loc(start))

    def _transition(self) -> Transition:
        start = self._expect("transition")
        source = self._name().lexeme
        self._expect("->")
        target = self._name().lexeme
        self._expect("event")
        port = self._name().lexeme
        self._expect("?")
        message = self._name().lexeme
        guard = self.expression() if self._accept("guard") else None
        actions = self._action_block() if self._accept("action") else ()
        annotations = self._annotations()
        self._accept(";")
        return Transition(source, target, Trigger(port, message), guard, actions, annotations, self._loc(start))

    def _statechart(self) -> Statechart:
        start = self._expect("statechart")
        name = self._name().lexeme
        self._expect("init")
        initial = self._name().lexeme
        annotations = self._annotations()
        states: List[State] = []
        transitions: List[Transition] = []

        def member():
            if self._is("state"):
                states.append(self._state())
            elif self._is("transition"):
                transitions.append(self._transition())
            else:
                raise self._fail({"'state'", "'transition'", "'}'"})

        self._expect("{")
        self._block(STATECHART_MEMBER_STARTS, member)
        return Statechart(name, initial, tuple(states), tuple(transitions), annotations, self._loc(start))

    def _hyper_value(self):
        if self._accept("-"):
            if self.tok.kind not in (TokenKind.INTEGER, TokenKind.FLOAT):
                raise self._fail({"number"})
            return -self._advance().value
        if self._accept("true"):
            return True
        if self._accept("false"):
            return False
        if self.tok.kind in (TokenKind.INTEGER, TokenKind.FLOAT, TokenKind.STRING, TokenKind.IDENTIFIER):
            return self._advance().value
        raise self._fail({"number", "string", "identifier", "'true'", "'false'"})

    def _model_algorithm(self) -> ModelAlgorithm:
        name_tok = self._name()
        hyper = []
        if self._accept("("):
            if not self._is(")"):
                while True:
                    hp_tok = self._name()
                    hyper.append(Hyperparameter(hp_tok.lexeme, self._hyper_value(), self._loc(hp_tok)))
                    if not self._accept(","):
                        break
            self._expect(")")
        return ModelAlgorithm(name_tok.lexeme, tuple(hyper), self._loc(name_tok))

    def _enum_word(self, enum_cls):
        token = self.tok
        allowed = [m.value for m in enum_cls]
        if token.kind is TokenKind.IDENTIFIER and token.lexeme in allowed:
            self._advance()
            return enum_cls(token.lexeme)
        raise self._fail(set(allowed))

    def _data_analytics(self) -> DataAnalyticsSpec:
        start = self._expect("data_analytics")
        name = self._name().lexeme
        annotations = self._annotations()
        fields = {}

        def member():
            token = self.tok
            keyword = token.lexeme
            if token.kind is not TokenKind.KEYWORD or keyword not in ANALYTICS_KEYWORDS:
                raise self._fail({f"'{k}'" for k in ANALYTICS_KEYWORDS} | {"'}'"})
            if keyword in fields:
                raise ParseError(f"duplicate '{keyword}' in data_analytics {name}", self._loc(token),
                                 frozenset(), token)
            self._advance()
            if keyword == "labels":
                fields[keyword] = self._enum_word(LabelsMode)
            elif keyword == "features":
                names = [self._name().lexeme]
                while self._accept(","):
                    names.append(self._name().lexeme)
                fields[keyword] = tuple(names)
            elif keyword == "prediction_results":
                fields[keyword] = self._name().lexeme
            elif keyword == "sequential":
                if self._accept("true"):
                    fields[keyword] = True
                elif self._accept("false"):
                    fields[keyword] = False
                else:
                    raise self._fail({"'true'", "'false'"})
            elif keyword == "timestamps":
                fields[keyword] = self._enum_word(Toggle)
            elif keyword == "model_algorithm":
                fields[keyword] = self._model_algorithm()
            else:
                fields[keyword] = self._expect_kind(TokenKind.STRING, "string").value
            self._accept(";")

        self._expect("{")
        self._block(frozenset(ANALYTICS_KEYWORDS), member)
        return DataAnalyticsSpec(name, annotations=annotations, location=self._loc(start), **fields)

    def _thing(self) -> Thing:
        start = self._expect("thing")
        name = self._name().lexeme
        annotations = list(self._annotations())
        properties, messages, ports = [], [], []
        parts = {"statechart": None, "data_analytics": None}

        def member():
            token = self.tok
            if token.kind is TokenKind.ANNOTATION:
                annotations.append(self._annotation())
                self._accept(";")
            elif self._is("property"):
                properties.append(self._property())
            elif self._is("message"):
                messages.append(self._message())
            elif self._is("provided") or self._is("required"):
                ports.append(self._port())
            elif self._is("statechart") or self._is("data_analytics"):
                keyword = token.lexeme
                if parts[keyword] is not None:
                    raise ParseError(f"thing {name} declares more than one {keyword}", self._loc(token),
                                     frozenset(), token)
                parts[keyword] = self._statechart() if keyword == "statechart" else self._data_analytics()
            else:
                raise self._fail({f"'{k}'" for k in THING_MEMBER_STARTS} | {"annotation", "'}'"})

        self._expect("{")
        self._block(THING_MEMBER_STARTS, member)
        return Thing(name, tuple(properties), tuple(messages), tuple(ports), parts["statechart"],
                     parts["data_analytics"], tuple(annotations), self._loc(start))

    # ---- configuration ----

    def _endpoint(self) -> Endpoint:
        instance = self._name().lexeme
        self._expect(".")
        return Endpoint(instance, self._name().lexeme)

    def _configuration(self) -> Configuration:
        start = self._expect("configuration")
        name = self._name().lexeme
        annotations = list(self._annotations())
        instances, connectors = [], []

        def member():
            token = self.tok
            if token.kind is TokenKind.ANNOTATION:
                annotations.append(self._annotation())
                self._accept(";")
            elif self._accept("instance"):
                inst_name = self._name().lexeme
                self._expect(":")
                thing = self._name().lexeme
                inst_ann = self._annotations()
                self._accept(";")
                instances.append(Instance(inst_name, thing, inst_ann, self._loc(token)))
            elif self._accept("connector"):
                source = self._endpoint()
                self._expect("=>")
                target = self._endpoint()
                conn_ann = self._annotations()
                self._accept(";")
                connectors.append(Connector(source, target, conn_ann, self._loc(token)))
            else:
                raise self._fail({"'instance'", "'connector'", "annotation", "'}'"})

        self._expect("{")
        self._block(CONFIG_MEMBER_STARTS, member)
        return Configuration(name, tuple(instances), tuple(connectors), tuple(annotations), self._loc(start))

    # ---- 顶层 ----

    def parse_model(self) -> SourceModel:
        imports, things, configs, annotations, overlays = [], [], [], [], []
        while self.tok.kind is not TokenKind.EOF:
            start = self.pos
            token = self.tok
            try:
                if self._accept("import"):
                    path_tok = self._expect_kind(TokenKind.STRING, "string")
                    self._accept(";")
                    imports.append(Import(path_tok.value, self._loc(token)))
                elif self._is("thing"):
                    things.append(self._thing())
                elif self._is("configuration"):
                    configs.append(self._configuration())
                elif self._accept("annotate"):
                    target = [self._name().lexeme]
                    while self._accept("."):
                        target.append(self._name().lexeme)
                    overlay_ann = self._annotations()
                    if not overlay_ann:
                        raise self._fail({"annotation"})
                    self._accept(";")
                    overlays.append(AnnotationOverlay(tuple(target), overlay_ann, self._loc(token)))
                elif token.kind is TokenKind.ANNOTATION:
                    annotations.append(self._annotation())
                    self._accept(";")
                else:
                    raise self._fail({f"'{k}'" for k in TOP_LEVEL_STARTS} | {"annotation"})
            except ParseError as e:
                self.errors.append(e)
                self._synchronize(TOP_LEVEL_STARTS, start)
                # 顶层多余的 '}' 也需要跳过
                if self._is("}"):
                    self._advance()
        return SourceModel(tuple(imports), tuple(things), tuple(configs), tuple(annotations),
                           tuple(overlays), path=self.path)


def parse(text: str, path: Optional[str] = None, allow_empty: bool = True) -> SourceModel:
    """解析 DSML 文本；任何语法错误都以 ParseFailure 汇总抛出"""
    try:
        tokens = tokenize(text, path)
    except ParseError as e:
        raise ParseFailure([e]) from e
    parser = Parser(tokens, text, path)
    model = parser.parse_model()
    if parser.errors:
        logger.debug(f"[解析] {path or '<text>'}: {len(parser.errors)} 个语法错误")
        raise ParseFailure(parser.errors)
    if model.is_empty and not allow_empty:
        location = SourceLocation(1, 1, path)
        raise ParseFailure([ParseError(
            "empty model: expected import, thing, configuration or annotate",
            location, frozenset({"'import'", "'thing'", "'configuration'", "'annotate'"}),
            parser.tokens[-1],
        )])
    return model


def parse_expression(text: str) -> ex.Expr:
    parser = Parser(tokenize(text), text)
    result = parser.expression()
    if parser.tok.kind is not TokenKind.EOF:
        raise parser._fail({"end of input"})
    return result


def parse_events(text: str) -> List[Event]:
    """解析 `Port?msg(1, 2), Port?other` 形式的事件序列（simulate 命令使用）"""
    parser = Parser(tokenize(text), text)
    events = []
    while parser.tok.kind is not TokenKind.EOF:
        port = parser._name().lexeme
        parser._expect("?")
        message = parser._name().lexeme
        args = []
        if parser._accept("("):
            if not parser._is(")"):
                args.append(ex.evaluate(parser.expression(), {}))
                while parser._accept(","):
                    args.append(ex.evaluate(parser.expression(), {}))
            parser._expect(")")
        events.append(Event(port, message, tuple(args)))
        if not parser._accept(","):
            parser._accept(";")
    return events
