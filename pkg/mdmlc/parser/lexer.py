"""词法分析：文本 -> Token 列表"""
from dataclasses import dataclass, field
from enum import Enum
from typing import FrozenSet, List, Optional

from ..core.errors import MdmlError, ExitStatus
from ..model.diagnostics import SourceLocation

KEYWORDS = frozenset({
    "import", "thing", "property", "message", "provided", "required", "port",
    "sends", "receives", "statechart", "init", "state", "on", "entry",
    "transition", "event", "guard", "action", "emit", "set",
    "data_analytics", "labels", "features", "prediction_results", "sequential",
    "timestamps", "model_algorithm", "training_results", "dataset",
    "configuration", "instance", "connector", "annotate",
    "and", "or", "not", "true", "false",
})

# 最长匹配优先
PUNCTUATION = (
    "=>", "->", "<=", ">=", "==", "!=",
    "{", "}", "(", ")", "[", "]", ";", ":", ",", ".", "=", "?", "!",
    "<", ">", "+", "-", "*", "/",
)

DIGITS = frozenset("0123456789")
IDENT_START = frozenset("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
IDENT_CHARS = IDENT_START | DIGITS
BAREWORD_CHARS = frozenset("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_+.-")
_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t"}


class TokenKind(str, Enum):
    KEYWORD = "keyword"
    IDENTIFIER = "identifier"
    INTEGER = "integer"
    FLOAT = "float"
    STRING = "string"
    ANNOTATION = "annotation-key"
    PUNCT = "punctuation"
    EOF = "end of input"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    lexeme: str
    line: int
    column: int
    offset: int = field(default=0, compare=False)

    @property
    def value(self):
        if self.kind is TokenKind.STRING:
            return unescape(self.lexeme[1:-1])
        if self.kind is TokenKind.ANNOTATION:
            return self.lexeme[1:]
        if self.kind is TokenKind.INTEGER:
            return int(self.lexeme)
        if self.kind is TokenKind.FLOAT:
            return float(self.lexeme)
        return self.lexeme

    def describe(self) -> str:
        if self.kind is TokenKind.EOF:
            return "end of input"
        return f"{self.kind.value} '{self.lexeme}'"


class ParseError(MdmlError):
    """语法错误：位置、期望集合与实际遇到的 token"""
    exit_status = ExitStatus.PARSE_ERROR

    def __init__(self, message: str, location: SourceLocation,
                 expected: FrozenSet[str] = frozenset(), found: Optional[Token] = None):
        self.message = message
        self.location = location
        self.expected = frozenset(expected)
        self.found = found
        super().__init__(f"{location}: {message}")

    def to_dict(self) -> dict:
        return {
            "severity": "error",
            "message": self.message,
            "expected": sorted(self.expected),
            "found": self.found.lexeme if self.found else None,
            "file": self.location.file,
            "line": self.location.line,
            "column": self.location.column,
        }


def unescape(body: str) -> str:
    out = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\" and i + 1 < len(body):
            out.append(_ESCAPES.get(body[i + 1], body[i + 1]))
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def escape(value: str) -> str:
    return value.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t")


class Lexer:
    def __init__(self, text: str, path: Optional[str] = None):
        self.text = text
        self.path = path
        self.pos = 0
        self.line = 1
        self.column = 1
        self.tokens: List[Token] = []

    def _loc(self, line: int, column: int) -> SourceLocation:
        return SourceLocation(line, column, self.path)

    def _advance(self, n: int = 1) -> str:
        chunk = self.text[self.pos:self.pos + n]
        for ch in chunk:
            if ch == "\n":
                self.line += 1
                self.column = 1
            else:
                self.column += 1
        self.pos += n
        return chunk

    def _peek(self, ahead: int = 0) -> str:
        i = self.pos + ahead
        return self.text[i] if i < len(self.text) else ""

    def _emit(self, kind: TokenKind, start: int, line: int, column: int) -> None:
        self.tokens.append(Token(kind, self.text[start:self.pos], line, column, start))

    def _skip_trivia(self) -> None:
        while self.pos < len(self.text):
            ch = self._peek()
            if ch in " \t\r\n":
                self._advance()
            elif ch == "/" and self._peek(1) == "/":
                while self.pos < len(self.text) and self._peek() != "\n":
                    self._advance()
            elif ch == "/" and self._peek(1) == "*":
                line, column = self.line, self.column
                end = self.text.find("*/", self.pos + 2)
                if end < 0:
                    raise ParseError("unterminated block comment", self._loc(line, column))
                self._advance(end + 2 - self.pos)
            else:
                return

    def _string(self) -> None:
        start, line, column = self.pos, self.line, self.column
        self._advance()
        while True:
            ch = self._peek()
            if ch == "" or ch == "\n":
                raise ParseError("unterminated string literal", self._loc(line, column))
            if ch == "\\":
                if self._peek(1) not in _ESCAPES:
                    raise ParseError(f"invalid escape sequence '\\{self._peek(1)}'",
                                     self._loc(self.line, self.column))
                self._advance(2)
                continue
            self._advance()
            if ch == '"':
                break
        self._emit(TokenKind.STRING, start, line, column)

    def _number(self) -> None:
        start, line, column = self.pos, self.line, self.column
        kind = TokenKind.INTEGER
        while self._peek() in DIGITS:
            self._advance()
        if self._peek() == "." and self._peek(1) in DIGITS:
            kind = TokenKind.FLOAT
            self._advance()
            while self._peek() in DIGITS:
                self._advance()
        if self._peek() in ("e", "E"):
            sign = 1 if self._peek(1) in ("+", "-") else 0
            if self._peek(1 + sign) in DIGITS:
                kind = TokenKind.FLOAT
                self._advance(1 + sign)
                while self._peek() in DIGITS:
                    self._advance()
        self._emit(kind, start, line, column)

    def _word(self) -> None:
        start, line, column = self.pos, self.line, self.column
        while self._peek() in IDENT_CHARS:
            self._advance()
        lexeme = self.text[start:self.pos]
        kind = TokenKind.KEYWORD if lexeme in KEYWORDS else TokenKind.IDENTIFIER
        self._emit(kind, start, line, column)

    def _annotation(self) -> None:
        start, line, column = self.pos, self.line, self.column
        self._advance()
        if self._peek() not in IDENT_START:
            raise ParseError("annotation key expected after '@'", self._loc(line, column))
        while self._peek() in IDENT_CHARS:
            self._advance()
        self._emit(TokenKind.ANNOTATION, start, line, column)
        # 注解值可以是不带引号的裸词，例如 @compiler rpi_3b+_python
        while self._peek() in (" ", "\t"):
            self._advance()
        if self._peek() and self._peek() in BAREWORD_CHARS:
            b_start, b_line, b_column = self.pos, self.line, self.column
            while self._peek() and self._peek() in BAREWORD_CHARS:
                self._advance()
            self._emit(TokenKind.IDENTIFIER, b_start, b_line, b_column)

    def run(self) -> List[Token]:
        while True:
            self._skip_trivia()
            if self.pos >= len(self.text):
                return self.tokens
            ch = self._peek()
            if ch == '"':
                self._string()
            elif ch in DIGITS:
                self._number()
            elif ch in IDENT_START:
                self._word()
            elif ch == "@":
                self._annotation()
            else:
                for punct in PUNCTUATION:
                    if self.text.startswith(punct, self.pos):
                        start, line, column = self.pos, self.line, self.column
                        self._advance(len(punct))
                        self._emit(TokenKind.PUNCT, start, line, column)
                        break
                else:
                    raise ParseError(f"unexpected character {ch!r}", self._loc(self.line, self.column))


def tokenize(text: str, path: Optional[str] = None) -> List[Token]:
    """注释与空白被跳过；未闭合的字符串/注释在起始位置报错"""
    return Lexer(text, path).run()


def end_location(text: str) -> tuple:
    """输入末尾 token 的位置：最后一个字符处（空输入为 1:1）"""
    if not text:
        return 1, 1
    line = text.count("\n", 0, len(text) - 1) + 1
    last_newline = text.rfind("\n", 0, len(text) - 1)
    column = len(text) - 1 - last_newline
    return line, column
