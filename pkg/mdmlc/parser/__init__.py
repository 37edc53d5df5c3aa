"""文本语法：词法、语法分析与规范化输出"""
from .lexer import ParseError, Token, TokenKind, tokenize
from .parser import parse, parse_events, parse_expression
from .printer import pretty_print

__all__ = [
    "ParseError",
    "Token",
    "TokenKind",
    "parse",
    "parse_events",
    "parse_expression",
    "pretty_print",
    "tokenize",
]
