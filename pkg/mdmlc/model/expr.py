"""守卫与动作中使用的受限表达式"""
import operator
from dataclasses import dataclass
from typing import Iterator, Mapping, Union

Value = Union[int, float, bool, str]

# 优先级从低到高
PRECEDENCE = {
    "or": 1,
    "and": 2,
    "==": 3, "!=": 3, "<": 3, "<=": 3, ">": 3, ">=": 3,
    "+": 4, "-": 4,
    "*": 5, "/": 5,
}
UNARY_PRECEDENCE = 6

COMPARISONS = {
    "==": operator.eq,
    "!=": operator.ne,
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
}
ARITHMETIC = {
    "+": operator.add,
    "-": operator.sub,
    "*": operator.mul,
}


class ExpressionError(ValueError):
    pass


@dataclass(frozen=True)
class Literal:
    value: Value


@dataclass(frozen=True)
class Name:
    id: str


@dataclass(frozen=True)
class Unary:
    op: str  # "-" | "not"
    operand: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"


Expr = Union[Literal, Name, Unary, Binary]


def names(expr: Expr) -> Iterator[str]:
    """表达式中引用的全部名字（按出现顺序）"""
    if isinstance(expr, Name):
        yield expr.id
    elif isinstance(expr, Unary):
        yield from names(expr.operand)
    elif isinstance(expr, Binary):
        yield from names(expr.left)
        yield from names(expr.right)


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def evaluate(expr: Expr, env: Mapping[str, Value]) -> Value:
    if isinstance(expr, Literal):
        return expr.value
    if isinstance(expr, Name):
        if expr.id not in env:
            raise ExpressionError(f"unbound name '{expr.id}'")
        return env[expr.id]
    if isinstance(expr, Unary):
        value = evaluate(expr.operand, env)
        if expr.op == "not":
            if not isinstance(value, bool):
                raise ExpressionError(f"'not' expects Bool, got {value!r}")
            return not value
        if not _is_number(value):
            raise ExpressionError(f"unary '-' expects a number, got {value!r}")
        return -value
    if isinstance(expr, Binary):
        if expr.op in ("and", "or"):
            left = evaluate(expr.left, env)
            if not isinstance(left, bool):
                raise ExpressionError(f"'{expr.op}' expects Bool, got {left!r}")
            # 短路求值
            if expr.op == "and" and not left:
                return False
            if expr.op == "or" and left:
                return True
            right = evaluate(expr.right, env)
            if not isinstance(right, bool):
                raise ExpressionError(f"'{expr.op}' expects Bool, got {right!r}")
            return right
        left = evaluate(expr.left, env)
        right = evaluate(expr.right, env)
        if expr.op in COMPARISONS:
            if _is_number(left) != _is_number(right) and expr.op not in ("==", "!="):
                raise ExpressionError(f"cannot compare {left!r} {expr.op} {right!r}")
            try:
                return COMPARISONS[expr.op](left, right)
            except TypeError as e:
                raise ExpressionError(str(e)) from e
        if not (_is_number(left) and _is_number(right)):
            raise ExpressionError(f"'{expr.op}' expects numbers, got {left!r} and {right!r}")
        if expr.op == "/":
            if right == 0:
                raise ExpressionError("division by zero")
            if isinstance(left, int) and isinstance(right, int):
                return int(left / right)
            return left / right
        return ARITHMETIC[expr.op](left, right)
    raise ExpressionError(f"unknown expression node {expr!r}")
