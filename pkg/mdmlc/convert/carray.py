"""模型字节 -> C 字节数组源文件（xxd -i 布局，每行 12 个字节）"""
import math
import re
from typing import List

from ..core.errors import CArrayFormatError
from ..model.diagnostics import SourceLocation

BYTES_PER_LINE = 12
INDENT = "  "
# 每个负载字节渐近占用的源码字节数："0xab, " 六个字符，加上每行的缩进与换行
EXPANSION_RATIO = 74 / 12

_IDENTIFIER = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_OPEN = re.compile(r"^\s*(?:const\s+)?unsigned\s+char\s+([A-Za-z_][A-Za-z0-9_]*)\s*\[\s*\]\s*=\s*\{\s*$")
_LEN = re.compile(r"^\s*(?:const\s+)?unsigned\s+int\s+([A-Za-z_][A-Za-z0-9_]*)_len\s*=\s*(\d+)\s*;\s*$")
_BYTE = re.compile(r"0[xX][0-9a-fA-F]{2}")


def check_symbol(symbol: str) -> str:
    if not _IDENTIFIER.fullmatch(symbol):
        raise ValueError(f"'{symbol}' is not a valid C identifier")
    return symbol


def emit_carray(payload: bytes, symbol: str = "model_data") -> str:
    check_symbol(symbol)
    lines = [f"unsigned char {symbol}[] = {{"]
    rows = [payload[i:i + BYTES_PER_LINE] for i in range(0, len(payload), BYTES_PER_LINE)]
    for index, row in enumerate(rows):
        text = INDENT + ", ".join(f"0x{b:02x}" for b in row)
        if index < len(rows) - 1:
            text += ","
        lines.append(text)
    lines.append("};")
    lines.append(f"unsigned int {symbol}_len = {len(payload)};")
    return "\n".join(lines) + "\n"


def carray_size(n: int, symbol: str = "model_data") -> int:
    """emit_carray 输出长度的闭式解

    46 + 2·len(symbol) + digits(N) + body，
    body = 6N + 2·ceil(N/12) - 1（N = 0 时为 0）
    """
    body = 6 * n + 2 * math.ceil(n / BYTES_PER_LINE) - 1 if n else 0
    return 46 + 2 * len(symbol) + len(str(n)) + body


def _fail(message: str, line: int, column: int = 1) -> CArrayFormatError:
    return CArrayFormatError(f"{SourceLocation(line, column)}: {message}")


def parse_carray(text: str) -> bytes:
    """emit_carray 的逆操作；校验 _len 与实际字节数一致"""
    lines = text.splitlines()
    index = 0
    while index < len(lines) and not lines[index].strip():
        index += 1
    if index >= len(lines):
        raise _fail("empty C array source", 1)
    opening = _OPEN.match(lines[index])
    if not opening:
        raise _fail("expected 'unsigned char <symbol>[] = {'", index + 1)
    symbol = opening.group(1)

    data: List[int] = []
    index += 1
    closed = False
    while index < len(lines):
        line = lines[index]
        if line.strip() == "};":
            closed = True
            index += 1
            break
        column = 1
        for part in line.split(","):
            stripped = part.strip()
            at = column + (len(part) - len(part.lstrip()))
            if stripped:
                if not _BYTE.fullmatch(stripped):
                    raise _fail(f"malformed hex literal '{stripped}'", index + 1, at)
                data.append(int(stripped, 16))
            column += len(part) + 1
        index += 1
    if not closed:
        raise _fail("missing closing '};'", len(lines))

    while index < len(lines) and not lines[index].strip():
        index += 1
    if index >= len(lines):
        raise _fail(f"missing '{symbol}_len' declaration", len(lines))
    length = _LEN.match(lines[index])
    if not length or length.group(1) != symbol:
        raise _fail(f"expected 'unsigned int {symbol}_len = <N>;'", index + 1)
    declared = int(length.group(2))
    if declared != len(data):
        raise _fail(f"{symbol}_len declares {declared} bytes but the array holds {len(data)}", index + 1)
    return bytes(data)
