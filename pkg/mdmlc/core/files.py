"""文件读写辅助"""
import os
import tempfile
from pathlib import Path
from typing import Union

from .errors import MdmlIOError


def atomic_write(path: Union[str, Path], data: Union[bytes, str]) -> None:
    """先写临时文件再 rename，保证单个文件的写入是原子的"""
    path = Path(path)
    if isinstance(data, str):
        data = data.encode('utf-8')
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=str(path.parent))
    try:
        with os.fdopen(fd, 'wb') as f:
            f.write(data)
        os.replace(tmp_name, path)
    except OSError as e:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise MdmlIOError(f"{path}: cannot write file: {e.strerror or e}") from e


def read_text(path: Union[str, Path]) -> str:
    """UTF-8 解码，换行统一为 \\n"""
    data = read_bytes(path)
    try:
        text = data.decode('utf-8')
    except UnicodeDecodeError as e:
        raise MdmlIOError(f"{path}: not valid UTF-8 text (byte 0x{data[e.start]:02x} at offset {e.start})") from e
    return text.replace('\r\n', '\n').replace('\r', '\n')


def read_bytes(path: Union[str, Path]) -> bytes:
    try:
        with open(path, 'rb') as f:
            return f.read()
    except OSError as e:
        raise MdmlIOError(f"{path}: cannot read file: {e.strerror or e}") from e
