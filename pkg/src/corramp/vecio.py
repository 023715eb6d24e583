"""Text (``pm1``) and binary (``PM1\\0``) files of sign vectors."""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import FormatError
from .signs import as_signs

MAGIC = b"PM1\x00"
_HEADER = struct.Struct("<4sQQ")
_MINUS = ("-", "−")


def dumps_text(V) -> str:
    V = as_signs(V)
    n, d = V.shape
    lines = [f"pm1 {d} {n}"]
    table = np.array([ord("-"), ord("+")], dtype=np.uint8)
    for row in V:
        lines.append(table[(row > 0).astype(np.uint8)].tobytes().decode("ascii"))
    return "\n".join(lines) + "\n"


def loads_text(text: str) -> np.ndarray:
    lines = text.splitlines()
    if not lines:
        raise FormatError("line 1: empty file")
    head = lines[0].split()
    if len(head) != 3 or head[0] != "pm1":
        raise FormatError(f"line 1: expected 'pm1 <d> <n>', got {lines[0]!r}")
    try:
        d, n = int(head[1]), int(head[2])
    except ValueError:
        raise FormatError(f"line 1: non-integer dimensions in {lines[0]!r}") from None
    if d < 0 or n < 0:
        raise FormatError("line 1: negative dimensions")
    body = lines[1:]
    # tolerate a single trailing blank line
    while len(body) > n and body[-1] == "":
        body.pop()
    if len(body) != n:
        raise FormatError(f"line {len(body) + 2}: expected {n} rows, found {len(body)}")
    out = np.empty((n, d), dtype=np.int8)
    for r, line in enumerate(body):
        if len(line) != d:
            raise FormatError(f"line {r + 2}: expected {d} characters, found {len(line)}")
        for c, ch in enumerate(line):
            if ch == "+":
                out[r, c] = 1
            elif ch in _MINUS:
                out[r, c] = -1
            else:
                raise FormatError(f"line {r + 2}, column {c + 1}: unexpected character {ch!r}")
    return out


def dumps_binary(V) -> bytes:
    V = as_signs(V)
    n, d = V.shape
    bits = np.packbits(V > 0, axis=1, bitorder="little") if d else np.zeros((n, 0), np.uint8)
    return _HEADER.pack(MAGIC, d, n) + bits.tobytes()


def loads_binary(data: bytes) -> np.ndarray:
    if len(data) < _HEADER.size:
        raise FormatError(f"offset {len(data)}: truncated header")
    magic, d, n = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"offset 0: bad magic {magic!r}")
    row = (d + 7) // 8
    need = _HEADER.size + n * row
    if len(data) != need:
        raise FormatError(f"offset {min(len(data), need)}: expected {need} bytes, found {len(data)}")
    raw = np.frombuffer(data, dtype=np.uint8, offset=_HEADER.size).reshape(n, row)
    if d % 8 and n:
        pad = raw[:, -1] >> (d % 8)
        bad = np.flatnonzero(pad)
        if bad.size:
            off = _HEADER.size + int(bad[0]) * row + row - 1
            raise FormatError(f"offset {off}: nonzero pad bits")
    bits = np.unpackbits(raw, axis=1, count=d, bitorder="little")
    return np.where(bits == 1, 1, -1).astype(np.int8)


def read_vectors(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if data.startswith(MAGIC):
        return loads_binary(data)
    try:
        return loads_text(data.decode("utf-8"))
    except UnicodeDecodeError as exc:
        raise FormatError(f"offset {exc.start}: not UTF-8 text and no binary magic") from None


def write_vectors(path, V, binary: bool = False) -> None:
    if binary:
        Path(path).write_bytes(dumps_binary(V))
    else:
        Path(path).write_text(dumps_text(V), encoding="utf-8")
