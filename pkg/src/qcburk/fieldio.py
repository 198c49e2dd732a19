"""Binary grid-field files.

Layout: 4-byte magic ``QCGF``, ``u32`` version, ``u32`` N, ``f64`` half-width
L, then N*N little-endian complex pairs ``(f64 re, f64 im)`` in row-major
order (row index = y).
"""
from __future__ import annotations

import struct
from pathlib import Path
from typing import Union

import numpy as np

from .beltrami import GridField, GridSpec
from .errors import InvalidInput

__all__ = ["MAGIC", "VERSION", "write_field", "read_field", "field_to_bytes", "field_from_bytes"]

MAGIC = b"QCGF"
VERSION = 1
_HEADER = struct.Struct("<4sIId")


def field_to_bytes(f: GridField) -> bytes:
    head = _HEADER.pack(MAGIC, VERSION, f.spec.N, float(f.spec.L))
    return head + np.ascontiguousarray(f.values, dtype="<c16").tobytes()


def field_from_bytes(data: bytes) -> GridField:
    if len(data) < _HEADER.size:
        raise InvalidInput("truncated field header")
    magic, version, N, L = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise InvalidInput(f"bad magic {magic!r}")
    if version != VERSION:
        raise InvalidInput(f"unsupported field version {version}")
    body = data[_HEADER.size:]
    if len(body) != 16 * N * N:
        raise InvalidInput(f"expected {16 * N * N} payload bytes, found {len(body)}")
    vals = np.frombuffer(body, dtype="<c16").reshape(N, N).astype(complex)
    return GridField(GridSpec(N, L), vals)


def write_field(path: Union[str, Path], f: GridField) -> Path:
    path = Path(path)
    path.write_bytes(field_to_bytes(f))
    return path


def read_field(path: Union[str, Path]) -> GridField:
    return field_from_bytes(Path(path).read_bytes())
