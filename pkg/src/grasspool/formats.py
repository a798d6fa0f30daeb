"""On-disk formats for feature sequences and subspace descriptors.

Sequence, CSV::

    n,d
    x_11,...,x_1d
    ...

Sequence, binary: ``b"GRP1"``, little-endian ``u32 n``, ``u32 d``, then
``n*d`` float64 row-major.

Descriptor, binary: ``b"GRPU"``, ``u32 d``, ``u32 p``, ``d*p`` float64
column-major, ``f64 final_objective``, ``f64 constraints_satisfied_fraction``.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, ParseError
from .grp import SubspaceDescriptor
from .sequence import FeatureSequence, as_frames

SEQ_MAGIC = b"GRP1"
DESC_MAGIC = b"GRPU"
_HEADER = struct.Struct("<4sII")


def _format_of(path, fmt):
    if fmt is None:
        fmt = "bin" if Path(path).suffix.lower() in (".bin", ".grp") else "csv"
    fmt = fmt.lower()
    if fmt == "binary":
        fmt = "bin"
    if fmt not in ("csv", "bin"):
        raise ValueError(f"unknown format {fmt!r}; use 'csv' or 'bin'")
    return fmt


def _parse_csv(text: str, path) -> np.ndarray:
    lines = text.splitlines()
    if not lines:
        raise ParseError(f"{path}: line 1: empty file, expected header 'n,d'")
    try:
        n, d = (int(v) for v in lines[0].split(","))
    except ValueError:
        raise ParseError(f"{path}: line 1: expected header 'n,d', got {lines[0]!r}") from None
    rows = [ln for ln in lines[1:]]
    while rows and not rows[-1].strip():
        rows.pop()
    if len(rows) != n:
        raise ParseError(f"{path}: header declares {n} rows, found {len(rows)}")
    out = np.empty((n, d))
    for k, ln in enumerate(rows):
        fields = ln.split(",")
        if len(fields) != d:
            raise DimensionMismatch(f"{path}: line {k + 2}: expected {d} values, found {len(fields)}")
        try:
            out[k] = [float(v) for v in fields]
        except ValueError as exc:
            raise ParseError(f"{path}: line {k + 2}: {exc}") from None
    return out


def _parse_bin(buf: bytes, path) -> np.ndarray:
    if len(buf) < _HEADER.size:
        raise ParseError(f"{path}: byte 0: file too short for header ({len(buf)} < {_HEADER.size} bytes)")
    magic, n, d = _HEADER.unpack_from(buf)
    if magic != SEQ_MAGIC:
        raise ParseError(f"{path}: byte 0: bad magic {magic!r}, expected {SEQ_MAGIC!r}")
    expected = _HEADER.size + 8 * n * d
    if len(buf) != expected:
        raise ParseError(f"{path}: byte {_HEADER.size}: expected {expected} bytes for {n}x{d} values, got {len(buf)}")
    return np.frombuffer(buf, dtype="<f8", offset=_HEADER.size).reshape(n, d).astype(float)


def load_sequence(path, fmt=None) -> FeatureSequence:
    """Read a sequence; ``fmt`` is ``"csv"`` or ``"bin"`` (default: by suffix)."""
    fmt = _format_of(path, fmt)
    if fmt == "csv":
        frames = _parse_csv(Path(path).read_text(), path)
    else:
        frames = _parse_bin(Path(path).read_bytes(), path)
    return FeatureSequence(frames)


def save_sequence(X, path, fmt=None) -> None:
    fmt = _format_of(path, fmt)
    frames = as_frames(X)
    n, d = frames.shape
    if fmt == "csv":
        body = "".join(",".join(repr(float(v)) for v in row) + "\n" for row in frames)
        Path(path).write_text(f"{n},{d}\n" + body)
    else:
        Path(path).write_bytes(_HEADER.pack(SEQ_MAGIC, n, d) + frames.astype("<f8").tobytes(order="C"))


def descriptor_bytes(desc: SubspaceDescriptor) -> bytes:
    U = np.asarray(desc.point, dtype=float)
    d, p = U.shape
    return (
        _HEADER.pack(DESC_MAGIC, d, p)
        + U.astype("<f8").tobytes(order="F")
        + struct.pack("<dd", desc.final_objective, desc.constraints_satisfied_fraction)
    )


def save_descriptor(desc: SubspaceDescriptor, path) -> None:
    Path(path).write_bytes(descriptor_bytes(desc))


def load_descriptor(path) -> SubspaceDescriptor:
    buf = Path(path).read_bytes()
    if len(buf) < _HEADER.size:
        raise ParseError(f"{path}: byte 0: file too short for header")
    magic, d, p = _HEADER.unpack_from(buf)
    if magic != DESC_MAGIC:
        raise ParseError(f"{path}: byte 0: bad magic {magic!r}, expected {DESC_MAGIC!r}")
    expected = _HEADER.size + 8 * d * p + 16
    if len(buf) != expected:
        raise ParseError(f"{path}: byte {_HEADER.size}: expected {expected} bytes, got {len(buf)}")
    U = np.frombuffer(buf, dtype="<f8", count=d * p, offset=_HEADER.size).reshape((d, p), order="F").astype(float)
    obj, frac = struct.unpack_from("<dd", buf, _HEADER.size + 8 * d * p)
    return SubspaceDescriptor(point=U, params_used=None, final_objective=obj, constraints_satisfied_fraction=frac)
