"""Binary array files and key/value metric CSVs, written atomically.

Array file layout (all little-endian)::

    b"AFB1" | u32 ndim | ndim x u64 dims | prod(dims) x f64, row-major
"""

from __future__ import annotations

import csv
import io
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .errors import ArrayFileError

MAGIC = b"AFB1"


def _atomic_write(path, data: bytes) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def encode_array(values) -> bytes:
    a = np.ascontiguousarray(values, dtype="<f8")
    head = MAGIC + struct.pack("<I", a.ndim) + struct.pack(f"<{a.ndim}Q", *a.shape)
    return head + a.tobytes()


def decode_array(data: bytes) -> np.ndarray:
    if len(data) < 8 or data[:4] != MAGIC:
        raise ArrayFileError("not an array file (bad magic)")
    (ndim,) = struct.unpack_from("<I", data, 4)
    off = 8 + 8 * ndim
    if len(data) < off:
        raise ArrayFileError("array file truncated inside header")
    dims = struct.unpack_from(f"<{ndim}Q", data, 8)
    count = int(np.prod(dims, dtype=np.int64)) if ndim else 1
    if len(data) != off + 8 * count:
        raise ArrayFileError(
            f"array file payload is {len(data) - off} bytes, expected {8 * count}")
    return np.frombuffer(data, dtype="<f8", offset=off).reshape(dims).astype(float)


def write_array(path, values) -> None:
    _atomic_write(path, encode_array(values))


def read_array(path) -> np.ndarray:
    with open(path, "rb") as fh:
        return decode_array(fh.read())


def write_metrics_csv(path, metrics: dict) -> None:
    """``key,value`` CSV, UTF-8 with LF line endings, rows in insertion order."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["key", "value"])
    for key, value in metrics.items():
        w.writerow([key, repr(value) if isinstance(value, float) else value])
    _atomic_write(path, buf.getvalue().encode("utf-8"))


def read_metrics_csv(path) -> dict:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["key", "value"]:
        raise ArrayFileError("metrics file lacks the key,value header")
    return {k: v for k, v in rows[1:]}
