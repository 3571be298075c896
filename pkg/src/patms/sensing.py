"""Compressed-sensing measurement matrices acting on the detector axis."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DimensionMismatch, NotDivisible
from .wave import DetectorRing, TimeGrid, WaveData

KINDS = ("subsample", "gaussian", "identity", "dense")


@dataclass(frozen=True, eq=False)
class CSData:
    """Compressed measurements ``y = A W_n f``: one row per measurement vector."""

    time: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[1] != self.time.nt:
            raise DimensionMismatch(f"CS data shape {v.shape} incompatible with nt={self.time.nt}")
        object.__setattr__(self, "values", v)

    @property
    def m(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True, eq=False)
class MeasurementMatrix:
    """``m x n`` sensing matrix.

    Subsampling and identity matrices keep only the selected column indices
    (0-based, strictly increasing); Gaussian and loaded matrices are dense.
    """

    kind: str
    m: int
    n: int
    columns: np.ndarray | None = None
    dense: np.ndarray | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown matrix kind {self.kind!r}")
        if not 0 < self.m <= self.n:
            raise ValueError(f"need 0 < m <= n, got m={self.m}, n={self.n}")
        if self.columns is None and self.dense is None:
            raise ValueError("matrix needs either columns or dense entries")

    @cached_property
    def entries(self) -> np.ndarray:
        if self.dense is not None:
            return self.dense
        a = np.zeros((self.m, self.n))
        a[np.arange(self.m), self.columns] = 1.0
        return a

    def apply(self, values: np.ndarray) -> np.ndarray:
        """``A @ values`` for values of shape ``(n, nt)``."""
        if values.shape[0] != self.n:
            raise DimensionMismatch(f"matrix has {self.n} columns, data has {values.shape[0]} rows")
        if self.columns is not None:
            return values[self.columns]
        return self.dense @ values

    def apply_adjoint(self, values: np.ndarray) -> np.ndarray:
        if values.shape[0] != self.m:
            raise DimensionMismatch(f"matrix has {self.m} rows, data has {values.shape[0]} rows")
        if self.columns is not None:
            out = np.zeros((self.n,) + values.shape[1:])
            out[self.columns] = values
            return out
        return self.dense.T @ values

    @classmethod
    def from_array(cls, entries) -> "MeasurementMatrix":
        """Rebuild a matrix from its entries, recognising selection matrices."""
        a = np.asarray(entries, dtype=float)
        if a.ndim != 2:
            raise DimensionMismatch(f"matrix must be 2D, got shape {a.shape}")
        m, n = a.shape
        one_hot = np.all((a == 0) | (a == 1)) and np.all(a.sum(axis=1) == 1)
        if one_hot:
            cols = np.argmax(a, axis=1)
            if np.all(np.diff(cols) > 0):
                kind = "identity" if m == n else "subsample"
                return cls(kind, m, n, columns=cols)
        return cls("dense", m, n, dense=a.copy())


def identity_matrix(n: int) -> MeasurementMatrix:
    return MeasurementMatrix("identity", n, n, columns=np.arange(n))


def subsampling_matrix(n: int, factor: int) -> MeasurementMatrix:
    """Uniform subsampling: row ``j`` (1-based) selects column ``factor (j - 1) + 1``."""
    if factor < 1:
        raise ValueError("subsampling factor must be >= 1")
    if n % factor:
        raise NotDivisible(f"{n} detectors not divisible by factor {factor}")
    cols = np.arange(0, n, factor)
    kind = "identity" if factor == 1 else "subsample"
    return MeasurementMatrix(kind, n // factor, n, columns=cols)


def gaussian_matrix(m: int, n: int, seed: int) -> MeasurementMatrix:
    """I.i.d. ``N(0, 1/m)`` entries from a seeded Philox (counter-based) stream."""
    if not 0 < m <= n:
        raise ValueError(f"need 0 < m <= n, got m={m}, n={n}")
    rng = np.random.Generator(np.random.Philox(seed))
    a = rng.standard_normal((m, n)) / np.sqrt(m)
    return MeasurementMatrix("gaussian", m, n, dense=a, seed=seed)


def measure(M: MeasurementMatrix, g: WaveData) -> CSData:
    if M.n != g.ring.n:
        raise DimensionMismatch(f"matrix expects {M.n} detectors, data has {g.ring.n}")
    return CSData(g.time, M.apply(g.values))


def measure_adjoint(M: MeasurementMatrix, y: CSData) -> WaveData:
    if y.m != M.m:
        raise DimensionMismatch(f"matrix has {M.m} rows, data has {y.m}")
    return WaveData(DetectorRing(M.n), y.time, M.apply_adjoint(y.values))
