"""Sampled PAT forward operator and its exact adjoint.

The pressure is propagated with the spectral cosine symbol
``F p(xi, t) = cos(|xi| t) F f(xi)`` (unit sound speed) on the padded grid and
sampled at the grid node nearest to each detector.  Both forward and adjoint
use plain Euclidean inner products on the node values, so the adjoint is the
matrix transpose of the forward map.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
import scipy.fft as sfft

from .errors import DimensionMismatch, GridTooLarge
from .grid import Grid2D, ScalarField2D, fft_workers, from_fft_order, to_fft_order

SUPPORT_RADIUS = 0.9
MAX_DENSE_NX = 16


@dataclass(frozen=True)
class DetectorRing:
    """``n`` equidistant detectors on the unit circle, starting at angle 0."""

    n: int = 300

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"detector count must be positive, got {self.n!r}")

    @property
    def angles(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.n) / self.n

    @property
    def positions(self) -> np.ndarray:
        a = self.angles
        return np.stack([np.cos(a), np.sin(a)], axis=1)


@dataclass(frozen=True)
class TimeGrid:
    nt: int = 200
    dt: float = 0.02

    def __post_init__(self):
        if int(self.nt) != self.nt or self.nt < 1:
            raise ValueError(f"nt must be positive, got {self.nt!r}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt!r}")

    @classmethod
    def for_grid(cls, grid: Grid2D, nt: int = 200) -> "TimeGrid":
        """Default sampling ``dt = 2 / nx`` (temporal Nyquist at bandwidth omega)."""
        return cls(nt=nt, dt=grid.spacing)

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.nt) * self.dt

    @property
    def duration(self) -> float:
        return self.nt * self.dt


@dataclass(frozen=True, eq=False)
class WaveData:
    ring: DetectorRing
    time: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.ring.n, self.time.nt):
            raise DimensionMismatch(
                f"wave data shape {v.shape} != ({self.ring.n}, {self.time.nt})")
        object.__setattr__(self, "values", v)


class WaveOperator:
    """Precomputed forward/adjoint pair acting on raw arrays.

    ``forward`` maps a centered ``(2nx, 2nx)`` array to ``(n, nt)`` detector
    traces; ``adjoint`` is its transpose.
    """

    def __init__(self, grid: Grid2D, ring: DetectorRing, time: TimeGrid):
        self.grid = grid
        self.ring = ring
        self.time = time
        n = grid.n
        centered = np.rint(ring.positions / grid.spacing).astype(int) + grid.nx
        if np.any(centered < 0) or np.any(centered >= n):
            raise DimensionMismatch("detectors fall outside the padded grid")
        self.detector_nodes = centered  # centered (row, col) per detector
        fft_rows = (centered[:, 0] - grid.nx) % n
        fft_cols = (centered[:, 1] - grid.nx) % n
        self._flat = fft_rows * n + fft_cols

    @cached_property
    def _cos(self) -> np.ndarray:
        rho = self.grid.rfft_frequency_radius
        t = self.time.times
        return np.cos(t[:, None, None] * rho[None, :, :])

    @property
    def shape(self) -> tuple[tuple[int, int], tuple[int, int]]:
        return self.grid.shape, (self.ring.n, self.time.nt)

    def forward(self, f: np.ndarray) -> np.ndarray:
        n = self.grid.n
        workers = fft_workers()
        spec = sfft.rfft2(to_fft_order(f), workers=workers)
        cos = self._cos
        out = np.empty((self.ring.n, self.time.nt))
        for k in range(self.time.nt):
            p = sfft.irfft2(cos[k] * spec, s=(n, n), workers=workers)
            out[:, k] = p.ravel()[self._flat]
        return out

    def adjoint(self, g: np.ndarray) -> np.ndarray:
        g = np.asarray(g, dtype=float)
        if g.shape != (self.ring.n, self.time.nt):
            raise DimensionMismatch(f"adjoint input shape {g.shape} != {self.shape[1]}")
        n = self.grid.n
        workers = fft_workers()
        cos = self._cos
        acc = np.zeros(cos.shape[1:], dtype=complex)
        for k in range(self.time.nt):
            col = g[:, k]
            if not col.any():
                continue
            img = np.bincount(self._flat, weights=col, minlength=n * n).reshape(n, n)
            acc += cos[k] * sfft.rfft2(img, workers=workers)
        return from_fft_order(sfft.irfft2(acc, s=(n, n), workers=workers))

    def symbol(self, t: float) -> np.ndarray:
        """Propagator multiplier ``cos(|xi| t)`` on the centered frequency grid."""
        return np.cos(self.grid.frequency_radius * t)


@lru_cache(maxsize=8)
def wave_operator(grid: Grid2D, ring: DetectorRing, time: TimeGrid) -> WaveOperator:
    return WaveOperator(grid, ring, time)


def wave_forward(f: ScalarField2D, ring: DetectorRing, time: TimeGrid) -> WaveData:
    """Sampled pressure traces ``W_n f``."""
    outside = f.values[f.grid.radius > SUPPORT_RADIUS]
    if outside.size and np.abs(outside).max() > 1e-12 * max(np.abs(f.values).max(), 1e-300):
        warnings.warn("initial pressure does not vanish outside radius 0.9", stacklevel=2)
    op = wave_operator(f.grid, ring, time)
    return WaveData(ring, time, op.forward(f.values))


def wave_adjoint(g: WaveData, grid: Grid2D) -> ScalarField2D:
    op = wave_operator(grid, g.ring, g.time)
    return ScalarField2D(grid, op.adjoint(g.values))


def dense_forward_matrix(grid: Grid2D, ring: DetectorRing, time: TimeGrid) -> np.ndarray:
    """Explicit matrix of :func:`wave_forward`, rows ``(l, k)`` and columns over
    padded nodes, both flattened row-major.  Test oracle for small grids."""
    if grid.nx > MAX_DENSE_NX:
        raise GridTooLarge(f"dense matrix limited to nx <= {MAX_DENSE_NX}, got {grid.nx}")
    op = WaveOperator(grid, ring, time)
    n_nodes = grid.n * grid.n
    mat = np.empty((ring.n * time.nt, n_nodes))
    basis = np.zeros(n_nodes)
    for i in range(n_nodes):
        basis[i] = 1.0
        mat[:, i] = op.forward(basis.reshape(grid.shape)).ravel()
        basis[i] = 0.0
    return mat
