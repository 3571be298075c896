"""Cartesian grid bookkeeping and continuous-convention 2D Fourier transforms.

The physical square ``[-1, 1]^2`` carries ``nx`` nodes per axis with spacing
``h = 2 / nx``.  Every field lives on the padded square ``[-2, 2]^2`` with
``2 nx`` nodes per axis, ``x_i = i h`` for ``i in {-nx, ..., nx - 1}``.
Frequencies are ``xi_k = k * omega / nx`` with ``omega = nx * pi / 2``.

Arrays are stored in *centered* order: array index ``c`` holds node
``i = c - nx`` (both for space and frequency).  Transforms are scaled so that
they approximate ``F f(xi) = int f(x) exp(-i x . xi) dx``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft

from .errors import DimensionMismatch, NonNegligibleImaginaryPart

SIDE_LENGTH = 2.0
PAD_FACTOR = 2
IMAG_TOL = 1e-8


def fft_workers() -> int:
    """Worker threads for scipy.fft, capped by ``PATMS_THREADS`` when set."""
    env = os.environ.get("PATMS_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


@dataclass(frozen=True)
class Grid2D:
    nx: int = 100

    def __post_init__(self):
        if int(self.nx) != self.nx or self.nx < 1:
            raise ValueError(f"nx must be a positive integer, got {self.nx!r}")

    @property
    def side_length(self) -> float:
        return SIDE_LENGTH

    @property
    def pad_factor(self) -> int:
        return PAD_FACTOR

    @property
    def n(self) -> int:
        """Nodes per axis on the padded grid."""
        return PAD_FACTOR * self.nx

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)

    @property
    def spacing(self) -> float:
        return SIDE_LENGTH / self.nx

    @property
    def omega(self) -> float:
        return self.nx * np.pi / 2

    @property
    def freq_spacing(self) -> float:
        return self.omega / self.nx

    @property
    def cell_area(self) -> float:
        return self.spacing**2

    @property
    def physical_slice(self) -> slice:
        lo = self.nx - self.nx // 2
        return slice(lo, lo + self.nx)

    def indices(self) -> np.ndarray:
        """Centered node indices ``-nx .. nx-1``."""
        return np.arange(-self.nx, self.nx)

    def coordinates(self) -> np.ndarray:
        return self.indices() * self.spacing

    def frequencies(self) -> np.ndarray:
        return self.indices() * self.freq_spacing

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        x = self.coordinates()
        return np.meshgrid(x, x, indexing="ij")

    @cached_property
    def radius(self) -> np.ndarray:
        x0, x1 = self.mesh()
        return np.hypot(x0, x1)

    @cached_property
    def frequency_radius(self) -> np.ndarray:
        """``|xi_k|`` in centered order."""
        k = self.frequencies()
        return np.hypot(k[:, None], k[None, :])

    @cached_property
    def rfft_frequency_radius(self) -> np.ndarray:
        """``|xi|`` in the (unshifted, half-spectrum) layout of ``rfft2``."""
        k0 = sfft.fftfreq(self.n, d=1.0 / self.n) * self.freq_spacing
        k1 = sfft.rfftfreq(self.n, d=1.0 / self.n) * self.freq_spacing
        return np.hypot(k0[:, None], k1[None, :])

    def node_index(self, point) -> tuple[int, int]:
        """Centered array index of the node nearest to ``point``."""
        c = np.rint(np.asarray(point, dtype=float) / self.spacing).astype(int) + self.nx
        if np.any(c < 0) or np.any(c >= self.n):
            raise ValueError(f"point {point} lies outside the padded grid")
        return int(c[0]), int(c[1])


@dataclass(frozen=True, eq=False)
class ScalarField2D:
    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise DimensionMismatch(
                f"field shape {v.shape} does not match padded grid {self.grid.shape}")
        object.__setattr__(self, "values", v)

    @classmethod
    def zeros(cls, grid: Grid2D) -> "ScalarField2D":
        return cls(grid, np.zeros(grid.shape))

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))


@dataclass(frozen=True, eq=False)
class SpectrumField2D:
    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != self.grid.shape:
            raise DimensionMismatch(
                f"spectrum shape {v.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "values", v)

    def at(self, k0: int, k1: int) -> complex:
        """Value at frequency node ``xi_(k0, k1)``."""
        nx = self.grid.nx
        return complex(self.values[k0 + nx, k1 + nx])


def to_fft_order(values: np.ndarray) -> np.ndarray:
    return sfft.ifftshift(values)


def from_fft_order(values: np.ndarray) -> np.ndarray:
    return sfft.fftshift(values)


def dft2_forward(field: ScalarField2D) -> SpectrumField2D:
    """Discrete approximation of the continuous 2D Fourier integral."""
    g = field.grid
    spec = sfft.fft2(to_fft_order(field.values), workers=fft_workers())
    return SpectrumField2D(g, from_fft_order(spec) * g.cell_area)


def dft2_inverse(spec: SpectrumField2D) -> ScalarField2D:
    """Inverse of :func:`dft2_forward`.

    Raises :class:`NonNegligibleImaginaryPart` when the result is not real to
    within ``1e-8`` relative, i.e. the spectrum was not conjugate-symmetric.
    """
    g = spec.grid
    z = from_fft_order(sfft.ifft2(to_fft_order(spec.values), workers=fft_workers()))
    z /= g.cell_area
    scale = np.linalg.norm(z)
    residue = np.linalg.norm(z.imag)
    if residue > IMAG_TOL * scale:
        raise NonNegligibleImaginaryPart(
            f"inverse transform has imaginary residue {residue:.3e} "
            f"(relative {residue / scale:.3e})")
    return ScalarField2D(g, z.real.copy())


def embed_pad(values, grid: Grid2D) -> ScalarField2D:
    """Zero-pad an ``nx x nx`` physical-square array into the padded grid."""
    v = np.asarray(values, dtype=float)
    if v.shape != (grid.nx, grid.nx):
        raise DimensionMismatch(
            f"expected physical array of shape {(grid.nx, grid.nx)}, got {v.shape}")
    out = np.zeros(grid.shape)
    s = grid.physical_slice
    out[s, s] = v
    return ScalarField2D(grid, out)


def crop_physical(field) -> np.ndarray:
    """Central ``nx x nx`` block of a padded field (ScalarField2D or array)."""
    if isinstance(field, ScalarField2D):
        grid, v = field.grid, field.values
    else:
        v = np.asarray(field)
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] % 2:
            raise DimensionMismatch(f"cannot crop array of shape {v.shape}")
        grid = Grid2D(v.shape[0] // 2)
    if v.shape != grid.shape:
        raise DimensionMismatch(f"expected padded shape {grid.shape}, got {v.shape}")
    s = grid.physical_slice
    return v[s, s].copy()
