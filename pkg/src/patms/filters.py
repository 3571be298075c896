"""Multiscale temporal filters, their radial spatial partners and frame tools.

Temporal filters (``a_j = a0 * 2**j``)::

    v_0(t) = a0 exp(-(a0 t)^2 / 2)                       Gaussian
    v_j(t) = a_j (1 - (a_j t)^2) exp(-(a_j t)^2 / 2)      Mexican hat, j >= 1

with transforms ``F v_0(w) = sqrt(2 pi) exp(-w^2 / (2 a0^2))`` and
``F v_j(w) = sqrt(2 pi) (w / a_j)^2 exp(-(w / a_j)^2 / 2)``.

The spatial filter ``u_j`` is the radial function whose Radon projections are
``v_j``.  In production it is only used through its spectrum, which by the
Fourier slice theorem is ``U_j(xi) = F v_j(|xi|)``.  The Abel-integral route
(:func:`radon_dual_filter_analytic`) and the radial Radon transform
(:func:`radial_radon_oracle`) are kept as independent cross-checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property, lru_cache

import numpy as np
import scipy.fft as sfft
from scipy import integrate, optimize, special

from .errors import (FilterSupportExceedsPadding, FrameDegenerateAtFrequency,
                     QuadratureNotConverged, ScaleOutOfRange)
from .grid import (Grid2D, ScalarField2D, SpectrumField2D, fft_workers,
                   from_fft_order, to_fft_order)

SQRT_2PI = math.sqrt(2 * math.pi)
TRUNCATION = 1e-12
DUAL_EPS = 1e-8
QUAD_TOL = 1e-9


@dataclass(frozen=True)
class TemporalFilterBank:
    """Gaussian low-pass ``v_0`` plus Mexican hats ``v_1 .. v_jmax``."""

    j_max: int = 2
    base_scale: float = 8.0

    def __post_init__(self):
        if self.j_max < 0:
            raise ValueError("j_max must be non-negative")
        if not self.base_scale > 0:
            raise ValueError("base_scale must be positive")

    @property
    def scales(self) -> range:
        return range(self.j_max + 1)

    def _check(self, j):
        if j not in self.scales:
            raise ScaleOutOfRange(f"scale {j} outside 0..{self.j_max}")

    def alpha(self, j: int) -> float:
        self._check(j)
        return self.base_scale * 2.0**j

    def evaluate(self, j: int, t):
        a = self.alpha(j)
        x2 = (a * np.asarray(t, dtype=float)) ** 2
        if j == 0:
            return a * np.exp(-x2 / 2)
        return a * (1 - x2) * np.exp(-x2 / 2)

    def spectrum(self, j: int, omega):
        a = self.alpha(j)
        x2 = (np.asarray(omega, dtype=float) / a) ** 2
        if j == 0:
            return SQRT_2PI * np.exp(-x2 / 2)
        return SQRT_2PI * x2 * np.exp(-x2 / 2)

    def derivative_over_t(self, j: int, t):
        """Closed form of ``v_j'(t) / t``, smooth through ``t = 0``."""
        a = self.alpha(j)
        x2 = (a * np.asarray(t, dtype=float)) ** 2
        if j == 0:
            return -(a**3) * np.exp(-x2 / 2)
        return -(a**3) * (3 - x2) * np.exp(-x2 / 2)

    def support(self, j: int, rel: float = TRUNCATION) -> float:
        """Half-width beyond which ``|v_j| < rel * max |v_j|``."""
        a = self.alpha(j)
        if j == 0:
            return math.sqrt(-2 * math.log(rel)) / a
        # |1 - x^2| exp(-x^2/2) is decreasing for x > sqrt(3)
        x = optimize.brentq(lambda x: (x * x - 1) * math.exp(-x * x / 2) - rel,
                            math.sqrt(3), 40.0, xtol=1e-12)
        return x / a


DEFAULT_BANK = TemporalFilterBank()


def temporal_filter_eval(j: int, t, bank: TemporalFilterBank = DEFAULT_BANK):
    return bank.evaluate(j, t)


def temporal_filter_spectrum(j: int, omega, bank: TemporalFilterBank = DEFAULT_BANK):
    return bank.spectrum(j, omega)


@dataclass(frozen=True)
class FrequencyBand:
    lo: float
    hi: float

    def __post_init__(self):
        if not (0 <= self.lo < self.hi):
            raise ValueError(f"invalid band [{self.lo}, {self.hi}]")


def frame_bounds(bank: TemporalFilterBank, band: FrequencyBand,
                 samples: int = 1000) -> tuple[float, float]:
    """Min and max of ``sum_j |F v_j|^2`` over a uniform sampling of ``band``."""
    if samples < 100:
        raise ValueError("frame_bounds needs at least 100 samples")
    w = np.linspace(band.lo, band.hi, samples)
    total = sum(bank.spectrum(j, w) ** 2 for j in bank.scales)
    return float(total.min()), float(total.max())


# -- Abel / Radon routes for radial functions ---------------------------------

def _quad_vec(fn, lo, hi, scale):
    res, err, info = integrate.quad_vec(fn, lo, hi, epsabs=QUAD_TOL * scale,
                                        epsrel=QUAD_TOL, norm="max", limit=2000,
                                        full_output=True)
    if not info.success:
        raise QuadratureNotConverged(f"quadrature error estimate {err:.3e} ({info.message})")
    return res


def radon_dual_filter_analytic(bank: TemporalFilterBank, j: int, d: int, r):
    """Pointwise value of the radial spatial filter ``u_j(x)``, ``|x| = r``.

    ``d = 3`` uses the closed form ``-v'(r) / (2 pi r)``.  ``d = 2`` evaluates
    the Abel-type integral ``-(1/pi) int_r^inf v'(t) / sqrt(t^2 - r^2) dt``
    after substituting ``t = sqrt(r^2 + s^2)``, which removes the endpoint
    singularity and turns it into ``-(1/pi) int_0^inf (v'/t)(sqrt(r^2+s^2)) ds``.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("radius must be non-negative")
    if d == 3:
        return -bank.derivative_over_t(j, r) / (2 * np.pi)
    if d != 2:
        raise ValueError("only d = 2 and d = 3 are supported")
    a = bank.alpha(j)
    flat = np.atleast_1d(r).ravel()
    reach = bank.support(j)

    def integrand(s):
        return bank.derivative_over_t(j, np.sqrt(flat * flat + s * s))

    val = -_quad_vec(integrand, 0.0, reach, scale=a**3 / a) / np.pi
    return val.reshape(r.shape) if r.ndim else float(val[0])


def sphere_volume(k: int) -> float:
    """Surface measure of the unit sphere ``S^k``; ``S^0`` is two points."""
    return 2 * math.pi ** ((k + 1) / 2) / special.gamma((k + 1) / 2)


def radial_radon_oracle(u_eval, d: int, t, reach: float = 10 / 8.0):
    """Radon transform of the radial function ``x -> u_eval(|x|)`` at offset ``t``.

    ``omega_{d-2} int_{|t|}^inf u(s) (s^2 - t^2)^{(d-3)/2} s ds``, truncated
    at ``s = |t| + reach``.  For ``d = 2`` the substitution
    ``s = sqrt(t^2 + sigma^2)`` gives ``2 int_0^inf u(sqrt(t^2 + sigma^2)) dsigma``.
    """
    t = abs(float(t))
    if d == 1:
        return float(u_eval(t))
    if d < 1:
        raise ValueError("dimension must be positive")
    if d == 2:
        upper = math.sqrt((t + reach) ** 2 - t * t)

        def fn(sig):
            return float(u_eval(math.sqrt(t * t + sig * sig)))

        lo, hi = 0.0, upper
        weight = 2.0
    else:
        p = (d - 3) / 2

        def fn(s):
            return float(u_eval(s)) * (s * s - t * t) ** p * s

        lo, hi = t, t + reach
        weight = sphere_volume(d - 2)
    val, err = integrate.quad(fn, lo, hi, epsabs=1e-13, epsrel=QUAD_TOL, limit=500)
    if not np.isfinite(val) or err > 1e-6 * max(abs(val), 1e-12):
        raise QuadratureNotConverged(f"radial Radon quadrature error {err:.3e}")
    return weight * val


def radial_fourier_oracle(u_eval, rho, reach: float, nodes: int = 800):
    """2D Fourier transform of the radial function ``x -> u_eval(|x|)``.

    Evaluates the Hankel integral ``2 pi int_0^reach u(r) J_0(rho r) r dr`` by
    Gauss-Legendre quadrature; ``u_eval`` must accept an array of radii.
    """
    x, w = np.polynomial.legendre.leggauss(nodes)
    r = 0.5 * reach * (x + 1.0)
    w = 0.5 * reach * w
    u = np.asarray(u_eval(r), dtype=float)
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    vals = 2 * np.pi * (special.j0(np.outer(rho, r)) * (u * r)) @ w
    return vals


# -- spectral (production) filters on a grid ----------------------------------

@dataclass(frozen=True)
class CanonicalDual:
    spectra: np.ndarray      # (J, N, N) centered, zero on degenerate nodes
    degenerate: np.ndarray   # (N, N) bool
    eps: float

    def degenerate_nodes(self, grid: Grid2D) -> np.ndarray:
        return np.argwhere(self.degenerate) - grid.nx


class SpatialFilterBank:
    """Spectra ``U_j``, canonical duals ``U_j^+`` and ``Phi = sum_j U_j^2``."""

    def __init__(self, bank: TemporalFilterBank, grid: Grid2D):
        self.bank = bank
        self.grid = grid

    @cached_property
    def spectra(self) -> np.ndarray:
        rho = self.grid.frequency_radius
        return np.stack([self.bank.spectrum(j, rho) for j in self.bank.scales])

    @cached_property
    def phi(self) -> np.ndarray:
        return np.sum(self.spectra**2, axis=0)

    @cached_property
    def dual(self) -> CanonicalDual:
        phi = self.phi
        eps = DUAL_EPS * phi.max()
        bad = phi <= eps
        safe = np.where(bad, 1.0, phi)
        spectra = np.where(bad, 0.0, self.spectra / safe)
        return CanonicalDual(spectra, bad, eps)

    @cached_property
    def _rfft_kernels(self) -> dict:
        """Kernels in rfft2 layout, keyed by ``(which, j)``."""
        rho = self.grid.rfft_frequency_radius
        spectra = np.stack([self.bank.spectrum(j, rho) for j in self.bank.scales])
        phi = np.sum(spectra**2, axis=0)
        bad = phi <= DUAL_EPS * self.phi.max()
        dual = np.where(bad, 0.0, spectra / np.where(bad, 1.0, phi))
        out = {("phi", None): phi}
        for j in self.bank.scales:
            out[("scale", j)] = spectra[j]
            out[("dual", j)] = dual[j]
        return out

    def kernel(self, which: str, j: int | None = None) -> np.ndarray:
        if which == "phi":
            j = None
        elif which in ("scale", "dual"):
            self.bank._check(j)
        else:
            raise ValueError(f"unknown kernel {which!r}")
        return self._rfft_kernels[(which, j)]

    def apply(self, values: np.ndarray, which: str, j: int | None = None) -> np.ndarray:
        """Convolve a centered array with the selected radial kernel."""
        n = self.grid.n
        w = fft_workers()
        spec = sfft.rfft2(to_fft_order(values), workers=w)
        return from_fft_order(sfft.irfft2(spec * self.kernel(which, j), s=(n, n), workers=w))


@lru_cache(maxsize=16)
def spatial_filter_bank(bank: TemporalFilterBank, grid: Grid2D) -> SpatialFilterBank:
    return SpatialFilterBank(bank, grid)


def spatial_filter_spectrum(bank: TemporalFilterBank, j: int, grid: Grid2D) -> SpectrumField2D:
    bank._check(j)
    return SpectrumField2D(grid, spatial_filter_bank(bank, grid).spectra[j])


def canonical_dual(bank: TemporalFilterBank, grid: Grid2D, strict: bool = False) -> CanonicalDual:
    """Dual spectra ``U_j / sum_k U_k^2``.

    Nodes where the denominator is at most ``1e-8 * max`` are degenerate;
    their dual is set to zero, or :class:`FrameDegenerateAtFrequency` is
    raised when ``strict``.
    """
    dual = spatial_filter_bank(bank, grid).dual
    if strict and dual.degenerate.any():
        nodes = dual.degenerate_nodes(grid)
        raise FrameDegenerateAtFrequency(
            f"frame denominator below {dual.eps:.3e} on {len(nodes)} nodes", nodes)
    return dual


def convolve_spatial(f: ScalarField2D, which: str, j: int | None = None,
                     bank: TemporalFilterBank = DEFAULT_BANK,
                     strict: bool = False) -> ScalarField2D:
    """Multiply the spectrum of ``f`` by ``U_j`` (``"scale"``), ``U_j^+``
    (``"dual"``) or ``Phi`` (``"phi"``)."""
    if which == "dual" and strict:
        canonical_dual(bank, f.grid, strict=True)
    sb = spatial_filter_bank(bank, f.grid)
    return ScalarField2D(f.grid, sb.apply(f.values, which, j))


# -- temporal convolution -----------------------------------------------------

def filter_taps(bank: TemporalFilterBank, j: int, dt: float) -> np.ndarray:
    """``dt * v_j(m dt)`` for ``|m| <= ceil(support / dt)``."""
    half = int(math.ceil(bank.support(j) / dt))
    m = np.arange(-half, half + 1)
    return dt * bank.evaluate(j, m * dt)


def convolve_temporal_array(values: np.ndarray, j: int, dt: float,
                            bank: TemporalFilterBank = DEFAULT_BANK,
                            mode: str = "even") -> np.ndarray:
    """Filter each row of ``values`` (time along the last axis) with ``v_j``.

    ``mode="even"`` continues the record to negative times by reflection,
    ``g(-t) = g(t)``, which is how pressure traces with zero initial velocity
    behave; ``mode="zero"`` treats negative times as silent.  Samples past the
    end of the record are taken as zero in both modes.
    """
    values = np.asarray(values, dtype=float)
    nt = values.shape[-1]
    taps = filter_taps(bank, j, dt)
    half = (taps.size - 1) // 2
    if half >= nt:
        raise FilterSupportExceedsPadding(
            f"filter half-support {half} samples exceeds record length {nt}")
    if mode == "even":
        ext = np.concatenate([values[..., :0:-1], values], axis=-1)
        offset = nt - 1
    elif mode == "zero":
        ext = values
        offset = 0
    else:
        raise ValueError(f"unknown mode {mode!r}")
    size = sfft.next_fast_len(ext.shape[-1] + taps.size - 1, real=True)
    w = fft_workers()
    spec = sfft.rfft(ext, n=size, axis=-1, workers=w) * sfft.rfft(taps, n=size, workers=w)
    full = sfft.irfft(spec, n=size, axis=-1, workers=w)
    start = offset + half
    return full[..., start:start + nt]


def convolve_temporal(g, j: int, bank: TemporalFilterBank = DEFAULT_BANK, mode: str = "even"):
    """Temporal filtering of :class:`WaveData` or :class:`CSData` rows."""
    out = convolve_temporal_array(g.values, j, g.time.dt, bank, mode)
    return replace(g, values=out)
