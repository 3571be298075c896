"""Property checks runnable from the command line (``patms selftest``)."""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass

import numpy as np

from .filters import (DEFAULT_BANK, FrequencyBand, frame_bounds, radial_fourier_oracle,
                      radial_radon_oracle, radon_dual_filter_analytic, spatial_filter_bank,
                      convolve_temporal_array)
from .grid import Grid2D
from .phantom import BUNDLED_PHANTOM, PhantomSpec, make_phantom
from .sensing import gaussian_matrix, subsampling_matrix
from .solvers import SolverConfig, estimate_operator_norm, is_non_increasing, ista, landweber
from .wave import DetectorRing, TimeGrid, WaveOperator, dense_forward_matrix, wave_operator

SUITES = ("reciprocity", "frames", "adjoint", "appendix", "solvers")

CERTIFIED_BAND = FrequencyBand(0.0, 32 * math.sqrt(2))
TEST_TIMES = (0.0, 0.05, 0.1)


@dataclass
class Check:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def _check(name, value, limit, fmt="{:.3e}", below=True) -> Check:
    ok = bool(value <= limit) if below else bool(value > limit)
    rel = "<=" if below else ">"
    return Check(name, ok, f"{fmt.format(value)} (need {rel} {limit:g})")


def _rel(a, b) -> float:
    den = np.linalg.norm(b)
    return float(np.linalg.norm(a - b) / den) if den else float(np.linalg.norm(a))


# -- individual measurements, also used by the test-suite ----------------------

def reciprocity_discrepancies(nx: int = 64, n: int = 300, nt: int = 200,
                              bank=DEFAULT_BANK, mode: str = "even") -> list[float]:
    """``|| v_j *_t W f - W (u_j *_x f) || / || v_j *_t W f ||`` per scale, smooth bump ``f``.

    The temporal filter needs the traces up to one filter half-width past the
    compared window, so the record used for the left side is that much longer
    and both sides are compared on the first ``nt`` samples.
    """
    grid = Grid2D(nx)
    time_grid = TimeGrid.for_grid(grid, nt)
    guard = max(int(math.ceil(bank.support(j) / time_grid.dt)) for j in bank.scales)
    longer = TimeGrid(nt + guard, time_grid.dt)
    op = wave_operator(grid, DetectorRing(n), time_grid)
    sb = spatial_filter_bank(bank, grid)
    f = make_phantom(PhantomSpec("smooth-bump"), grid).values
    data = WaveOperator(grid, DetectorRing(n), longer).forward(f)
    out = []
    for j in bank.scales:
        lhs = convolve_temporal_array(data, j, time_grid.dt, bank, mode)[:, :nt]
        rhs = op.forward(sb.apply(f, "scale", j))
        out.append(_rel(rhs, lhs))
    return out


def adjoint_mismatches(nx: int, pairs: int, n: int = 300, nt: int = 200, seed: int = 0) -> list[float]:
    """``|<Wf, g> - <f, W* g>| / (||Wf|| ||g||)`` for seeded random pairs."""
    grid = Grid2D(nx)
    op = wave_operator(grid, DetectorRing(n), TimeGrid.for_grid(grid, nt))
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(pairs):
        f = rng.standard_normal(grid.shape)
        g = rng.standard_normal((n, nt))
        wf = op.forward(f)
        lhs = np.vdot(wf, g)
        rhs = np.vdot(f, op.adjoint(g))
        out.append(float(abs(lhs - rhs) / (np.linalg.norm(wf) * np.linalg.norm(g))))
    return out


def small_problem(nx: int = 8, n: int = 16, nt: int = 32):
    grid = Grid2D(nx)
    ring = DetectorRing(n)
    time_grid = TimeGrid(nt, grid.spacing)
    return grid, ring, time_grid, WaveOperator(grid, ring, time_grid)


def dense_transpose_error(nx: int = 8, seed: int = 1) -> float:
    grid, ring, time_grid, op = small_problem(nx)
    mat = dense_forward_matrix(grid, ring, time_grid)
    g = np.random.default_rng(seed).standard_normal((ring.n, time_grid.nt))
    return _rel(op.adjoint(g).ravel(), mat.T @ g.ravel())


def landweber_pinv_error(seed: int = 0) -> float:
    grid, ring, time_grid, op = small_problem()
    mat = dense_forward_matrix(grid, ring, time_grid)
    inside = (grid.radius <= 0.9).ravel()
    mask = inside.reshape(grid.shape).astype(float)
    rng = np.random.default_rng(seed)
    f0 = np.zeros(grid.n**2)
    f0[inside] = rng.standard_normal(inside.sum())
    y = (mat @ f0).reshape(ring.n, time_grid.nt)
    oracle = np.zeros(grid.n**2)
    oracle[inside] = np.linalg.pinv(mat[:, inside]) @ y.ravel()
    res = landweber(op.forward, op.adjoint, y, SolverConfig(max_iters=5000, rel_tol=1e-14), mask=mask)
    return _rel(res.x.ravel(), oracle)


def norm_estimate_error() -> float:
    grid, ring, time_grid, op = small_problem()
    mat = dense_forward_matrix(grid, ring, time_grid)
    inside = (grid.radius <= 0.9).ravel()
    mask = inside.reshape(grid.shape).astype(float)
    true = np.linalg.norm(mat[:, inside], 2) ** 2
    est = estimate_operator_norm(lambda h: op.forward(h * mask), lambda r: op.adjoint(r) * mask,
                                 grid.shape, 30, 0)
    return abs(est - true) / true


def monotonicity_runs(nx: int = 64, iters: int = 40):
    """Auto-step Landweber and ISTA on subsampled data; returns both trajectories."""
    grid = Grid2D(nx)
    time_grid = TimeGrid.for_grid(grid)
    M = subsampling_matrix(300, 4)
    op = wave_operator(grid, DetectorRing(300), time_grid)
    f = make_phantom(BUNDLED_PHANTOM, grid).values
    y = M.apply(op.forward(f))
    mask = (grid.radius <= 0.9).astype(float)

    def fwd(h):
        return M.apply(op.forward(h))

    def adj(r):
        return op.adjoint(M.apply_adjoint(r))

    norm = estimate_operator_norm(lambda h: fwd(h * mask), lambda r: adj(r) * mask, grid.shape, 30, 0)
    cfg = SolverConfig(max_iters=iters, rel_tol=0.0)
    lw = landweber(fwd, adj, y, cfg, mask=mask, op_norm=norm)
    st = ista(fwd, adj, y, cfg, mask=mask, op_norm=norm)
    return lw.residuals, st.objective


def dual_identity_error(nx: int = 64, bank=DEFAULT_BANK) -> float:
    sb = spatial_filter_bank(bank, Grid2D(nx))
    dual = sb.dual
    total = np.sum(dual.spectra * sb.spectra, axis=0)
    return float(np.abs(total - 1.0)[~dual.degenerate].max())


def reproduction_error(nx: int = 64, bank=DEFAULT_BANK, seed: int = 0) -> float:
    """Dual synthesis after analysis for a random field band-limited to the certified band."""
    grid = Grid2D(nx)
    sb = spatial_filter_bank(bank, grid)
    rng = np.random.default_rng(seed)
    keep = grid.rfft_frequency_radius <= CERTIFIED_BAND.hi
    spec = np.fft.rfft2(rng.standard_normal(grid.shape)) * keep
    f = np.fft.irfft2(spec, s=grid.shape)
    f = np.fft.fftshift(f)
    rec = sum(sb.apply(sb.apply(f, "scale", j), "dual", j) for j in bank.scales)
    return _rel(rec, f)


def fourier_slice_error(j: int, bank=DEFAULT_BANK, count: int = 50) -> float:
    """Spectral ``U_j`` against the Hankel transform of the Abel-integral ``u_j``."""
    rho = np.linspace(0.0, CERTIFIED_BAND.hi, count)
    reach = bank.support(j)
    oracle = radial_fourier_oracle(lambda r: radon_dual_filter_analytic(bank, j, 2, r), rho, reach)
    spectral = bank.spectrum(j, rho)
    return float(np.abs(oracle - spectral).max() / np.abs(spectral).max())


def appendix_errors(d: int, bank=DEFAULT_BANK) -> list[float]:
    """Relative misfit of ``R(R# v_j)`` against ``v_j`` at the test times."""
    out = []
    for j in bank.scales:
        peak = abs(bank.evaluate(j, 0.0))
        for t in TEST_TIMES:
            val = radial_radon_oracle(lambda r: radon_dual_filter_analytic(bank, j, d, r), d, t,
                                      reach=bank.support(j))
            ref = bank.evaluate(j, t)
            out.append(float(abs(val - ref) / max(abs(ref), 1e-12 * peak)))
    return out


# -- suites ---------------------------------------------------------------------

def suite_reciprocity(nx: int) -> list[Check]:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        errs = reciprocity_discrepancies(nx)
    return [_check(f"reciprocity scale {j} (nx={nx})", e, 0.05) for j, e in enumerate(errs)]


def suite_adjoint(nx: int) -> list[Check]:
    checks = [_check(f"wave adjoint inner products (nx={nx})", max(adjoint_mismatches(nx, 3)), 1e-10),
              _check("adjoint equals dense transpose (nx=8)", dense_transpose_error(), 1e-12)]
    grid = Grid2D(nx)
    rng = np.random.default_rng(3)
    x = rng.standard_normal((300, 50))
    for M in (subsampling_matrix(300, 4), gaussian_matrix(75, 300, 0)):
        z = rng.standard_normal((M.m, 50))
        lhs, rhs = np.vdot(M.apply(x), z), np.vdot(x, M.apply_adjoint(z))
        checks.append(_check(f"{M.kind} matrix adjoint", abs(lhs - rhs) / abs(lhs), 1e-12))
    del grid
    return checks


def suite_frames(nx: int) -> list[Check]:
    lo, hi = frame_bounds(DEFAULT_BANK, CERTIFIED_BAND)
    return [_check("lower frame bound on [0, 32 sqrt 2]", lo, 1e-3, below=False),
            _check("sum of dual times filter equals one", dual_identity_error(nx), 1e-12),
            _check("band-limited reproduction", reproduction_error(nx), 1e-3)]


def suite_appendix(nx: int) -> list[Check]:
    checks = [_check("radial Radon of 3D dual filter", max(appendix_errors(3)), 1e-6),
              _check("radial Radon of 2D dual filter", max(appendix_errors(2)), 1e-4)]
    for j in DEFAULT_BANK.scales:
        checks.append(_check(f"Fourier slice scale {j}", fourier_slice_error(j), 1e-4))
    return checks


def suite_solvers(nx: int) -> list[Check]:
    res, obj = monotonicity_runs(nx)
    return [Check(f"Landweber residual non-increasing (nx={nx})", is_non_increasing(res),
                  f"{len(res)} iterates"),
            Check(f"ISTA objective non-increasing (nx={nx})", is_non_increasing(obj),
                  f"{len(obj)} iterates"),
            _check("Landweber vs dense pseudoinverse (nx=8)", landweber_pinv_error(), 1e-4),
            _check("power iteration vs dense SVD (nx=8)", norm_estimate_error(), 0.05)]


_RUNNERS = {"reciprocity": suite_reciprocity, "frames": suite_frames, "adjoint": suite_adjoint,
            "appendix": suite_appendix, "solvers": suite_solvers}


def run_suites(names, nx: int = 64, out=print) -> bool:
    ok = True
    for name in names:
        t0 = time.perf_counter()
        for chk in _RUNNERS[name](nx):
            out(chk.line())
            ok &= chk.passed
        out(f"-- {name} finished in {time.perf_counter() - t0:.1f} s")
    return ok
