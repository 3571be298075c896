"""Landweber and ISTA on generic linear operators given as forward/adjoint callables."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import NegativeThreshold

log = logging.getLogger(__name__)


@dataclass
class SolverConfig:
    """Iteration settings shared by :func:`landweber` and :func:`ista`.

    ``step_size=None`` selects ``0.9 / L`` with ``L`` the power-iteration
    estimate of ``||K* K||``; ``lam=None`` selects ``1e-3 * ||K* y||_inf``.
    """

    step_size: float | None = None
    lam: float | None = None
    max_iters: int = 500
    rel_tol: float = 1e-6
    power_iters: int = 30
    seed: int = 0
    lam_rel: float = 1e-3

    def __post_init__(self):
        if self.step_size is not None and not self.step_size > 0:
            raise ValueError("step size must be positive")
        if self.lam is not None and self.lam < 0:
            raise ValueError("lambda must be non-negative")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass
class SolveResult:
    x: np.ndarray
    iterations: int
    converged: bool
    step_size: float
    lam: float
    residuals: np.ndarray          # ||K x^k - y|| for k = 0 .. iterations
    objective: np.ndarray | None = None
    op_norm: float | None = None
    info: dict = field(default_factory=dict)

    @property
    def max_iters_exceeded(self) -> bool:
        return not self.converged


def soft_threshold(x, theta: float):
    """``sign(x) * max(|x| - theta, 0)`` elementwise."""
    if theta < 0:
        raise NegativeThreshold(f"threshold must be >= 0, got {theta}")
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.maximum(np.abs(x) - theta, 0.0)


def estimate_operator_norm(forward, adjoint, shape, iters: int = 30, seed: int = 0) -> float:
    """Power iteration for the largest eigenvalue of ``K* K``."""
    if iters < 10:
        raise ValueError("power iteration needs at least 10 steps")
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(shape)
    x /= np.linalg.norm(x)
    est = 0.0
    for _ in range(iters):
        y = adjoint(forward(x))
        est = float(np.linalg.norm(y))
        if est == 0.0:
            return 0.0
        x = y / est
    return est


def _masked(forward, adjoint, mask):
    if mask is None:
        return forward, adjoint
    return (lambda h: forward(h * mask)), (lambda r: adjoint(r) * mask)


def _setup(forward, adjoint, y, cfg, mask, op_norm):
    b = adjoint(y)
    if mask is not None:
        b = b * mask
    if cfg.step_size is not None:
        step = cfg.step_size
    else:
        if op_norm is None:
            op_norm = estimate_operator_norm(forward, adjoint, b.shape, cfg.power_iters, cfg.seed)
        step = 0.9 / op_norm if op_norm > 0 else 1.0
    return b, step, op_norm


def _change(new, old):
    den = np.linalg.norm(new)
    diff = np.linalg.norm(new - old)
    if den == 0.0:
        return 0.0 if diff == 0.0 else np.inf
    return diff / den


def landweber(forward, adjoint, y, cfg: SolverConfig | None = None, mask=None,
              op_norm: float | None = None) -> SolveResult:
    """``h <- P(h - s K*(K h - y))`` from ``h = 0``; ``P`` zeroes nodes outside ``mask``.

    Converges to the minimum-norm least-squares solution over the masked
    nodes for ``0 < s < 2 / ||K||^2``.
    """
    cfg = cfg or SolverConfig()
    forward, adjoint = _masked(forward, adjoint, mask)
    b, step, op_norm = _setup(forward, adjoint, y, cfg, mask, op_norm)
    h = np.zeros_like(b)
    residuals = []
    converged = False
    k = 0
    r = -np.asarray(y, dtype=float)
    for k in range(1, cfg.max_iters + 1):
        residuals.append(float(np.linalg.norm(r)))
        h_new = h - step * adjoint(r)
        if mask is not None:
            h_new *= mask
        delta = _change(h_new, h)
        h = h_new
        r = forward(h) - y
        if delta < cfg.rel_tol:
            converged = True
            break
    residuals.append(float(np.linalg.norm(r)))
    if not converged:
        log.info("landweber stopped at max_iters=%d (residual %.3e)", cfg.max_iters, residuals[-1])
    return SolveResult(h, k, converged, step, 0.0, np.array(residuals), op_norm=op_norm)


def ista(forward, adjoint, y, cfg: SolverConfig | None = None, mask=None,
         op_norm: float | None = None, positive: bool = False) -> SolveResult:
    """Iterative soft thresholding for ``1/2 ||K h - y||^2 + lam ||h||_1``.

    ``h <- soft_{s lam}(h - s K*(K h - y))`` from ``h = 0``; the objective is
    non-increasing for ``s <= 1 / ||K||^2``.
    """
    cfg = cfg or SolverConfig()
    forward, adjoint = _masked(forward, adjoint, mask)
    b, step, op_norm = _setup(forward, adjoint, y, cfg, mask, op_norm)
    lam = cfg.lam if cfg.lam is not None else cfg.lam_rel * float(np.abs(b).max())
    h = np.zeros_like(b)
    r = -np.asarray(y, dtype=float)
    residuals, objective = [], []
    converged = False
    k = 0
    for k in range(1, cfg.max_iters + 1):
        rn = float(np.linalg.norm(r))
        residuals.append(rn)
        objective.append(0.5 * rn * rn + lam * float(np.abs(h).sum()))
        h_new = soft_threshold(h - step * adjoint(r), step * lam)
        if positive:
            np.maximum(h_new, 0.0, out=h_new)
        if mask is not None:
            h_new *= mask
        delta = _change(h_new, h)
        h = h_new
        r = forward(h) - y
        if delta < cfg.rel_tol:
            converged = True
            break
    rn = float(np.linalg.norm(r))
    residuals.append(rn)
    objective.append(0.5 * rn * rn + lam * float(np.abs(h).sum()))
    if not converged:
        log.info("ista stopped at max_iters=%d (objective %.3e)", cfg.max_iters, objective[-1])
    return SolveResult(h, k, converged, step, lam, np.array(residuals),
                       objective=np.array(objective), op_norm=op_norm)


def is_non_increasing(values, rel_slack: float = 1e-12) -> bool:
    """True when each entry is at most the previous one, up to roundoff."""
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        return True
    slack = rel_slack * np.maximum(np.abs(v[:-1]), 1e-300)
    return bool(np.all(v[1:] <= v[:-1] + slack))
