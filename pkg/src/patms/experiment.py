"""Reference experiment: multiscale versus plain l1 on compressed measurements.

Data are simulated on a grid refined by ``refine`` (same detectors, same time
samples) and inverted on the coarse grid, so the inversion does not reuse the
exact operator that produced the data.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from .grid import Grid2D
from .phantom import BUNDLED_PHANTOM, PhantomSpec, make_phantom
from .recon import reconstruct_baseline_l1, reconstruct_multiscale
from .sensing import CSData, MeasurementMatrix, gaussian_matrix, subsampling_matrix
from .wave import DetectorRing, TimeGrid, WaveData, WaveOperator


def simulate_data(spec: PhantomSpec, grid: Grid2D, ring: DetectorRing, time_grid: TimeGrid,
                  refine: int = 2) -> WaveData:
    """Pressure traces of ``spec`` rendered and propagated on a finer grid."""
    if refine < 1:
        raise ValueError("refine must be >= 1")
    fine = Grid2D(grid.nx * refine)
    f = make_phantom(spec, fine)
    return WaveData(ring, time_grid, WaveOperator(fine, ring, time_grid).forward(f.values))


@dataclass
class ExperimentRow:
    matrix: str
    seed: int | None
    multiscale_error: float
    baseline_error: float
    multiscale_seconds: float
    baseline_seconds: float


def run_case(M: MeasurementMatrix, data: WaveData, grid: Grid2D, truth) -> tuple:
    y = CSData(data.time, M.apply(data.values))
    t0 = time.perf_counter()
    ms = reconstruct_multiscale(y, M, grid, truth=truth)
    t1 = time.perf_counter()
    l1 = reconstruct_baseline_l1(y, M, grid, truth=truth)
    t2 = time.perf_counter()
    return ms, l1, t1 - t0, t2 - t1


def run_experiment(nx: int = 100, n: int = 300, factor: int = 4, seeds=(0, 1, 2),
                   spec: PhantomSpec = BUNDLED_PHANTOM, refine: int = 2,
                   report=None) -> list[ExperimentRow]:
    """Subsampling plus one Gaussian matrix per seed, each against the baseline."""
    grid = Grid2D(nx)
    ring = DetectorRing(n)
    time_grid = TimeGrid.for_grid(grid)
    truth = make_phantom(spec, grid)
    data = simulate_data(spec, grid, ring, time_grid, refine)
    cases = [("subsample", None, subsampling_matrix(n, factor))]
    cases += [("gaussian", s, gaussian_matrix(n // factor, n, s)) for s in seeds]
    rows = []
    for name, seed, M in cases:
        ms, l1, t_ms, t_l1 = run_case(M, data, grid, truth)
        row = ExperimentRow(name, seed, ms.rel_error, l1.rel_error, t_ms, t_l1)
        if report is not None:
            report(row)
        rows.append(row)
    return rows
