import numpy as np
import pytest

from patms import (CSData, DetectorRing, Grid2D, PhantomSpec, SolverConfig, TimeGrid,
                   convolve_spatial, identity_matrix, make_phantom, reconstruct_baseline_l1,
                   reconstruct_landweber, reconstruct_multiscale, subsampling_matrix)
from patms.experiment import simulate_data
from patms.recon import CSPATOperator, deconvolve


@pytest.fixture(scope="module")
def full_data_run():
    grid = Grid2D(64)
    ring, time = DetectorRing(300), TimeGrid.for_grid(grid)
    spec = PhantomSpec("smooth-bump")
    truth = make_phantom(spec, grid)
    data = simulate_data(spec, grid, ring, time, refine=2)
    M = identity_matrix(300)
    return truth, reconstruct_multiscale(CSData(time, data.values), M, grid, truth=truth)


def test_zero_data():
    grid = Grid2D(16)
    time = TimeGrid(40, grid.spacing)
    M = subsampling_matrix(40, 2)
    y = CSData(time, np.zeros((20, 40)))
    for fn in (reconstruct_multiscale, reconstruct_baseline_l1, reconstruct_landweber):
        assert not fn(y, M, grid).f_hat.values.any()


def test_full_data_multiscale(full_data_run):
    truth, res = full_data_run
    assert res.method == "multiscale"
    assert res.rel_error <= 0.1
    assert len(res.factors.fields) == 3 and res.factors.iterations[0] >= 1


def test_fused_factors_match_phi_convolution(full_data_run):
    truth, res = full_data_run
    phi_f = convolve_spatial(truth, "phi").values
    assert np.linalg.norm(phi_f - res.f_conv.values) <= 0.05 * np.linalg.norm(phi_f)


def test_baseline_small_lambda_approaches_landweber():
    grid = Grid2D(12)
    ring, time = DetectorRing(60), TimeGrid(60, grid.spacing)
    truth = make_phantom(PhantomSpec("smooth-bump"), grid)
    data = simulate_data(PhantomSpec("smooth-bump"), grid, ring, time, refine=1)
    M = identity_matrix(60)
    y = CSData(time, data.values)
    cfg = SolverConfig(max_iters=300, rel_tol=0.0)
    lw = reconstruct_landweber(y, M, grid, cfg, truth=truth)
    l1 = reconstruct_baseline_l1(y, M, grid, SolverConfig(max_iters=300, rel_tol=0.0, lam=1e-12), truth=truth)
    assert np.linalg.norm(l1.f_hat.values - lw.f_hat.values) <= 1e-8 * np.linalg.norm(lw.f_hat.values)


def test_config_count_checked():
    grid = Grid2D(8)
    time = TimeGrid(40, grid.spacing)
    with pytest.raises(ValueError):
        reconstruct_multiscale(CSData(time, np.zeros((4, 40))), subsampling_matrix(8, 2), grid,
                               cfg_per_scale=[None])


def test_deconvolution_recovers_in_band_field():
    grid = Grid2D(32)
    rng = np.random.default_rng(0)
    keep = grid.rfft_frequency_radius <= 30
    f = np.fft.fftshift(np.fft.irfft2(np.fft.rfft2(rng.standard_normal(grid.shape)) * keep, s=grid.shape))
    from patms import ScalarField2D
    conv = convolve_spatial(ScalarField2D(grid, f), "phi")
    res = deconvolve(conv, cfg=SolverConfig(lam=0.0, max_iters=3000, rel_tol=1e-13))
    assert np.linalg.norm(res.x - f) <= 1e-3 * np.linalg.norm(f)
    assert res.step_size == pytest.approx(0.9 / (2 * np.pi) ** 2, rel=1e-9)


def test_operator_norm_cached():
    grid = Grid2D(8)
    op = CSPATOperator(grid, subsampling_matrix(16, 2), TimeGrid(20, grid.spacing))
    a = op.norm_estimate()
    assert op.norm_estimate() == a > 0
