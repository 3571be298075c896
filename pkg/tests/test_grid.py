import numpy as np
import pytest

from patms import (DimensionMismatch, Grid2D, NonNegligibleImaginaryPart, ScalarField2D,
                   SpectrumField2D, crop_physical, dft2_forward, dft2_inverse, embed_pad)


def test_grid_constants():
    g = Grid2D(100)
    assert g.n == 200 and g.shape == (200, 200)
    assert g.spacing == pytest.approx(0.02)
    assert g.omega == pytest.approx(50 * np.pi)
    assert g.spacing * g.omega == pytest.approx(np.pi)
    x = g.coordinates()
    assert x[0] == pytest.approx(-2.0) and x[-1] == pytest.approx(2.0 - 0.02)
    assert x[g.nx] == 0.0


def test_physical_slice_covers_unit_square():
    g = Grid2D(10)
    x = g.coordinates()[g.physical_slice]
    assert x.size == 10
    assert x[0] == pytest.approx(-1.0) and x[-1] == pytest.approx(1.0 - g.spacing)


def test_invalid_grid():
    with pytest.raises(ValueError):
        Grid2D(0)


def test_zero_field_has_zero_spectrum():
    g = Grid2D(8)
    assert not dft2_forward(ScalarField2D.zeros(g)).values.any()
    assert not dft2_inverse(SpectrumField2D(g, np.zeros(g.shape))).values.any()


def test_round_trip(rng):
    g = Grid2D(16)
    f = ScalarField2D(g, rng.standard_normal(g.shape))
    back = dft2_inverse(dft2_forward(f))
    assert np.linalg.norm(back.values - f.values) <= 1e-12 * f.norm()


def test_gaussian_spectrum_matches_closed_form():
    # exp(-32 |x|^2) has continuous transform (pi/32) exp(-|xi|^2/128)
    g = Grid2D(64)
    f = ScalarField2D(g, np.exp(-32 * g.radius**2))
    spec = dft2_forward(f).values
    exact = np.pi / 32 * np.exp(-g.frequency_radius**2 / 128)
    interior = g.frequency_radius <= 0.5 * g.omega
    err = np.abs(spec - exact)[interior].max() / np.abs(exact).max()
    assert err <= 1e-6
    assert np.abs(spec.imag).max() < 1e-12


def test_parseval():
    # sum |F|^2 dxi^2 = (2 pi)^2 sum |f|^2 h^2
    g = Grid2D(12)
    f = ScalarField2D(g, np.random.default_rng(2).standard_normal(g.shape))
    spec = dft2_forward(f).values
    lhs = np.sum(np.abs(spec) ** 2) * g.freq_spacing**2
    rhs = (2 * np.pi) ** 2 * np.sum(f.values**2) * g.cell_area
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_shifted_impulse():
    g = Grid2D(8)
    v = np.zeros(g.shape)
    v[g.nx + 2, g.nx - 1] = 1.0
    spec = dft2_forward(ScalarField2D(g, v))
    xi = g.frequencies()
    expected = g.cell_area * np.exp(-1j * (xi[:, None] * 2 * g.spacing - xi[None, :] * g.spacing))
    assert np.allclose(spec.values, expected, atol=1e-14)
    back = dft2_inverse(spec)
    assert np.allclose(back.values, v, atol=1e-13)


def test_spectrum_at_uses_centered_indices():
    g = Grid2D(4)
    v = np.zeros(g.shape, dtype=complex)
    v[g.nx + 1, g.nx - 2] = 3.0
    assert SpectrumField2D(g, v).at(1, -2) == 3.0


def test_non_hermitian_spectrum_rejected():
    g = Grid2D(8)
    v = np.zeros(g.shape, dtype=complex)
    v[g.nx + 1, g.nx] = 1.0
    with pytest.raises(NonNegligibleImaginaryPart):
        dft2_inverse(SpectrumField2D(g, v))


def test_embed_crop():
    g = Grid2D(6)
    phys = np.arange(36.0).reshape(6, 6)
    f = embed_pad(phys, g)
    assert np.array_equal(crop_physical(f), phys)
    assert np.array_equal(crop_physical(f.values), phys)
    outside = f.values.copy()
    s = g.physical_slice
    outside[s, s] = 0
    assert not outside.any()
    assert not embed_pad(np.zeros((6, 6)), g).values.any()
    with pytest.raises(DimensionMismatch):
        embed_pad(np.zeros((5, 6)), g)


def test_field_shape_checked():
    with pytest.raises(DimensionMismatch):
        ScalarField2D(Grid2D(4), np.zeros((4, 4)))


def test_node_index():
    g = Grid2D(10)
    assert g.node_index((0.0, 0.0)) == (10, 10)
    assert g.node_index((1.0, -0.2)) == (15, 9)
    with pytest.raises(ValueError):
        g.node_index((3.0, 0.0))
