import numpy as np
import pytest

from patms import (BUNDLED_PHANTOM, DimensionMismatch, Feature, FeatureOutsideSupport, Grid2D,
                   PhantomSpec, ScalarField2D, ZeroTruth, make_phantom, relative_l2_error,
                   render_image, sparsity_fraction)
from patms.phantom import parse_pgm


def test_empty_feature_list():
    assert not make_phantom(PhantomSpec("disks", features=()), Grid2D(16)).values.any()


def test_disk_area():
    g = Grid2D(100)
    f = make_phantom(PhantomSpec("disks", features=[Feature((0, 0), 0.2, 1.0)]), g)
    area = f.values.sum() * g.cell_area
    assert area == pytest.approx(np.pi * 0.04, rel=0.02)


def test_deterministic_and_seeded():
    g = Grid2D(50)
    a = make_phantom(PhantomSpec("disks", seed=7), g).values
    b = make_phantom(PhantomSpec("disks", seed=7), g).values
    c = make_phantom(PhantomSpec("disks", seed=8), g).values
    assert np.array_equal(a, b) and not np.array_equal(a, c)


@pytest.mark.parametrize("kind", ["disks", "smooth-bump", "delta-grid"])
def test_kinds_supported_and_bounded(kind):
    g = Grid2D(64)
    f = make_phantom(PhantomSpec(kind, seed=3), g).values
    assert f.min() >= 0 and f.max() <= 1 and f.max() > 0
    assert not f[g.radius > 0.9].any()


def test_bundled_layout():
    feats = BUNDLED_PHANTOM.resolved_features()
    assert feats[0] == Feature((0.0, 0.0), 0.45, 0.6)
    medium = feats[1:4]
    dots = feats[4:]
    assert len(dots) == 12 and all(d.radius == 0.02 and d.amplitude == 1.0 for d in dots)
    assert all(m.reach <= 0.45 for m in medium + dots)


def test_feature_outside_support():
    with pytest.raises(FeatureOutsideSupport):
        make_phantom(PhantomSpec("disks", features=[Feature((0.8, 0.0), 0.2)]), Grid2D(20))
    with pytest.raises(ValueError):
        Feature((0, 0), 0.1, 1.5)
    with pytest.raises(ValueError):
        PhantomSpec("stars")


def test_smooth_bump_profile():
    g = Grid2D(40)
    f = make_phantom(PhantomSpec("smooth-bump", features=[Feature((0, 0), 0.5, 1.0)]), g)
    c = g.nx
    assert f.values[c, c] == pytest.approx(1.0)
    rho2 = (g.spacing * 5 / 0.5) ** 2
    assert f.values[c + 5, c] == pytest.approx(np.exp(1 - 1 / (1 - rho2)))
    assert not f.values[g.radius >= 0.5].any()


def test_relative_error():
    g = Grid2D(10)
    t = make_phantom(PhantomSpec("disks", features=[Feature((0, 0), 0.3)]), g)
    assert relative_l2_error(t, t) == 0.0
    assert relative_l2_error(ScalarField2D.zeros(g), t) == pytest.approx(1.0)
    assert relative_l2_error(ScalarField2D(g, 2 * t.values), t) == pytest.approx(1.0)
    r = ScalarField2D(g, t.values + np.random.default_rng(0).standard_normal(g.shape))
    neg = lambda f: ScalarField2D(g, -f.values)  # noqa: E731
    assert relative_l2_error(neg(r), neg(t)) == relative_l2_error(r, t)
    with pytest.raises(ZeroTruth):
        relative_l2_error(t, ScalarField2D.zeros(g))
    with pytest.raises(DimensionMismatch):
        relative_l2_error(ScalarField2D.zeros(Grid2D(12)), t)


def test_error_ignores_padding():
    g = Grid2D(10)
    t = make_phantom(PhantomSpec("disks", features=[Feature((0, 0), 0.3)]), g)
    r = t.values.copy()
    r[0, 0] = 100.0
    assert relative_l2_error(ScalarField2D(g, r), t) == 0.0


def test_render_header_and_levels():
    g = Grid2D(4)
    v = np.zeros(g.shape)
    v[3, 3], v[4, 5] = -1.0, 2.0
    f = ScalarField2D(g, v)
    data = render_image(f, "minmax")
    assert data.startswith(b"P5\n4 4\n65535\n")
    img = parse_pgm(data)
    assert img.shape == (4, 4)
    assert img.min() == 0 and img.max() == 65535
    raw = render_image(v, "minmax")
    assert raw.startswith(b"P5\n8 8\n65535\n")
    assert len(raw) == len(b"P5\n8 8\n65535\n") + 2 * 64
    # big-endian: the brightest pixel is stored as ff ff, black as 00 00
    assert parse_pgm(raw)[4, 5] == 65535 and parse_pgm(raw)[3, 3] == 0


def test_render_degenerate_normalizations():
    zero = np.zeros((3, 5))
    assert not parse_pgm(render_image(zero, "minmax")).any()
    assert np.all(parse_pgm(render_image(zero, "symmetric")) == 32768)
    assert np.all(parse_pgm(render_image(np.full((2, 2), 0.7), "symmetric")) == 65535)
    signed = np.array([[-2.0, 0.0, 2.0]])
    assert parse_pgm(render_image(signed, "symmetric")).tolist() == [[0, 32768, 65535]]
    with pytest.raises(ValueError):
        render_image(zero, "log")


def test_render_deterministic():
    f = make_phantom(BUNDLED_PHANTOM, Grid2D(32))
    assert render_image(f, "symmetric") == render_image(f, "symmetric")


def test_sparsity_fraction():
    v = np.zeros((8, 8))
    v[0, 0] = 1.0
    assert sparsity_fraction(v, crop=False) == pytest.approx(63 / 64)
    assert sparsity_fraction(np.zeros((4, 4)), crop=False) == 1.0
