import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ccspectral import Field, Grid, GridMismatchError, forward_transform, inverse_transform, lp_norm, pair
from ccspectral.sequences import paper_counterexample_family

sizes = st.lists(st.sampled_from([4, 8, 16, 32]), min_size=1, max_size=3).map(tuple)


def test_grid_rejects_bad_sizes():
    for bad in [(2,), (6,), (12, 8), ()]:
        with pytest.raises(ValueError):
            Grid(bad)


def test_frequency_lattice_is_symmetric_band():
    g = Grid((8, 4))
    assert sorted(g.frequency_axes[0]) == list(range(-4, 4))
    assert sorted(g.frequency_axes[1]) == list(range(-2, 2))
    assert g.frequencies.shape == (8, 4, 2)


def test_constant_field_transform():
    g = Grid((16, 16))
    c = forward_transform(g.ones())
    assert c[0, 0] == pytest.approx(1.0)
    c[0, 0] = 0
    assert np.max(np.abs(c)) < 1e-15


def test_plane_wave_transform_and_inverse():
    g = Grid((16, 32))
    k = (3, -5)
    c = forward_transform(g.plane_wave(k))
    idx = (3, 32 - 5)
    assert c[idx] == pytest.approx(1.0)
    c2 = c.copy()
    c2[idx] = 0
    assert np.max(np.abs(c2)) < 1e-14
    coeffs = np.zeros(g.sizes, dtype=complex)
    coeffs[idx] = 1.0
    f = inverse_transform(g, coeffs)
    assert np.max(np.abs(f.values - g.plane_wave(k).values)) < 1e-13


def test_zero_coefficients_give_zero_field():
    g = Grid((8, 8))
    assert np.all(inverse_transform(g, np.zeros(g.sizes)).values == 0)


@given(sizes, st.integers(0, 2**32 - 1))
def test_round_trip_and_parseval(shape, seed):
    g = Grid(shape)
    f = g.random_field(np.random.default_rng(seed), complex_values=True)
    back = inverse_transform(g, forward_transform(f))
    assert np.max(np.abs(back.values - f.values)) <= 1e-12 * np.max(np.abs(f.values))
    lhs = np.sum(np.abs(forward_transform(f)) ** 2)
    rhs = np.sum(np.abs(f.values) ** 2) * g.cell_volume
    assert abs(lhs - rhs) <= 1e-12 * rhs


@given(sizes, st.integers(0, 2**32 - 1))
def test_pair_conjugate_symmetric_and_positive(shape, seed):
    rng = np.random.default_rng(seed)
    g = Grid(shape)
    f = g.random_field(rng, complex_values=True)
    h = g.random_field(rng, complex_values=True)
    assert abs(pair(f, h) - np.conj(pair(h, f))) <= 1e-13 * max(1.0, abs(pair(f, h)))
    ff = pair(f, f)
    assert ff.real > 0 and abs(ff.imag) <= 1e-14 * ff.real
    assert ff.real == pytest.approx(lp_norm(f, 2) ** 2, rel=1e-12)


@given(st.floats(0.1, 10), st.floats(-3, 3), st.sampled_from([1.0, 1.5, 2.0, 4.0, np.inf]))
def test_lp_norm_homogeneous(scale, phase, p):
    g = Grid((16, 16))
    f = g.random_field(np.random.default_rng(1), complex_values=True)
    c = scale * np.exp(1j * phase)
    assert lp_norm(f * c, p) == pytest.approx(abs(c) * lp_norm(f, p), rel=1e-12)


def test_lp_norm_simple_values():
    g = Grid((8, 8))
    for p in (1, 2, 3.5, np.inf):
        assert lp_norm(g.ones(), p) == pytest.approx(1.0)
    assert lp_norm(g.plane_wave((1, 2)), 2) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        lp_norm(g.ones(), 0.5)


def test_lp_norm_of_counterexample_member():
    # int u_r^2 = r^2 * 2 r^-2 = 2 exactly, so ||u_r||_2 = sqrt(2)
    fam = paper_counterexample_family([8])
    assert lp_norm(fam.scalar(8), 2) == pytest.approx(np.sqrt(2.0), rel=2e-2)
    assert lp_norm(fam.scalar(8), 2) == pytest.approx(np.sqrt(2.0), rel=1e-12)


def test_pair_orthogonality_and_units():
    g = Grid((16, 16))
    assert pair(g.ones(), g.ones()) == pytest.approx(1.0)
    assert abs(pair(g.plane_wave((1, 0)), g.plane_wave((0, 1)))) < 1e-15


def test_pair_rejects_grid_mismatch():
    with pytest.raises(GridMismatchError):
        pair(Grid((8,)).ones(), Grid((16,)).ones())
    with pytest.raises(GridMismatchError):
        Grid((8,)).ones() + Grid((16,)).ones()


def test_field_shape_checked():
    with pytest.raises(ValueError):
        Field(Grid((8, 8)), np.zeros((8, 4)))
