import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ccspectral import Grid, GridMismatchError, forward_transform, lp_norm, pair
from ccspectral.multipliers import (MultiplierOp, anisotropic_norm, apply_multiplier, apply_projected_symbol,
                                    fractional_derivative, lattice_symbol, localisation_op, smoothing_derivative_op,
                                    smoothing_op, truncate)
from ccspectral.sequences import paper_counterexample_family
from ccspectral.symbols import AnisotropicWeight, symbol_from_label

G = Grid((32, 32))
seeds = st.integers(0, 2**32 - 1)


def _random_symbol(grid, rng):
    return rng.normal(size=grid.sizes) + 1j * rng.normal(size=grid.sizes)


def test_identity_symbol():
    f = G.random_field(np.random.default_rng(0), complex_values=True)
    op = MultiplierOp.from_function(G, lambda xi: np.ones(xi.shape[:-1]))
    assert np.max(np.abs(op(f).values - f.values)) < 1e-13


def test_plane_wave_is_eigenfunction():
    k = (3, -2)
    op = MultiplierOp.from_function(G, lambda xi: 1 + xi[..., 0] ** 2 - 2j * xi[..., 1])
    out = op(G.plane_wave(k))
    expected = (1 + 9 + 4j) * G.plane_wave(k).values
    assert np.max(np.abs(out.values - expected)) < 1e-12


def test_multiplier_keeps_grid_and_rejects_mismatch():
    op = MultiplierOp.from_function(G, lambda xi: xi[..., 0] ** 2)
    assert op(G.ones()).grid == G
    with pytest.raises(GridMismatchError):
        op(Grid((16, 16)).ones())


@given(seeds, st.complex_numbers(max_magnitude=10), st.complex_numbers(max_magnitude=10))
def test_multiplier_linear(seed, a, b):
    rng = np.random.default_rng(seed)
    op = MultiplierOp(G, _random_symbol(G, rng))
    f, g = G.random_field(rng, True), G.random_field(rng, True)
    lhs = op(f * a + g * b).values
    rhs = (op(f) * a + op(g) * b).values
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * max(1.0, np.max(np.abs(rhs)))


@given(seeds)
def test_multiplier_composition(seed):
    rng = np.random.default_rng(seed)
    s1, s2 = MultiplierOp(G, _random_symbol(G, rng)), MultiplierOp(G, _random_symbol(G, rng))
    f = G.random_field(rng, True)
    lhs = s1(s2(f)).values
    rhs = s1.compose(s2)(f).values
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * np.max(np.abs(rhs))


@given(seeds)
def test_plancherel_pairing(seed):
    rng = np.random.default_rng(seed)
    s = MultiplierOp(G, _random_symbol(G, rng))
    f, g = G.random_field(rng, True), G.random_field(rng, True)
    lhs = pair(g, s(f))
    rhs = np.sum(np.conj(s.symbol_on_lattice * forward_transform(f)) * forward_transform(g))
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))


@given(seeds, st.sampled_from([(1, 1), (2, 2), (1, 2), (2, 3)]))
def test_projected_parity_gives_realness(seed, alpha):
    f = G.random_field(np.random.default_rng(seed))
    scale = lp_norm(f, 2)
    even = apply_projected_symbol(symbol_from_label("direction-indicator:0:0.4"), alpha, f)
    odd = apply_projected_symbol(symbol_from_label("riesz:1"), alpha, f)
    assert np.max(np.abs(even.values.imag)) <= 1e-10 * scale
    assert np.max(np.abs(odd.values.real)) <= 1e-10 * scale


def test_lattice_symbol_parity_on_nyquist_planes():
    g = Grid((8, 16))
    odd = lattice_symbol(g, lambda xi: xi[..., 0] * xi[..., 1] ** 2)
    even = lattice_symbol(g, lambda xi: xi[..., 0] ** 2 + xi[..., 1])
    neg = tuple((-np.arange(n)) % n for n in g.sizes)
    np.testing.assert_allclose(odd[np.ix_(*neg)], -odd, atol=1e-12)
    assert not np.allclose(even[np.ix_(*neg)], even)  # xi_1 term breaks evenness
    evenonly = lattice_symbol(g, lambda xi: xi[..., 0] ** 2 * xi[..., 1] ** 2)
    np.testing.assert_allclose(evenonly[np.ix_(*neg)], evenonly, atol=1e-12)


def test_projected_one_removes_mean():
    f = G.random_field(np.random.default_rng(3)) + 2.5
    out = apply_projected_symbol(symbol_from_label("one"), (1, 1), f)
    assert np.max(np.abs(out.values - (f.values - f.mean()))) < 1e-12


def test_projected_eigenfunction():
    k = (5, 2)
    psi = symbol_from_label("custom-poly:1@2.0;3@1.1")
    out = apply_projected_symbol(psi, (1, 2), G.plane_wave(k))
    from ccspectral.symbols import project_to_P
    val = psi(project_to_P(np.array(k, float), (1, 2)))
    assert np.max(np.abs(out.values - val * G.plane_wave(k).values)) < 1e-12


def test_smoothing_op_values():
    psi = symbol_from_label("custom-poly:1@2.0")
    op = smoothing_op(G, psi, (1, 1), 0.25, 0.75)
    sym = op.symbol_on_lattice
    assert sym[0, 0] == 0
    # on the unit circle with theta = 0 the symbol is psi itself
    assert sym[1, 0] == pytest.approx(1.0)
    assert sym[0, 1] == pytest.approx(0.0, abs=1e-15)
    op_in = smoothing_op(G, psi, (1, 1), 1.5, 3.0)
    assert op_in.symbol_on_lattice[1, 0] == 0 and op_in.symbol_on_lattice[1, 1] == 0
    assert np.all(np.isfinite(sym))


def test_smoothing_derivative_axis_limit():
    op = smoothing_derivative_op(G, symbol_from_label("one"), (1, 1), 1.0, 2.0, (1, 0))
    for t in (5, 10, 15):
        assert op.symbol_on_lattice[t, 0] == pytest.approx(2j * np.pi, rel=1e-14)
        assert op.symbol_on_lattice[-t, 0] == pytest.approx(-2j * np.pi, rel=1e-14)


def test_localisation_op_is_conjugated_derivative():
    op = localisation_op(G, symbol_from_label("one"), (1, 1), (1, 0))
    assert op.symbol_on_lattice[4, 0] == pytest.approx(-2j * np.pi)


def test_fractional_derivative_examples():
    k = (3, -2)
    out = fractional_derivative(G.plane_wave(k), 1, 1.0)
    assert np.max(np.abs(out.values - 2j * np.pi * -2 * G.plane_wave(k).values)) < 1e-11
    g1 = Grid((64,))
    s = g1.evaluate(lambda x: np.sin(2 * np.pi * x))
    out = fractional_derivative(s, 0, 2.0)
    assert np.max(np.abs(out.values + 4 * np.pi**2 * s.values)) < 1e-11
    with pytest.raises(ValueError):
        fractional_derivative(s, 0, 0)


@given(seeds, st.floats(0.1, 1.5), st.floats(0.1, 1.5))
def test_fractional_semigroup(seed, a, b):
    f = G.random_field(np.random.default_rng(seed), bandlimit=8)
    lhs = fractional_derivative(fractional_derivative(f, 0, a), 0, b).values
    rhs = fractional_derivative(f, 0, a + b).values
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * np.max(np.abs(rhs))


def test_half_derivative_twice_is_first_derivative():
    f = G.random_field(np.random.default_rng(9), bandlimit=8)
    lhs = fractional_derivative(fractional_derivative(f, 1, 0.5), 1, 0.5).values
    rhs = fractional_derivative(f, 1, 1.0).values
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * np.max(np.abs(rhs))
    assert np.max(np.abs(rhs.imag)) <= 1e-12 * np.max(np.abs(rhs))


def test_anisotropic_norm_examples():
    f = G.random_field(np.random.default_rng(1))
    for p in (1.5, 2, 4):
        assert anisotropic_norm(f, p, None) == pytest.approx(lp_norm(f, p))
        assert anisotropic_norm(f, p, lambda xi: np.ones(xi.shape[:-1])) == pytest.approx(lp_norm(f, p))
    k = (2, 3)
    w = AnisotropicWeight("hoermander", nu=1)
    expected = np.sqrt(1 + 4 * np.pi**2 * 4 + 16 * np.pi**4 * 81)
    assert anisotropic_norm(G.plane_wave(k), 2, w) == pytest.approx(expected, rel=1e-12)
    assert anisotropic_norm(G.plane_wave(k), 2, w, order=-1) == pytest.approx(1 / expected, rel=1e-12)
    with pytest.raises(ValueError):
        anisotropic_norm(f, 1.0, w)
    with pytest.raises(ValueError):
        anisotropic_norm(f, 2, AnisotropicWeight("rho", alpha=(1, 1)))  # vanishes at 0


@given(seeds)
def test_anisotropic_norm_monotone_in_weight(seed):
    f = G.random_field(np.random.default_rng(seed))
    w = AnisotropicWeight("sobolev", alpha=(1, 1))
    assert anisotropic_norm(f, 2, w) <= anisotropic_norm(f, 2, lambda xi: 2 * w(xi))
    assert anisotropic_norm(f, 2, None) <= anisotropic_norm(f, 2, w)


def test_truncation_examples():
    assert np.all(truncate(G.ones() * 3, 2).values == 0)
    assert np.all(truncate(G.ones() * 1.5, 2).values == 1.5)
    fam = paper_counterexample_family([8, 16])
    for r in (8, 16):
        for l in (2, 4, 7.9):
            assert np.all(truncate(fam.scalar(r), l).values == 0)
    with pytest.raises(ValueError):
        truncate(G.ones(), 0)


@given(seeds, st.floats(0.1, 3))
def test_truncation_properties(seed, l):
    f = G.random_field(np.random.default_rng(seed), True)
    t = truncate(f, l)
    assert np.all(np.abs(t.values) < l)
    assert np.array_equal(truncate(t, l).values, t.values)
    keep = np.abs(f.values) < l
    assert np.array_equal(t.values[keep], f.values[keep])


@given(seeds)
def test_truncation_residual_monotone(seed):
    f = G.random_field(np.random.default_rng(seed))
    levels = np.linspace(0.1, f.max_abs() * 1.01, 12)
    res = [lp_norm(f - truncate(f, l), 1) for l in levels]
    assert all(b <= a for a, b in zip(res, res[1:]))
    assert res[-1] == 0
