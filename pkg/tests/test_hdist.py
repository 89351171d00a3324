import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ccspectral import CompactBump, ConstantProfile, GaussianBump, Grid
from ccspectral.hdist import (DifferentialConstraint, QuadraticForm, TestBank, consistency_check,
                              estimate_hdistribution, pairing, product_bank, strong_consistency_check,
                              wavecone_membership)
from ccspectral.sequences import divcurl_pair, oscillation_family, paper_counterexample_family
from ccspectral.symbols import symbol_from_label

# continuum quadrature of int phi a^2: phi gauss((0.45, 0.55), 0.1), a compact bump((0.5, 0.5), 0.3)
PHI_A2 = 0.03471406948514403

G = Grid((256, 256))
ONE = symbol_from_label("one")


def test_pairing_single_mode():
    f = G.plane_wave((3, -1))
    assert pairing(f, f, G.ones(), ONE, (1, 1)) == pytest.approx(1.0)
    assert pairing(f, G.ones() * 2.0, G.ones(), ONE, (1, 1)) == 0


def test_pairing_of_oscillation_matches_direction_value():
    fam = oscillation_family(G, CompactBump((0.5, 0.5), 0.3), (1, 1), "exponential")
    phi = GaussianBump((0.45, 0.55), 0.1).on(G)
    u = fam.scalar(32)
    unit = np.array([1.0, 1.0]) / np.sqrt(2)
    for label in ["one", "riesz:0", "direction-indicator:0:0.3", "parabolic-xixj:0:1"]:
        psi = symbol_from_label(label)
        expected = float(psi(unit)) * PHI_A2
        assert pairing(u, u, phi, psi, (1, 1)) == pytest.approx(expected, rel=0.02)


@given(st.integers(0, 2**32 - 1), st.complex_numbers(max_magnitude=5), st.complex_numbers(max_magnitude=5))
@settings(max_examples=20)
def test_pairing_linearity(seed, a, b):
    rng = np.random.default_rng(seed)
    g = Grid((16, 16))
    u1, u2, v1, v2 = (g.random_field(rng, True) for _ in range(4))
    phi1, phi2 = g.random_field(rng), g.random_field(rng)
    p1, p2 = symbol_from_label("custom-poly:1@2.0"), symbol_from_label("custom-poly:1@1.1")
    psum = symbol_from_label("custom-poly:1@2.0;1@1.1")
    al = (1, 1)

    def close(x, y):
        return abs(x - y) <= 1e-12 * max(1.0, abs(y))

    assert close(pairing(u1 * a + u2 * b, v1, phi1, p1, al), a * pairing(u1, v1, phi1, p1, al) + b * pairing(u2, v1, phi1, p1, al))
    assert close(pairing(u1, v1 * a + v2 * b, phi1, p1, al),
                 np.conj(a) * pairing(u1, v1, phi1, p1, al) + np.conj(b) * pairing(u1, v2, phi1, p1, al))
    assert close(pairing(u1, v1, phi1 + phi2, p1, al), pairing(u1, v1, phi1, p1, al) + pairing(u1, v1, phi2, p1, al))
    assert close(pairing(u1, v1, phi1, psum, al), pairing(u1, v1, phi1, p1, al) + pairing(u1, v1, phi1, p2, al))


@given(st.integers(0, 2**32 - 1), st.sampled_from([(1, 1), (2, 2), (1, 2)]))
@settings(max_examples=20)
def test_symmetrised_realness_and_parity_kill(seed, alpha):
    rng = np.random.default_rng(seed)
    g = Grid((32, 32))
    u = g.random_field(rng)
    phi = GaussianBump(tuple(rng.uniform(0, 1, 2)), 0.15).on(g)
    scale = float(np.sum(np.abs(phi.values * u.values) ** 2) ** 0.5 * np.sum(np.abs(u.values) ** 2) ** 0.5 * g.cell_volume)
    even = pairing(u, u, phi, symbol_from_label("direction-indicator:1:0.5"), alpha)
    odd = pairing(u, u, phi, symbol_from_label("riesz:0"), alpha)
    assert abs(even.imag) <= 1e-10 * scale
    assert abs(odd.real) <= 1e-10 * scale


def _bank(grid, psis=("one", "riesz:0")):
    return TestBank.from_profiles(grid, [GaussianBump((0.45, 0.55), 0.1)], list(psis))


def test_bank_validation():
    with pytest.raises(ValueError):
        TestBank([G.ones() * 1j], [ONE], ["c"])
    with pytest.raises(ValueError):
        TestBank([G.ones(), G.ones()], [ONE], ["c", "c"])
    bank = _bank(G)
    assert bank.has_one() and bank.nonnegative()


def test_oscillation_estimate_and_l_ladder():
    fam = oscillation_family(G, CompactBump((0.5, 0.5), 0.3), (1, 1), "cosine")
    bank = _bank(G)
    est = estimate_hdistribution(fam, fam, bank, (1, 1), [8, 16, 32], l_schedule=[2, 4, None])
    e = est.entry(0, 0, "gauss", "one")
    assert e.value.real == pytest.approx(PHI_A2 / 2, rel=1e-3)
    odd = est.entry(0, 0, "gauss", "riesz:0").value
    assert abs(odd.real) <= 1e-12 and abs(odd.imag) <= 1e-6
    # the profile is bounded by 1, so every truncation level acts as the identity
    vals = [e.r_ladders[l].value for l in (2, 4, None)]
    assert vals[0] == vals[1] == vals[2]
    assert e.l_ladder.error == 0
    for entry in est.entries:
        for ladder in entry.r_ladders.values():
            assert ladder.error >= ladder.differences[-1]


def test_zero_sequence_gives_zero_table():
    zero = oscillation_family(G, 0.0, (1, 0))
    fam = oscillation_family(G, CompactBump((0.5, 0.5), 0.3), (1, 1))
    for a, b in [(zero, fam), (fam, zero)]:
        est = estimate_hdistribution(a, b, _bank(G), (1, 1), [4, 8])
        assert est.max_abs() == 0


def test_disjoint_spectra_give_zero():
    u = oscillation_family(G, 1.0, (1, 0), "exponential")
    v = oscillation_family(G, 1.0, (0, 1), "exponential")
    bank = TestBank.from_profiles(G, [ConstantProfile(1.0, 2)], ["one", "riesz:1"])
    est = estimate_hdistribution(u, v, bank, (1, 1), [4, 8, 16])
    assert est.max_abs() <= 1e-12


def test_counterexample_measures_vanish():
    fam = paper_counterexample_family([8, 16, 32])
    bank = TestBank.from_profiles(fam.grid, [GaussianBump((0.5,), 0.05)], ["one"])
    est = estimate_hdistribution(fam, fam, bank, (1,), [8, 16, 32], l_schedule=[2, 4])
    assert est.max_abs() <= 1e-10
    untruncated = estimate_hdistribution(fam, fam, bank, (1,), [8, 16, 32])
    assert untruncated.entries[0].value.real == pytest.approx(2.0, rel=1e-2)


def test_estimate_schedule_validation():
    fam = oscillation_family(G, 1.0, (1, 0))
    with pytest.raises(ValueError):
        estimate_hdistribution(fam, fam, _bank(G), (1, 1), [8, 4])
    with pytest.raises(ValueError):
        estimate_hdistribution(fam, fam, _bank(G), (1, 1), [])


def test_csv_and_json_output(tmp_path):
    fam = oscillation_family(G, CompactBump((0.5, 0.5), 0.3), (1, 1))
    est = estimate_hdistribution(fam, fam, _bank(G), (1, 1), [4, 8, 16], l_schedule=[2, None])
    paths = est.write_csv(tmp_path)
    assert [p.name for p in paths] == ["hdist_j0_m0.csv"]
    rows = list(csv.reader(open(paths[0])))
    assert rows[0] == ["r", "l", "phi", "psi", "re", "im", "err"]
    assert any(r[0] == "inf" and r[1] == "limit" for r in rows[1:])
    est.to_json(tmp_path / "t.json")
    assert (tmp_path / "t.json").stat().st_size > 0


def test_wavecone_divcurl_kernels():
    xi = np.array([1.0, 2.0])
    div = wavecone_membership(DifferentialConstraint.divergence(2), xi)
    curl = wavecone_membership(DifferentialConstraint.curl2d(), xi)
    assert div.dim == 1 and curl.dim == 1
    assert abs(div.basis[:, 0] @ xi) <= 1e-12
    assert abs(abs(curl.basis[:, 0] @ xi) - np.linalg.norm(xi)) <= 1e-12
    both = DifferentialConstraint.stack(DifferentialConstraint.divergence(2, 0, 4), DifferentialConstraint.curl2d(2, 4))
    assert wavecone_membership(both, xi).dim == 2


def test_wavecone_trivial_cases():
    none = wavecone_membership(DifferentialConstraint.none(3, 2), [1.0, 0.0])
    assert none.dim == 3 and np.allclose(none.basis, np.eye(3))
    a = np.zeros((2, 2, 2))
    a[0, 0, 0] = a[1, 1, 1] = 1.0
    full = wavecone_membership(DifferentialConstraint.first_order(a), [1.0, 1.0])
    assert full.dim == 0 and full.basis.shape[1] == 0
    assert full.contains([0.0, 0.0]) and not full.contains([1.0, 0.0])
    with pytest.raises(ValueError):
        wavecone_membership(DifferentialConstraint.divergence(2), [0.0, 0.0])


@given(st.lists(st.floats(-10, 10), min_size=3, max_size=3).filter(lambda v: np.linalg.norm(v) > 1e-3),
       st.integers(0, 1000))
@settings(max_examples=25)
def test_wavecone_basis_orthonormal(xi, seed):
    a = np.random.default_rng(seed).normal(size=(2, 4, 3))
    c = DifferentialConstraint.first_order(a)
    cone = wavecone_membership(c, xi)
    assert cone.dim >= 2
    assert np.max(np.abs(cone.basis.T @ cone.basis - np.eye(cone.dim))) <= 1e-12
    M = c.symbol_matrix(np.asarray(xi))
    assert np.linalg.norm(M @ cone.basis) <= 1e-10 * max(1.0, np.linalg.norm(M))


DIRS = [np.array([np.cos(t), np.sin(t)]) for t in np.linspace(0, np.pi, 17)[:-1]]


def test_consistency_verdicts():
    both = DifferentialConstraint.stack(DifferentialConstraint.divergence(2, 0, 4), DifferentialConstraint.curl2d(2, 4))
    assert consistency_check(QuadraticForm.divcurl(2), both, [None], DIRS).verdict == "null"
    div = DifferentialConstraint.divergence(2)
    rep = consistency_check(QuadraticForm.identity(2), div, [None], DIRS)
    assert rep.verdict == "consistent" and rep.min_eigenvalue == pytest.approx(1.0)
    rep = consistency_check(QuadraticForm(-np.eye(2)), div, [None], DIRS)
    assert rep.verdict == "inconsistent" and rep.min_eigenvalue == pytest.approx(-1.0)
    with pytest.raises(ValueError):
        consistency_check(QuadraticForm.identity(2), div, [], DIRS)


@given(st.floats(1e-3, 1e3), st.integers(0, 1000))
@settings(max_examples=25)
def test_consistency_scaling_invariance(c, seed):
    rng = np.random.default_rng(seed)
    B = rng.normal(size=(3, 3))
    Q = QuadraticForm(B + B.T)
    con = DifferentialConstraint.first_order(rng.normal(size=(1, 3, 2)))
    r1 = consistency_check(Q, con, [None], DIRS)
    r2 = consistency_check(Q.scaled(c), con, [None], DIRS)
    assert r1.verdict == r2.verdict
    np.testing.assert_array_equal(r1.argmin["xi"], r2.argmin["xi"])


def test_quadratic_form_validation():
    with pytest.raises(ValueError):
        QuadraticForm(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        QuadraticForm(np.ones((2, 3)))


def test_strong_consistency():
    zero = oscillation_family(G, 0.0, (1, 0))
    bank = _bank(G)
    est = estimate_hdistribution(zero, zero, bank, (1, 1), [4, 8])
    rep = strong_consistency_check(QuadraticForm.identity(1), est, bank)
    assert rep.verdict == "= 0 within error" and rep.values["gauss"] == 0
    fam = oscillation_family(G, CompactBump((0.5, 0.5), 0.3), (1, 2))
    est = estimate_hdistribution(fam, fam, bank, (1, 1), [4, 8, 16])
    rep = strong_consistency_check(QuadraticForm.identity(1), est, bank)
    assert rep.verdict == ">= 0 within error" and rep.values["gauss"].real > 0
    no_one = estimate_hdistribution(fam, fam, _bank(G, ["riesz:0"]), (1, 1), [4, 8])
    with pytest.raises(KeyError):
        strong_consistency_check(QuadraticForm.identity(1), no_one, bank)


def test_divcurl_table_strongly_consistent():
    g = Grid((128, 128))
    u, v = divcurl_pair(g, (1, 0), (0, 1), CompactBump((0.5, 0.5), 0.3))
    from ccspectral.sequences import stack_families
    U = stack_families("U", u, v)
    bank = TestBank.from_profiles(g, [GaussianBump((0.45, 0.55), 0.1)], ["one"])
    est = estimate_hdistribution(U, U, bank, (1, 1), [4, 8, 16, 32])
    rep = strong_consistency_check(QuadraticForm.divcurl(2), est, bank)
    assert abs(rep.values["gauss"]) <= rep.errors["gauss"] + 1e-8


def test_product_bank_for_variable_form():
    g = Grid((32, 32))
    X, Y = g.coords
    qf = g.evaluate(lambda x, y: 1 + 0.5 * np.cos(2 * np.pi * x) + 0 * y)
    Q = QuadraticForm([[qf]])
    assert not Q.is_constant
    pb = product_bank(_bank(g), Q)
    assert pb.phi_labels == ["gauss*q[0,0]"] and pb.psi_labels == ["one"]
    fam = oscillation_family(g, 1.0, (1, 0))
    est = estimate_hdistribution(fam, fam, pb, (1, 1), [2, 4, 8])
    rep = strong_consistency_check(Q, est, _bank(g))
    assert rep.values["gauss"].real > 0
    with pytest.raises(KeyError):
        strong_consistency_check(Q, estimate_hdistribution(fam, fam, _bank(g), (1, 1), [2, 4]), _bank(g))


def test_localization_divcurl_family():
    from ccspectral.hdist import localization_residual
    g = Grid((256, 256))
    u, _ = divcurl_pair(g, (1, 0), (0, 1), CompactBump((0.5, 0.5), 0.3))
    bank = TestBank.from_profiles(g, [GaussianBump((0.45, 0.55), 0.1)], ["one", "riesz:0"])
    res = localization_residual(DifferentialConstraint.divergence(2), u, u, bank, [4, 8, 16, 32])
    assert res.constraint_ok and not res.flagged
    assert res.max_relative_with_error() <= 5e-3


def test_localization_constraint_violation():
    from ccspectral.hdist import ConstraintViolation, localization_residual
    g = Grid((64, 64))
    fam = oscillation_family(g, CompactBump((0.5, 0.5), 0.3), (1, 0))
    from ccspectral.sequences import stack_families
    U = stack_families("U", fam, fam)
    # the divergence symbol is odd, so an odd psi is needed to see the defect of a real oscillation
    bank = TestBank.from_profiles(g, [GaussianBump((0.5, 0.5), 0.1)], ["one", "riesz:0"])
    div = DifferentialConstraint.divergence(2)
    with pytest.raises(ConstraintViolation):
        localization_residual(div, U, U, bank, [4, 8, 16])
    res = localization_residual(div, U, U, bank, [4, 8, 16], strict=False)
    assert res.flagged and not res.constraint_ok
    assert res.max_relative() > 0.1
