import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ccspectral import CompactBump, GaussianBump, Grid
from ccspectral.compcomp import (ExperimentReport, Tolerances, even_symbol_integral, nonlinearity_from_label,
                                 run_compcomp, run_optimal_variant, run_parabolic_application)
from ccspectral.hdist import DifferentialConstraint, QuadraticForm, TestBank
from ccspectral.sequences import SequenceFamily, divcurl_pair, oscillation_family, stack_families
from ccspectral.symbols import MultiOrder, symbol_from_label

# continuum quadrature of int phi a^2: phi gauss((0.45, 0.55), 0.1), a compact bump((0.5, 0.5), 0.3)
PHI_A2 = 0.03471406948514403

G = Grid((256, 256))
R = [8, 16, 32, 64]


def _bank(grid=G):
    return TestBank.from_profiles(grid, [GaussianBump((0.45, 0.55), 0.1)], ["one"])


def _osc(amplitude=1.0, grid=G):
    return oscillation_family(grid, CompactBump((0.5, 0.5), 0.3, amplitude), (1, 1), "cosine", p=np.inf)


def _shifted(fam, c):
    """Same oscillation around the constant state ``c``."""
    g = fam.grid
    lim = g.ones() * c
    return SequenceFamily(f"{fam.label}+{c}", g, lambda r: (fam.scalar(r) + c,), (lim,), fam.lp_exponent,
                          fam.lp_bound + abs(c), np.array([[0.0, 1.0]] * g.dim))


@pytest.fixture(scope="module")
def oscillation_report():
    fam = _osc()
    return run_compcomp(fam, fam, QuadraticForm.identity(1), DifferentialConstraint.none(1, 2), _bank(),
                        (1, 1), R)


def test_oscillation_defect_matches_quadrature(oscillation_report):
    d = oscillation_report.defects["gauss"]
    assert d["defect"].real == pytest.approx(PHI_A2 / 2, rel=1e-6)
    assert d["relative_error"] <= 5e-3
    assert oscillation_report.verdict == "confirms-inequality"
    assert oscillation_report.checklist["constraint-exact"] == "n/a"
    assert oscillation_report.checklist["localization"] == "n/a"


def test_bilinearity_split(oscillation_report):
    assert oscillation_report.defects["gauss"]["bilinearity_gap"] <= 1e-12


def test_zero_sequences_confirm_equality():
    zero = oscillation_family(G, 0.0, (1, 0))
    rep = run_compcomp(zero, zero, QuadraticForm.identity(1), DifferentialConstraint.none(1, 2), _bank(), (1, 1), R)
    assert rep.verdict == "confirms-equality"
    assert rep.defects["gauss"]["defect"] == 0


def test_recentring_invariance():
    fam = _osc()
    base = run_compcomp(fam, fam, QuadraticForm.identity(1), DifferentialConstraint.none(1, 2), _bank(), (1, 1), R)
    sh = _shifted(fam, 0.7)
    moved = run_compcomp(sh, sh, QuadraticForm.identity(1), DifferentialConstraint.none(1, 2), _bank(), (1, 1), R)
    a, b = base.defects["gauss"], moved.defects["gauss"]
    assert b["defect"] == pytest.approx(a["defect"], abs=1e-10)
    assert b["recentred"] == pytest.approx(a["recentred"], abs=1e-10)
    assert b["bilinearity_gap"] <= 1e-12
    assert moved.verdict == base.verdict


def test_error_bar_above_tolerance_is_inconclusive():
    fam = _osc()
    tight = Tolerances(defect=1e-300)
    rep = run_compcomp(fam, fam, QuadraticForm.identity(1), DifferentialConstraint.none(1, 2), _bank(), (1, 1),
                       [4, 8, 16], tolerances=tight)
    assert rep.verdict == "inconclusive"


def test_divcurl_experiment_confirms_equality():
    g = Grid((128, 128))
    u, v = divcurl_pair(g, (1, 0), (0, 1), CompactBump((0.5, 0.5), 0.3))
    U = stack_families("U", u, v)
    con = DifferentialConstraint.stack(DifferentialConstraint.divergence(2, 0, 4), DifferentialConstraint.curl2d(2, 4))
    bank = TestBank.from_profiles(g, [GaussianBump((0.45, 0.55), 0.1)], ["one", "riesz:0"])
    rep = run_compcomp(U, U, QuadraticForm.divcurl(2), con, bank, (1, 1), [4, 8, 16, 32])
    assert rep.verdict == "confirms-equality"
    assert rep.checklist["constraint-exact"] == "pass"
    assert rep.checklist["localization"] == "pass"
    assert rep.consistency["verdict"] == "null"
    assert rep.strong_consistency["equality"]


def test_report_is_deterministic(oscillation_report):
    fam = _osc()
    again = run_compcomp(fam, fam, QuadraticForm.identity(1), DifferentialConstraint.none(1, 2), _bank(), (1, 1), R)
    assert again.to_json() == oscillation_report.to_json()
    json.loads(again.to_json())


def test_report_validation_and_write(tmp_path, oscillation_report):
    with pytest.raises(ValueError):
        ExperimentReport("x", "compcomp", {}, "maybe", {})
    with pytest.raises(ValueError):
        ExperimentReport("x", "compcomp", {}, "inconclusive", {"a": "unknown"})
    run1 = oscillation_report.write(tmp_path, "stamp")
    run2 = oscillation_report.write(tmp_path, "stamp")
    assert run1.name == "stamp" and run2.name == "stamp-1"
    assert json.loads((run1 / "report.json").read_text())["verdict"] == "confirms-inequality"
    csvs = sorted(p.name for p in (run1 / "ladders").iterdir())
    assert "omega.csv" in csvs and "mu_j0_m0.csv" in csvs


def test_checklist_is_tristate(oscillation_report):
    assert set(oscillation_report.checklist.values()) <= {"pass", "fail", "n/a"}


def test_optimal_variant_bounded_oscillation():
    fam = _osc(amplitude=1.0)
    rep = run_optimal_variant(fam, fam, QuadraticForm.identity(1), DifferentialConstraint.none(1, 2), _bank(),
                              (1, 1), [8, 16, 32], [2, 4, 8])
    assert rep.checklist["domination"] == "pass"
    assert rep.checklist["truncation-ladder"] == "pass"
    assert rep.checklist["truncation-limit"] == "pass"
    assert rep.verdict == "confirms-inequality"
    # truncation above sup|v| is the identity, so every level gives the same mu_l
    mu = rep.details["mu_l"]["entries"][0]["r_ladders"]
    assert mu["2"]["value"] == mu["4"]["value"] == mu["8"]["value"]
    assert rep.details["monitored_truncation"]["gauss"] == [0.0, 0.0, 0.0]
    for per_l in rep.details["five_terms"]["gauss"].values():
        assert per_l["sum_gap"] <= 1e-12


def test_optimal_variant_truncation_bites_below_sup():
    fam = _osc(amplitude=4.0)
    rep = run_optimal_variant(fam, fam, QuadraticForm.identity(1), DifferentialConstraint.none(1, 2), _bank(),
                              (1, 1), [8, 16, 32], [1, 2, 8])
    mon = rep.details["monitored_truncation"]["gauss"]
    assert mon[0] > mon[1] > 0 and mon[2] == 0
    assert rep.checklist["truncation-ladder"] == "pass"


@settings(max_examples=10)
@given(st.floats(-1, 1), st.floats(0.2, 0.5))
def test_even_symbol_integral_vanishes_for_real_fields(shift, width):
    g = Grid((64, 32))
    rng = np.random.default_rng(7)
    f = g.random_field(rng, bandlimit=12) * GaussianBump((0.5, 0.5), width).on(g) + shift
    alpha = MultiOrder.parabolic(1)
    for label in ["one", "parabolic-xixj:1:1", "direction-indicator:1:0.3"]:
        val, scale = even_symbol_integral(symbol_from_label(label), alpha, f)
        assert abs(val) <= 1e-12 * scale


def test_nonlinearities():
    u = np.linspace(-2, 2, 9)
    assert np.allclose(nonlinearity_from_label("linear:2.5")(u), 2.5 * u)
    assert np.allclose(nonlinearity_from_label("cubic")(u), u + u**3)
    assert np.allclose(nonlinearity_from_label("decreasing")(u), -u)
    for bad in ["quartic", "cubic:1", "linear:x"]:
        with pytest.raises(ValueError):
            nonlinearity_from_label(bad)


def test_parabolic_application_small_grid():
    g = Grid((1024, 128))
    bank = TestBank.from_profiles(g, [GaussianBump((0.5, 0.5), 0.1)], ["one", "parabolic-xixj:1:1"])
    rep = run_parabolic_application(g, [[1.0]], CompactBump((0.5, 0.5), 0.3), bank,
                                    ["one", "parabolic-xixj:1:1"], [8, 16, 32], g="cubic", u_mean=0.5)
    assert rep.checklist["constraint-exact"] == "pass"
    assert rep.checklist["even-symbol-vanishing"] == "pass"
    assert rep.checklist["monotone-g"] == "pass"
    assert rep.details["I_r_worst"] <= 1e-10
    assert rep.verdict in ("confirms-equality", "inconclusive")
    with pytest.raises(ValueError, match="even"):
        run_parabolic_application(g, [[1.0]], CompactBump((0.5, 0.5), 0.3), bank, ["riesz:1"], [8, 16])


def test_decreasing_nonlinearity_flagged():
    g = Grid((1024, 128))
    bank = TestBank.from_profiles(g, [GaussianBump((0.5, 0.5), 0.1)], ["one"])
    rep = run_parabolic_application(g, [[1.0]], CompactBump((0.5, 0.5), 0.3), bank, ["one"], [8, 16, 32],
                                    g="decreasing")
    assert rep.checklist["monotone-g"] == "fail"
