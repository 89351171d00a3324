"""Acceptance suite: ten numbered checks with fixed seeds, tolerances and time budgets.

Each ``criterion_N`` returns a :class:`CriterionResult` whose ``table`` holds
the numbers the decision was based on. :func:`run_suite` runs a selection,
prints one line per criterion and returns the results; ``verify`` in the CLI
and ``tests/test_acceptance.py`` both go through it.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import symbols as _symbols
from .compcomp import even_symbol_integral, even_symbol_lattice
from .config import load_config, run_experiment
from .extrapolation import richardson
from .grid import Field, Grid, forward_transform, lp_norm, pair
from .hdist import (DifferentialConstraint, TestBank, consistency_check, estimate_hdistribution,
                    localization_residual, wavecone_membership)
from .multipliers import MultiplierOp, derivative_symbol, localisation_op, projected_multiplier, truncate
from .profiles import CompactBump, GaussianBump
from .sequences import (SequenceFamily, oscillation_family, paper_counterexample_family, parabolic_pair,
                        stack_families)
from .symbols import AnisotropicWeight, MultiOrder, symbol_from_label

__all__ = ["CriterionResult", "CRITERIA", "run_suite", "numeric_tables", "bundled_config"]

PARABOLIC_GRID = (4096, 256)
PARABOLIC_R = (8, 16, 32, 64)
EVEN_BANK = ("one", "parabolic-xixj:1:1", "direction-indicator:0:0.5", "direction-indicator:1:0.5",
             "custom-poly:1@2.0", "custom-poly:1@1.1", "custom-poly:1@0.4;0.3@2.2", "custom-poly:2@0.2;-1@2.0")
EVEN_LABELS = ("one", "direction-indicator:0:0.5", "direction-indicator:1:0.3", "custom-poly:1@2.0",
               "custom-poly:1@1.1;0.5@0.2", "parabolic-xixj:0:1", "parabolic-xixj:1:1")
ODD_LABELS = ("riesz:0", "riesz:1", "parabolic-xi0", "custom-poly:1@1.0;-2@0.3", "custom-poly:1@3.0;0.5@1.2")


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    summary: str
    runtime: float
    budget: float
    table: dict = field(default_factory=dict)

    def line(self) -> str:
        state = "PASS" if self.passed else "FAIL"
        return (f"[{state}] {self.number:2d} {self.name:<30s} {self.summary}"
                f"  ({self.runtime:.2f}s / {self.budget:g}s)")


def bundled_config(name: str):
    """Path-like handle to a configuration shipped with the package."""
    return resources.files("ccspectral") / "configs" / f"{name}.json"


def _timed(number, name, budget, fn):
    t0 = time.perf_counter()
    ok, summary, table = fn()
    dt = time.perf_counter() - t0
    within = dt <= budget
    if not within:
        summary += "; over time budget"
    return CriterionResult(number, name, bool(ok and within), summary, dt, budget, table)


def _rel(a, b) -> float:
    scale = max(float(np.max(np.abs(b))), 1e-300)
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b)))) / scale


# --- 1: counterexample constant ---------------------------------------------------

def criterion_1() -> CriterionResult:
    def body():
        rs = [8, 16, 32, 64]
        fam = paper_counterexample_family(rs, x0=0.5)
        x0 = fam.params["x0"]
        prof = GaussianBump((x0,), 0.05, label="phi")
        bank = TestBank.from_profiles(fam.grid, [prof], ["one"])
        phi = bank.phis[0]
        vals = [pair(fam.scalar(r) * fam.scalar(r), phi) for r in rs]
        ex = richardson(rs, vals)
        target = 2.0 * float(prof(np.array(x0)))
        rel = abs(ex.value - target) / target
        mu = estimate_hdistribution(fam, fam, bank, (1,), rs, l_schedule=(1, 2, 4, 8), truncate_target="member")
        mu_max = 0.0
        for e in mu.entries:
            for ladder in e.r_ladders.values():
                mu_max = max(mu_max, abs(ladder.value), *(abs(v) for v in ladder.raw))
        ok = rel <= 1e-2 and mu_max <= 1e-10
        table = {"n": fam.grid.sizes[0], "x0": x0, "raw": vals, "limit": ex.value, "error": ex.error,
                 "target": target, "relative": rel, "mu_l_max": mu_max}
        return ok, f"limit {ex.value.real:.6f} vs 2phi(x0) {target:.6f} (rel {rel:.1e}), max|mu_l| {mu_max:.1e}", table

    return _timed(1, "counterexample-constant", 10.0, body)


# --- 2: projection invariant ------------------------------------------------------------

def criterion_2(n: int = 10_000, seed: int = 2) -> CriterionResult:
    def body():
        rng = np.random.default_rng(seed)
        worst, sign_bad, table = 0.0, 0, {}
        for alpha in ((1, 1), (1, 2), (2, 3)):
            xi = rng.integers(-4096, 4097, size=(n, 2)).astype(float)
            xi = xi[np.any(xi != 0, axis=1)]
            pi = _symbols.project_to_P(xi, MultiOrder(alpha))
            s = np.sum(np.abs(pi) ** (2 * np.asarray(alpha, dtype=float)), axis=-1)
            err = float(np.max(np.abs(s - 1.0)))
            # pi_P is a positive rescaling of each coordinate: signs must be preserved
            bad = int(np.sum(np.sign(pi) != np.sign(xi)))
            worst = max(worst, err)
            sign_bad += bad
            table[str(alpha)] = {"max_deviation": err, "sign_mismatches": bad, "samples": len(xi)}
        ok = worst <= 1e-12 and sign_bad == 0
        return ok, f"max |sum|pi_k|^(2a_k) - 1| {worst:.1e}, sign mismatches {sign_bad}", table

    return _timed(2, "projection-invariant", 1.0, body)


# --- 3: parity and realness --------------------------------------------------------------

def criterion_3(trials: int = 100, seed: int = 3) -> CriterionResult:
    def body():
        rng = np.random.default_rng(seed)
        sizes = [(16, 16), (32, 32), (16, 64), (64, 8), (64, 64), (8, 8)]
        worst_even, worst_odd = 0.0, 0.0
        for t in range(trials):
            grid = Grid(sizes[t % len(sizes)])
            a = float(rng.choice([1.0, 2.0, 3.0]))
            alpha = (a, a)
            f = Field(grid, rng.standard_normal(grid.sizes))
            ev = symbol_from_label(EVEN_LABELS[rng.integers(len(EVEN_LABELS))])
            od = symbol_from_label(ODD_LABELS[rng.integers(len(ODD_LABELS))])
            ge = projected_multiplier(grid, ev, alpha)(f).values
            go = projected_multiplier(grid, od, alpha)(f).values
            worst_even = max(worst_even, float(np.max(np.abs(ge.imag))) / max(float(np.max(np.abs(ge))), 1e-300))
            worst_odd = max(worst_odd, float(np.max(np.abs(go.real))) / max(float(np.max(np.abs(go))), 1e-300))
        ok = worst_even <= 1e-10 and worst_odd <= 1e-10
        table = {"even_imag_residual": worst_even, "odd_real_residual": worst_odd, "trials": trials}
        return ok, f"even: max rel imag {worst_even:.1e}; odd: max rel real {worst_odd:.1e}", table

    return _timed(3, "parity-realness", 5.0, body)


# --- 4: Plancherel and multiplier algebra ---------------------------------------------

def _random_multiplier(grid: Grid, rng) -> MultiplierOp:
    d = grid.dim
    choice = int(rng.integers(4))
    alpha = tuple(float(x) for x in rng.choice([1.0, 2.0], size=d))
    if choice == 0:
        labels = ("one", "riesz:0", "parabolic-xi0", "custom-poly:1@2;0.5@1") if d == 1 else EVEN_LABELS + ODD_LABELS
        return projected_multiplier(grid, symbol_from_label(labels[rng.integers(len(labels))]), alpha)
    if choice == 1:
        orders = tuple(int(x) for x in rng.integers(0, 3, size=d))
        return MultiplierOp.from_function(grid, lambda xi: derivative_symbol(xi, orders), label="D")
    if choice == 2:
        sym = symbol_from_label("riesz:0" if rng.random() < 0.5 else "one")
        orders = tuple(int(x) for x in rng.integers(0, 2, size=d))
        return localisation_op(grid, sym, alpha, orders, (0.5, 1.0))
    c = rng.standard_normal(grid.sizes) + 1j * rng.standard_normal(grid.sizes)
    return MultiplierOp(grid, c, complex(c[grid.zero_mode_index()]), "random")


def criterion_4(trials: int = 100, seed: int = 4) -> CriterionResult:
    def body():
        rng = np.random.default_rng(seed)
        sizes = [(64,), (256,), (32, 32), (64, 16), (128, 128), (256, 256), (16, 8, 8)]
        worst = {"plancherel": 0.0, "composition": 0.0, "commutation": 0.0, "adjoint": 0.0}
        for t in range(trials):
            grid = Grid(sizes[t % len(sizes)])
            f = Field(grid, rng.standard_normal(grid.sizes) + 1j * rng.standard_normal(grid.sizes))
            g = Field(grid, rng.standard_normal(grid.sizes) + 1j * rng.standard_normal(grid.sizes))
            A, B = _random_multiplier(grid, rng), _random_multiplier(grid, rng)
            lhs = pair(f, g)
            rhs = complex(np.vdot(forward_transform(g), forward_transform(f)))
            worst["plancherel"] = max(worst["plancherel"], abs(lhs - rhs) / (lp_norm(f, 2) * lp_norm(g, 2)))
            ab = A(B(f)).values
            worst["composition"] = max(worst["composition"], _rel(A.compose(B)(f).values, ab))
            worst["commutation"] = max(worst["commutation"], _rel(B(A(f)).values, ab))
            x, y = pair(A(f), g), pair(f, A.conj()(g))
            worst["adjoint"] = max(worst["adjoint"], abs(x - y) / max(lp_norm(A(f), 2) * lp_norm(g, 2), 1e-300))
        top = max(worst.values())
        ok = top <= 1e-12
        return ok, "max rel " + ", ".join(f"{k} {v:.1e}" for k, v in worst.items()), worst

    return _timed(4, "plancherel-multiplier-algebra", 10.0, body)


# --- 5: div-curl -----------------------------------------------------------------------

def criterion_5() -> CriterionResult:
    def body():
        cfg = load_config(bundled_config("divcurl"))
        rep = run_experiment(cfg)
        dfs = rep.defects
        worst = max(d["relative"] + d["relative_error"] for d in dfs.values())
        cons = rep.consistency
        # hand-computed wave cone in R^2: div and curl each leave a line, together a plane in R^4
        div = DifferentialConstraint.divergence(2, 0, 2)
        curl = DifferentialConstraint.curl2d(0, 2)
        both = DifferentialConstraint.stack(DifferentialConstraint.divergence(2, 0, 4),
                                            DifferentialConstraint.curl2d(2, 4))
        rng = np.random.default_rng(5)
        dirs = [np.array([1.0, 0.0]), np.array([0.0, 1.0])] + list(rng.standard_normal((32, 2)))
        dims = {"div": sorted({wavecone_membership(div, x).dim for x in dirs}),
                "curl": sorted({wavecone_membership(curl, x).dim for x in dirs}),
                "div+curl": sorted({wavecone_membership(both, x).dim for x in dirs})}
        expected = {"div": [1], "curl": [1], "div+curl": [2]}
        ok = (worst <= 5e-3 and cons["verdict"] == "null" and cons["kernel_dims"] == [2] and dims == expected
              and max(rep.constraint_residuals.values()) <= 1e-10)
        table = {"defects": {k: {"defect": v["defect"], "error": v["error"], "relative": v["relative"],
                                 "relative_error": v["relative_error"]} for k, v in dfs.items()},
                 "consistency": cons, "wave_cone_dims": dims, "verdict": rep.verdict,
                 "constraint_residuals": rep.constraint_residuals}
        return ok, (f"defect rel+err {worst:.1e}, consistency {cons['verdict']}, kernel dims {dims}, "
                    f"verdict {rep.verdict}"), table

    return _timed(5, "div-curl", 60.0, body)


# --- 6: localisation residual --------------------------------------------------------

def _parabolic_setup():
    grid = Grid(PARABOLIC_GRID)
    fam = parabolic_pair(grid, 1.0, CompactBump((0.5, 0.5), 0.3), tau=0.25, k=(1,))
    bank = TestBank.from_profiles(grid, [GaussianBump((0.5, 0.5), 0.1, label="phi")],
                                  ["one", "parabolic-xixj:1:1", "parabolic-xi0"])
    return grid, fam, bank


def criterion_6() -> CriterionResult:
    def body():
        grid, fam, bank = _parabolic_setup()
        con = DifferentialConstraint.parabolic([[1.0]], 1)
        w = AnisotropicWeight("hoermander", nu=1)
        tol = 5e-3
        res = localization_residual(con, fam, fam, bank, PARABOLIC_R, weight=w, tolerance=tol)
        residual = max(res.constraint_residuals.values())
        rel = res.max_relative_with_error()
        # negative control: (0, oscillation) ignores the parabolic relation
        osc = oscillation_family(grid, CompactBump((0.5, 0.5), 0.3), (8, 1))
        zero = SequenceFamily("zero", grid, lambda r: (grid.zeros(),), (grid.zeros(),), np.inf, 0.0,
                              np.array([[0.0, 1.0], [0.0, 1.0]]))
        neg = stack_families("control", zero, osc)
        ctrl = localization_residual(con, neg, neg, bank, PARABOLIC_R, weight=w, tolerance=tol, strict=False)
        ctrl_rel = ctrl.max_relative()
        ok = residual <= 1e-10 and rel <= tol and ctrl_rel >= 10 * tol and ctrl.flagged
        table = {"constraint_residuals": res.constraint_residuals, "max_relative_with_error": rel,
                 "entries": [(e.m, e.psi, e.relative, e.relative_error) for e in res.entries],
                 "control_max_relative": ctrl_rel, "control_flagged": ctrl.flagged}
        return ok, (f"constraint {residual:.1e}, residual rel+err {rel:.1e}; control {ctrl_rel:.1e} "
                    f"({'flagged' if ctrl.flagged else 'not flagged'})"), table

    return _timed(6, "localization-residual", 60.0, body)


# --- 7: even-symbol vanishing -----------------------------------------------------------

def criterion_7() -> CriterionResult:
    def body():
        grid, fam, bank = _parabolic_setup()
        alpha = MultiOrder.parabolic(1)
        phi = bank.phis[0]
        worst, table = 0.0, {}
        for label in EVEN_BANK:
            psi = symbol_from_label(label)
            sym = even_symbol_lattice(grid, psi, alpha)
            row = {}
            for r in PARABOLIC_R:
                val, scale = even_symbol_integral(psi, alpha, phi * fam.recentred(r)[0], sym=sym)
                rel = abs(val) / scale if scale > 0 else 0.0
                row[f"{r:g}"] = rel
                worst = max(worst, rel)
            table[label] = row
        ok = worst <= 1e-10 and len(EVEN_BANK) == 8
        return ok, f"max |I_r|/scale {worst:.1e} over {len(EVEN_BANK)} even symbols", table

    return _timed(7, "even-symbol-vanishing", 30.0, body)


# --- 8: oscillation H-distribution oracle ----------------------------------------------

def criterion_8() -> CriterionResult:
    def body():
        grid = Grid((512, 512))
        prof = CompactBump((0.5, 0.5), 0.3)
        phi = GaussianBump((0.45, 0.55), 0.1, label="phi")
        psis = ["one", "riesz:0", "direction-indicator:1:0.5", "custom-poly:1@2.0;0.5@1.1"]
        bank = TestBank.from_profiles(grid, [phi], psis)
        a = prof.on(grid)
        base = pair(bank.phis[0] * a, a).real
        worst, table = 0.0, {}
        for k in ((1, 0), (1, 1), (2, 1)):
            fam = oscillation_family(grid, prof, k, "exponential")
            est = estimate_hdistribution(fam, fam, bank, (1, 1), [8, 16, 32, 64])
            unit = np.asarray(k, dtype=float) / np.linalg.norm(k)
            for e, psi in zip(est.entries, bank.psis):
                expected = float(psi(unit)) * base
                rel = abs(e.value - expected) / abs(base)
                worst = max(worst, rel)
                table[f"{k}|{psi.label}"] = {"estimate": e.value, "expected": expected, "relative": rel,
                                             "error": e.error}
        ok = worst <= 2e-2
        return ok, f"max rel deviation {worst:.1e} (3 directions x 4 symbols)", table

    return _timed(8, "oscillation-hdistribution", 30.0, body)


# --- 9: truncation laws ------------------------------------------------------------------

def criterion_9(trials: int = 100, seed: int = 9) -> CriterionResult:
    def body():
        rng = np.random.default_rng(seed)
        levels = [0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 5.0]
        bound_ok = idem_ok = mono_ok = True
        for t in range(trials):
            grid = Grid(tuple(int(2 ** rng.integers(2, 7)) for _ in range(2)))
            vals = rng.standard_normal(grid.sizes) * rng.exponential(2.0)
            if t % 2:
                vals = vals + 1j * rng.standard_normal(grid.sizes)
            f = Field(grid, vals)
            gaps = []
            for l in levels:
                tf = truncate(f, l)
                bound_ok &= bool(np.all(np.abs(tf.values) < l))
                idem_ok &= bool(np.array_equal(truncate(tf, l).values, tf.values))
                gaps.append(lp_norm(f - tf, 1))
            mono_ok &= all(b <= a for a, b in zip(gaps, gaps[1:]))
        ok = bound_ok and idem_ok and mono_ok
        table = {"bound": bound_ok, "idempotent": idem_ok, "l1_nonincreasing": mono_ok, "trials": trials}
        return ok, f"|T_l f| < l {bound_ok}, idempotent {idem_ok}, L1 gap nonincreasing {mono_ok}", table

    return _timed(9, "truncation-laws", 2.0, body)


# --- 10: determinism ----------------------------------------------------------------------

def numeric_tables(results) -> str:
    """Canonical JSON of the numeric tables (timings excluded)."""
    from .compcomp import _jsonable
    return json.dumps({str(r.number): _jsonable(r.table) for r in results}, sort_keys=True)


def criterion_10(previous=None) -> CriterionResult:
    """Recompute criteria 1-9 and compare their tables byte for byte with ``previous`` (or a first run)."""
    def body():
        first = previous if previous is not None else [c() for c in CRITERIA[:9]]
        second = [c() for c in CRITERIA[:9]]
        a, b = numeric_tables(first), numeric_tables(second)
        same = a == b
        differing = [r.number for r, s in zip(first, second) if numeric_tables([r]) != numeric_tables([s])]
        table = {"bytes": len(a), "identical": same, "differing": differing}
        return same, f"{len(a)} bytes of tables, identical {same}", table

    return _timed(10, "determinism", 600.0, body)


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7,
            criterion_8, criterion_9, criterion_10)
NAMES = ("counterexample-constant", "projection-invariant", "parity-realness", "plancherel-multiplier-algebra",
         "div-curl", "localization-residual", "even-symbol-vanishing", "oscillation-hdistribution",
         "truncation-laws", "determinism")


def select(filter_text: str | None) -> list[int]:
    """Criterion numbers whose number or name contains ``filter_text``."""
    if not filter_text:
        return list(range(1, 11))
    keys = [k.strip() for k in filter_text.split(",") if k.strip()]
    return [i for i, name in enumerate(NAMES, start=1) if any(k == str(i) or k in name for k in keys)]


def run_suite(numbers=None, echo=print) -> list[CriterionResult]:
    """Run the selected criteria in order; criterion 10 reuses the tables of 1-9 when they ran."""
    numbers = list(range(1, 11)) if numbers is None else sorted(set(numbers))
    results = []
    for n in numbers:
        if n == 10:
            earlier = [r for r in results if r.number <= 9]
            res = criterion_10(earlier if len(earlier) == 9 else None)
        else:
            res = CRITERIA[n - 1]()
        results.append(res)
        if echo:
            echo(res.line())
    return results
