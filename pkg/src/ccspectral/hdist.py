"""H-distribution estimates, localisation residuals and wave-cone consistency.

An H-distribution entry is the limit of ``int phi u_jr conj(A_psi v_mr)`` as
``r -> infinity`` (recentred members, optionally truncated at level ``l``).
Each entry keeps its ladders so the extrapolation can be audited.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg

from .extrapolation import Extrapolation, last_value, richardson
from .grid import Field, Grid, GridMismatchError, inverse_transform, lp_norm, pair
from .multipliers import (MultiplierOp, anisotropic_norm, derivative_symbol, lattice_symbol, localisation_op,
                          projected_multiplier, truncate)
from .sequences import SequenceFamily
from .symbols import AnisotropicWeight, MultiOrder, Symbol, symbol_from_label

__all__ = [
    "TestBank",
    "ConstraintTerm",
    "DifferentialConstraint",
    "ConstraintViolation",
    "QuadraticForm",
    "HDistEntry",
    "HDistEstimate",
    "pairing",
    "estimate_hdistribution",
    "LocalizationEntry",
    "LocalizationResult",
    "localization_residual",
    "WaveCone",
    "wavecone_membership",
    "ConsistencyReport",
    "consistency_check",
    "StrongConsistencyReport",
    "strong_consistency_check",
    "product_bank",
]


def _order(alpha) -> MultiOrder:
    return alpha if isinstance(alpha, MultiOrder) else MultiOrder(tuple(alpha))


# --- test functions -----------------------------------------------------------

@dataclass
class TestBank:
    """Real spatial test functions ``phi`` and frequency symbols ``psi``."""

    __test__ = False  # not a pytest class

    phis: list
    psis: list
    phi_labels: list

    def __post_init__(self):
        if len(self.phis) != len(self.phi_labels):
            raise ValueError("one label per phi")
        if len(set(self.phi_labels)) != len(self.phi_labels):
            raise ValueError("phi labels must be unique")
        if len({p.label for p in self.psis}) != len(self.psis):
            raise ValueError("psi labels must be unique")
        for f, lab in zip(self.phis, self.phi_labels):
            if not f.is_real():
                raise ValueError(f"test function {lab!r} is not real")
        self.phis = [f.real if np.iscomplexobj(f.values) else f for f in self.phis]

    @classmethod
    def from_profiles(cls, grid: Grid, profiles, psis) -> "TestBank":
        psis = [symbol_from_label(p) if isinstance(p, str) else p for p in psis]
        return cls([p.on(grid) for p in profiles], psis, [p.label for p in profiles])

    @property
    def psi_labels(self) -> list[str]:
        return [p.label for p in self.psis]

    @property
    def grid(self) -> Grid:
        return self.phis[0].grid

    def phi(self, label: str) -> Field:
        return self.phis[self.phi_labels.index(label)]

    def nonnegative(self) -> bool:
        return all(float(f.values.min()) >= 0 for f in self.phis)

    def has_one(self) -> bool:
        return "one" in self.psi_labels


def product_bank(bank: TestBank, Q: "QuadraticForm") -> TestBank:
    """Bank of ``phi * q_jm`` for a variable form, labelled ``phi*q[j,m]``; psi restricted to ``one``."""
    phis, labels = [], []
    for f, lab in zip(bank.phis, bank.phi_labels):
        for j in range(Q.n):
            for m in range(Q.n):
                phis.append(f * Q.entry_field(j, m, f.grid))
                labels.append(f"{lab}*q[{j},{m}]")
    return TestBank(phis, [symbol_from_label("one")], labels)


# --- constraints --------------------------------------------------------------

class ConstraintViolation(ValueError):
    """The families do not satisfy the constraint they were paired with."""


@dataclass(frozen=True)
class ConstraintTerm:
    """``coeff * d^orders`` acting on component ``comp`` inside equation ``eq``.

    ``coeff`` is a real number or a real :class:`Field`; it sits inside the
    derivative (divergence form).
    """

    eq: int
    comp: int
    orders: tuple
    coeff: object = 1.0

    def coeff_at(self, index=None) -> float:
        if isinstance(self.coeff, Field):
            if index is None:
                raise ValueError("variable coefficient needs a sample index")
            return float(np.real(self.coeff.values[tuple(index)]))
        return float(self.coeff)

    def coeff_field(self, grid: Grid):
        if isinstance(self.coeff, Field):
            if self.coeff.grid != grid:
                raise GridMismatchError("coefficient field lives on another grid")
            return self.coeff
        return float(self.coeff)


@dataclass
class DifferentialConstraint:
    """System ``sum_{j,beta} d^beta (a_{s j beta} u_j) = 0`` for ``s = 1..M``."""

    n_equations: int
    n_components: int
    alpha: MultiOrder
    terms: list = field(default_factory=list)
    label: str = "constraint"

    def __post_init__(self):
        self.alpha = _order(self.alpha)
        for t in self.terms:
            if not (0 <= t.eq < self.n_equations and 0 <= t.comp < self.n_components):
                raise ValueError(f"term {t} out of range")
            if len(t.orders) != self.alpha.dim:
                raise ValueError("term orders must match the dimension of alpha")

    @property
    def dim(self) -> int:
        return self.alpha.dim

    def equation_terms(self, s: int) -> list:
        return [t for t in self.terms if t.eq == s]

    # constructors
    @classmethod
    def none(cls, n_components: int, d: int) -> "DifferentialConstraint":
        return cls(0, n_components, MultiOrder.isotropic(d), [], "none")

    @classmethod
    def first_order(cls, coeffs, label: str = "first-order") -> "DifferentialConstraint":
        """Constant coefficients ``a[s, j, k]``: ``sum_{j,k} a_sjk d_k u_j``."""
        a = np.asarray(coeffs, dtype=float)
        if a.ndim != 3:
            raise ValueError("first-order coefficients need shape (M, N, d)")
        M, N, d = a.shape
        terms = []
        for s, j, k in zip(*np.nonzero(a)):
            orders = [0] * d
            orders[k] = 1
            terms.append(ConstraintTerm(int(s), int(j), tuple(orders), float(a[s, j, k])))
        return cls(M, N, MultiOrder.isotropic(d), terms, label)

    @classmethod
    def divergence(cls, d: int, offset: int = 0, n_components: int | None = None) -> "DifferentialConstraint":
        n = d + offset if n_components is None else n_components
        a = np.zeros((1, n, d))
        for k in range(d):
            a[0, offset + k, k] = 1.0
        return cls.first_order(a, "div")

    @classmethod
    def curl2d(cls, offset: int = 0, n_components: int | None = None) -> "DifferentialConstraint":
        n = 2 + offset if n_components is None else n_components
        a = np.zeros((1, n, 2))
        a[0, offset + 1, 0] = 1.0
        a[0, offset, 1] = -1.0
        return cls.first_order(a, "curl")

    @classmethod
    def parabolic(cls, a_matrix, d_space: int) -> "DifferentialConstraint":
        """``d_t u_1 - sum_kl d_k d_l (a_kl u_2) = 0`` on the ``(t, x)`` torus."""
        terms = [ConstraintTerm(0, 0, (1,) + (0,) * d_space, 1.0)]
        for k in range(d_space):
            for l in range(d_space):
                akl = a_matrix[k][l]
                if not isinstance(akl, Field):
                    akl = float(akl)
                    if akl == 0:
                        continue
                orders = [0] * (d_space + 1)
                orders[k + 1] += 1
                orders[l + 1] += 1
                coeff = -akl if not isinstance(akl, Field) else Field(akl.grid, -np.real(akl.values))
                terms.append(ConstraintTerm(0, 1, tuple(orders), coeff))
        return cls(1, 2, MultiOrder.parabolic(d_space), terms, "parabolic")

    @classmethod
    def stack(cls, *parts: "DifferentialConstraint", label: str | None = None) -> "DifferentialConstraint":
        n = {p.n_components for p in parts}
        alphas = {p.alpha for p in parts}
        if len(n) != 1 or len(alphas) != 1:
            raise ValueError("stacked constraints need equal component counts and orders")
        terms, offset = [], 0
        for p in parts:
            terms += [ConstraintTerm(t.eq + offset, t.comp, t.orders, t.coeff) for t in p.terms]
            offset += p.n_equations
        return cls(offset, n.pop(), alphas.pop(), terms, label or "+".join(p.label for p in parts))

    # evaluation
    def symbol_matrix(self, xi, index=None, two_pi: bool = False) -> np.ndarray:
        """``M x N`` matrix ``sum coeff prod (i xi_k)^beta_k`` (``2 pi i`` if ``two_pi``)."""
        xi = np.asarray(xi, dtype=float)
        out = np.zeros((self.n_equations, self.n_components), dtype=complex)
        scale = 1.0 if two_pi else 1.0 / (2 * np.pi)
        for t in self.terms:
            out[t.eq, t.comp] += t.coeff_at(index) * complex(derivative_symbol(scale * xi, t.orders))
        return out

    def residual_fields(self, components) -> list[Field]:
        """``G_s = sum d^beta (coeff u_j)`` with lattice derivative symbols, one field per equation."""
        if len(components) != self.n_components:
            raise ValueError(f"constraint acts on {self.n_components} components, got {len(components)}")
        grid = components[0].grid
        out = [np.zeros(grid.sizes, dtype=complex) for _ in range(self.n_equations)]
        symbols = {}
        for t in self.terms:
            if t.orders not in symbols:
                symbols[t.orders] = lattice_symbol(grid, lambda xi, o=t.orders: derivative_symbol(xi, o))
            w = components[t.comp] * t.coeff_field(grid)
            out[t.eq] += symbols[t.orders] * w.spectrum
        return [inverse_transform(grid, g) for g in out]

    def residual_norm(self, components, weight=None, p: float = 2.0) -> float:
        """Largest negative-order weighted norm of the equations, relative to the component scale."""
        if self.n_equations == 0:
            return 0.0
        if weight is None:
            weight = AnisotropicWeight("sobolev", alpha=self.alpha.orders)
        scale = max(max(lp_norm(u, p) for u in components), 1e-300)
        return max(anisotropic_norm(g, p, weight, order=-1.0) for g in self.residual_fields(components)) / scale

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "n_equations": self.n_equations,
            "n_components": self.n_components,
            "alpha": list(self.alpha.orders),
            "terms": [{"eq": t.eq, "comp": t.comp, "orders": list(t.orders),
                       "coeff": "field" if isinstance(t.coeff, Field) else t.coeff} for t in self.terms],
        }


# --- quadratic forms ------------------------------------------------------------

@dataclass
class QuadraticForm:
    """``q(x; u, v) = sum_jm Q_jm(x) u_j conj(v_m)`` with symmetric ``Q``.

    ``Q`` is an ``N x N`` array or a nested list whose entries are floats or
    real fields.
    """

    Q: object

    def __post_init__(self):
        if isinstance(self.Q, np.ndarray) or not any(isinstance(e, Field) for row in self.Q for e in row):
            self.Q = np.asarray(self.Q, dtype=float)
            if self.Q.ndim != 2 or self.Q.shape[0] != self.Q.shape[1]:
                raise ValueError("Q must be square")
            if not np.array_equal(self.Q, self.Q.T):
                raise ValueError("Q must be symmetric")
        else:
            n = len(self.Q)
            for j in range(n):
                for m in range(n):
                    a, b = self.Q[j][m], self.Q[m][j]
                    va = a.values if isinstance(a, Field) else a
                    vb = b.values if isinstance(b, Field) else b
                    if not np.array_equal(np.broadcast_to(va, np.shape(vb)), vb):
                        raise ValueError("Q must be symmetric")

    @property
    def n(self) -> int:
        return len(self.Q)

    @property
    def is_constant(self) -> bool:
        return isinstance(self.Q, np.ndarray)

    @classmethod
    def identity(cls, n: int) -> "QuadraticForm":
        return cls(np.eye(n))

    @classmethod
    def divcurl(cls, d: int = 2) -> "QuadraticForm":
        """``q(U, U) = u . v`` for ``U = (u, v)``."""
        Q = np.zeros((2 * d, 2 * d))
        Q[:d, d:] = 0.5 * np.eye(d)
        Q[d:, :d] = 0.5 * np.eye(d)
        return cls(Q)

    def scaled(self, c: float) -> "QuadraticForm":
        if self.is_constant:
            return QuadraticForm(c * self.Q)
        return QuadraticForm([[e * c for e in row] for row in self.Q])

    def at(self, index=None) -> np.ndarray:
        if self.is_constant:
            return self.Q
        if index is None:
            raise ValueError("variable form needs a sample index")
        return np.array([[float(np.real(e.values[tuple(index)])) if isinstance(e, Field) else float(e)
                          for e in row] for row in self.Q])

    def entry_field(self, j: int, m: int, grid: Grid):
        e = self.Q[j][m] if not self.is_constant else self.Q[j, m]
        return e if isinstance(e, Field) else Field(grid, np.full(grid.sizes, float(e)))

    def evaluate(self, u, v) -> Field:
        """Pointwise ``q(x; u, v)``."""
        grid = u[0].grid
        out = np.zeros(grid.sizes, dtype=complex)
        for j in range(self.n):
            for m in range(self.n):
                q = self.Q[j, m] if self.is_constant else self.Q[j][m]
                if not isinstance(q, Field) and q == 0:
                    continue
                qv = q.values if isinstance(q, Field) else q
                out += qv * u[j].values * np.conj(v[m].values)
        return Field(grid, out)

    def to_dict(self):
        if self.is_constant:
            return {"Q": self.Q.tolist()}
        return {"Q": "variable"}


# --- pairings and H-distribution tables --------------------------------------------

def pairing(u: Field, v: Field, phi: Field, psi: Symbol, alpha, op: MultiplierOp | None = None) -> complex:
    """``int phi u conj(A_psi v)`` with ``A_psi`` the projected multiplier of ``psi``."""
    if not (u.grid == v.grid == phi.grid):
        raise GridMismatchError("pairing needs fields on one grid")
    op = projected_multiplier(u.grid, psi, alpha) if op is None else op
    return pair(phi * u, op(v))


@dataclass
class HDistEntry:
    j: int
    m: int
    phi: str
    psi: str
    value: complex
    error: float
    converged: bool
    scale: float
    r_ladders: dict
    l_ladder: Extrapolation | None

    def to_dict(self) -> dict:
        return {
            "j": self.j, "m": self.m, "phi": self.phi, "psi": self.psi,
            "value": [self.value.real, self.value.imag], "error": self.error,
            "converged": self.converged, "scale": self.scale,
            "l_ladder": None if self.l_ladder is None else self.l_ladder.to_dict(),
            "r_ladders": {_lkey(l): e.to_dict() for l, e in self.r_ladders.items()},
        }


def _lkey(l) -> str:
    return "inf" if l is None else f"{l:g}"


@dataclass
class HDistEstimate:
    entries: list
    r_schedule: list
    l_schedule: list
    alpha: tuple
    label: str = "hdist"

    def entry(self, j: int, m: int, phi: str, psi: str) -> HDistEntry:
        for e in self.entries:
            if (e.j, e.m, e.phi, e.psi) == (j, m, phi, psi):
                return e
        raise KeyError((j, m, phi, psi))

    def has(self, j, m, phi, psi) -> bool:
        try:
            self.entry(j, m, phi, psi)
            return True
        except KeyError:
            return False

    @property
    def phi_labels(self) -> list:
        return sorted({e.phi for e in self.entries})

    @property
    def psi_labels(self) -> list:
        return sorted({e.psi for e in self.entries})

    def max_abs(self) -> float:
        return max((abs(e.value) for e in self.entries), default=0.0)

    def level_values(self) -> list:
        """``(entry, l, value, error)`` for every truncation level."""
        out = []
        for e in self.entries:
            for l, ex in e.r_ladders.items():
                out.append((e, l, ex.value, ex.error))
        return out

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "r_schedule": list(self.r_schedule),
            "l_schedule": [None if l is None else l for l in self.l_schedule],
            "alpha": list(self.alpha),
            "entries": [e.to_dict() for e in self.entries],
        }

    def to_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True))

    def csv_rows(self, j: int, m: int) -> list:
        """Rows ``r,l,phi,psi,re,im,err``; ``r = inf`` rows hold extrapolated values."""
        rows = []
        for e in self.entries:
            if (e.j, e.m) != (j, m):
                continue
            for l, ex in e.r_ladders.items():
                for r, v in zip(ex.steps, ex.raw):
                    v = complex(v)
                    rows.append([f"{r:g}", _lkey(l), e.phi, e.psi, repr(v.real), repr(v.imag), ""])
                v = complex(ex.value)
                rows.append(["inf", _lkey(l), e.phi, e.psi, repr(v.real), repr(v.imag), repr(ex.error)])
            if e.l_ladder is not None and len(e.r_ladders) > 1:
                rows.append(["inf", "limit", e.phi, e.psi, repr(e.value.real), repr(e.value.imag), repr(e.error)])
        return rows

    def write_csv(self, directory, prefix: str = "hdist") -> list[Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        paths = []
        for j, m in sorted({(e.j, e.m) for e in self.entries}):
            path = directory / f"{prefix}_j{j}_m{m}.csv"
            write_ladder_csv(path, self.csv_rows(j, m))
            paths.append(path)
        return paths


def write_ladder_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["r", "l", "phi", "psi", "re", "im", "err"])
        w.writerows(rows)


def _check_schedule(name, values, allow_none=False):
    vals = list(values)
    if not vals:
        raise ValueError(f"{name} must be nonempty")
    nums = [v for v in vals if v is not None]
    if not allow_none and len(nums) != len(vals):
        raise ValueError(f"{name} must not contain None")
    if any(b <= a for a, b in zip(nums, nums[1:])):
        raise ValueError(f"{name} must be strictly increasing")
    return vals


def estimate_hdistribution(u_fam: SequenceFamily, v_fam: SequenceFamily, bank: TestBank, alpha,
                           r_schedule, l_schedule=(None,), pairs=None, label: str = "hdist",
                           truncate_target: str = "recentred") -> HDistEstimate:
    """Extrapolated table of ``lim_l lim_r int phi u_jr conj(A_psi T_l(v_mr))``.

    ``l = None`` means no truncation. ``truncate_target`` is ``"recentred"``
    (truncate ``v_r - v``) or ``"member"`` (truncate ``v_r`` itself, then
    recentre by the declared limit). ``pairs`` restricts the ``(j, m)`` set.
    """
    alpha = _order(alpha)
    r_schedule = _check_schedule("r_schedule", r_schedule)
    l_schedule = _check_schedule("l_schedule", l_schedule, allow_none=True)
    if u_fam.grid != v_fam.grid or u_fam.grid != bank.grid:
        raise GridMismatchError("families and test bank must share a grid")
    grid = u_fam.grid
    if pairs is None:
        pairs = [(j, m) for j in range(u_fam.n_components) for m in range(v_fam.n_components)]
    ops = [projected_multiplier(grid, psi, alpha) for psi in bank.psis]
    raw = {}
    scales = {}
    for r in r_schedule:
        u = u_fam.recentred(r)
        if truncate_target == "recentred":
            v = v_fam.recentred(r)
        else:
            v = v_fam.member(r)
        phiu = {(j, a): bank.phis[a] * u[j] for j in {p[0] for p in pairs} for a in range(len(bank.phis))}
        for l in l_schedule:
            if l is None:
                vt = v if truncate_target == "recentred" else v_fam.recentred(r)
            elif truncate_target == "recentred":
                vt = tuple(truncate(x, l) for x in v)
            else:
                vt = tuple(truncate(x, l) - lim for x, lim in zip(v, v_fam.weak_limit))
            for m in {p[1] for p in pairs}:
                vnorm = lp_norm(vt[m], 2)
                for b, op in enumerate(ops):
                    w = op(vt[m])
                    for j in [p[0] for p in pairs if p[1] == m]:
                        for a in range(len(bank.phis)):
                            key = (j, m, a, b, l)
                            raw.setdefault(key, []).append(pair(phiu[(j, a)], w))
                            s = lp_norm(phiu[(j, a)], 2) * vnorm
                            scales[key[:4]] = max(scales.get(key[:4], 0.0), s)
    entries = []
    for j, m in pairs:
        for a, phil in enumerate(bank.phi_labels):
            for b, psi in enumerate(bank.psis):
                scale = scales[(j, m, a, b)]
                ladders = {l: richardson(r_schedule, raw[(j, m, a, b, l)], scale=scale) for l in l_schedule}
                if len(l_schedule) > 1:
                    lvals = [ladders[l].value for l in l_schedule]
                    lsteps = [np.inf if l is None else l for l in l_schedule]
                    lex = last_value(lsteps, lvals, scale=scale) if np.all(np.diff(lsteps) > 0) else None
                    final = ladders[l_schedule[-1]]
                    value, err = final.value, max(final.error, lex.error if lex else 0.0)
                    conv = final.converged and (lex.converged if lex else True)
                else:
                    lex = None
                    final = ladders[l_schedule[0]]
                    value, err, conv = final.value, final.error, final.converged
                entries.append(HDistEntry(j, m, phil, psi.label, complex(value), float(err), conv, float(scale),
                                          ladders, lex))
    return HDistEstimate(entries, [float(r) for r in r_schedule], list(l_schedule), alpha.orders, label)


# --- localisation ---------------------------------------------------------------------

@dataclass
class LocalizationEntry:
    s: int
    m: int
    phi: str
    psi: str
    value: complex
    error: float
    bound: float
    relative: float
    relative_error: float
    converged: bool
    ladder: Extrapolation
    test_form: list

    def to_dict(self) -> dict:
        return {"s": self.s, "m": self.m, "phi": self.phi, "psi": self.psi,
                "value": [self.value.real, self.value.imag], "error": self.error, "bound": self.bound,
                "relative": self.relative, "relative_error": self.relative_error,
                "converged": self.converged, "ladder": self.ladder.to_dict(),
                "test_form": [[complex(v).real, complex(v).imag] for v in self.test_form]}


@dataclass
class LocalizationResult:
    entries: list
    constraint_residuals: dict
    constraint_ok: bool
    tolerance: float
    flagged: bool

    def max_relative(self) -> float:
        return max((e.relative for e in self.entries), default=0.0)

    def max_relative_with_error(self) -> float:
        return max((e.relative + e.relative_error for e in self.entries), default=0.0)

    def passed(self, tol: float | None = None) -> bool:
        tol = self.tolerance if tol is None else tol
        return self.constraint_ok and self.max_relative_with_error() <= tol

    def to_dict(self) -> dict:
        return {"constraint_residuals": {f"{r:g}": v for r, v in self.constraint_residuals.items()},
                "constraint_ok": self.constraint_ok, "tolerance": self.tolerance, "flagged": self.flagged,
                "max_relative": self.max_relative(), "entries": [e.to_dict() for e in self.entries]}


def localization_residual(constraint: DifferentialConstraint, u_fam: SequenceFamily, v_fam: SequenceFamily,
                          bank: TestBank, r_schedule, radii=(0.5, 1.0), weight=None,
                          residual_tol: float = 1e-10, tolerance: float = 5e-3, strict: bool = True,
                          v_components=None) -> LocalizationResult:
    """Residual of ``sum a_sjk (2 pi i xi_k)^alpha_k mu_jm`` against ``phi (x) psi``.

    For each ``r`` the value is ``sum_terms int phi a u_j conj(L_beta v_m)``
    where ``L_beta`` has symbol ``psi(pi_P) (1 - theta) conj((2 pi i xi)^beta) / rho``;
    it is extrapolated in ``r`` and normalised by the sum of the Cauchy-Schwarz
    bounds of the equation's terms, maximised over the components of ``v``. The test-function form
    ``sum int a u_j conj(L_beta(phi v_m))``, which equals the constraint residual
    paired with ``B_psi(phi v_m)``, is kept per ``r`` as a diagnostic.

    The families must satisfy the constraint to ``residual_tol`` in the
    negative-order weighted norm; otherwise :class:`ConstraintViolation` is
    raised, or with ``strict=False`` the result is flagged and still computed.
    """
    alpha = constraint.alpha
    r_schedule = _check_schedule("r_schedule", r_schedule)
    grid = u_fam.grid
    if v_fam.grid != grid or bank.grid != grid:
        raise GridMismatchError("families and test bank must share a grid")
    if u_fam.n_components != constraint.n_components:
        raise ValueError("u family does not match the constraint's component count")
    v_components = list(range(v_fam.n_components)) if v_components is None else list(v_components)
    residuals = {}
    for r in r_schedule:
        residuals[float(r)] = constraint.residual_norm(u_fam.member(r), weight)
    ok = all(v <= residual_tol for v in residuals.values())
    if not ok and strict:
        worst = max(residuals.items(), key=lambda kv: kv[1])
        raise ConstraintViolation(f"constraint residual {worst[1]:.3e} at r={worst[0]:g} exceeds {residual_tol:g}")
    ops = {}
    for b, psi in enumerate(bank.psis):
        for t in constraint.terms:
            key = (b, t.orders)
            if key not in ops:
                ops[key] = localisation_op(grid, psi, alpha, t.orders, radii)
    entries = []
    for s in range(constraint.n_equations):
        terms = constraint.equation_terms(s)
        for a, phil in enumerate(bank.phi_labels):
            phi = bank.phis[a]
            for b, psi in enumerate(bank.psis):
                vals = {m: [] for m in v_components}
                tests = {m: [] for m in v_components}
                bounds = []
                for r in r_schedule:
                    u = u_fam.recentred(r)
                    v = v_fam.recentred(r)
                    pu = {t: phi * (u[t.comp] * t.coeff_field(grid)) for t in terms}
                    # one bound per equation: the largest component of v sets the scale
                    bound = 0.0
                    for m in v_components:
                        total, test, bm = 0j, 0j, 0.0
                        for t in terms:
                            op = ops[(b, t.orders)]
                            Lv = op(v[m])
                            total += pair(pu[t], Lv)
                            bm += lp_norm(pu[t], 2) * lp_norm(Lv, 2)
                            test += pair(u[t.comp] * t.coeff_field(grid), op(phi * v[m]))
                        vals[m].append(total)
                        tests[m].append(test)
                        bound = max(bound, bm)
                    bounds.append(bound)
                bscale = max(bounds) if max(bounds) > 0 else 1.0
                bound = bounds[-1] if bounds[-1] > 0 else bscale
                for m in v_components:
                    ex = richardson(r_schedule, vals[m], scale=bscale, conservative=False)
                    entries.append(LocalizationEntry(
                        s, m, phil, psi.label, ex.value, ex.error, float(bound),
                        float(abs(ex.value) / bound), float(ex.error / bound), ex.converged, ex, tests[m]))
    result = LocalizationResult(entries, residuals, ok, tolerance, flagged=not ok)
    if not result.passed():
        result.flagged = True
    return result


# --- wave cone and consistency -------------------------------------------------------------

@dataclass
class WaveCone:
    basis: np.ndarray
    dim: int
    residual: float

    def contains(self, lam, tol: float = 1e-10) -> bool:
        lam = np.asarray(lam, dtype=float)
        if self.dim == 0:
            return bool(np.linalg.norm(lam) <= tol)
        proj = self.basis @ (self.basis.T @ lam)
        return bool(np.linalg.norm(lam - proj) <= tol * max(1.0, np.linalg.norm(lam)))


def wavecone_membership(constraint: DifferentialConstraint, xi, index=None, rtol: float = 1e-10) -> WaveCone:
    """Real kernel of the symbol matrix at ``(x, xi)``: the admissible ``lambda`` for this direction."""
    xi = np.asarray(xi, dtype=float)
    if not np.any(xi):
        raise ValueError("direction must be nonzero")
    N = constraint.n_components
    if constraint.n_equations == 0:
        return WaveCone(np.eye(N), N, 0.0)
    M = constraint.symbol_matrix(xi, index)
    stacked = np.vstack([M.real, M.imag])
    basis = scipy.linalg.null_space(stacked, rcond=rtol)
    res = float(np.linalg.norm(M @ basis)) if basis.size else 0.0
    return WaveCone(basis, basis.shape[1], res)


@dataclass
class ConsistencyReport:
    min_eigenvalue: float
    max_abs_eigenvalue: float
    argmin: dict
    verdict: str
    kernel_dims: list
    samples: int

    def to_dict(self) -> dict:
        am = {k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in self.argmin.items()}
        return {"min_eigenvalue": self.min_eigenvalue, "max_abs_eigenvalue": self.max_abs_eigenvalue,
                "argmin": am, "verdict": self.verdict, "kernel_dims": sorted(set(self.kernel_dims)),
                "samples": self.samples}


def consistency_check(Q: QuadraticForm, constraint: DifferentialConstraint, x_samples, xi_samples,
                      tol: float = 1e-10) -> ConsistencyReport:
    """Smallest eigenvalue of ``Q(x)`` restricted to the wave cone over sampled ``(x, xi)``.

    Verdict ``null`` if the restricted form vanishes (all eigenvalues within
    ``tol * |Q|``), ``consistent`` if it is nonnegative, else ``inconsistent``.
    """
    x_samples = list(x_samples)
    xi_samples = [np.asarray(x, dtype=float) for x in xi_samples]
    if not x_samples or not xi_samples:
        raise ValueError("consistency_check needs samples")
    best, biggest, argmin, dims = np.inf, 0.0, {}, []
    qscale = 0.0
    for x in x_samples:
        Qx = Q.at(x)
        qscale = max(qscale, float(np.max(np.abs(Qx))))
        for xi in xi_samples:
            cone = wavecone_membership(constraint, xi, x)
            dims.append(cone.dim)
            if cone.dim == 0:
                continue
            R = cone.basis.T @ Qx @ cone.basis
            w, V = np.linalg.eigh(0.5 * (R + R.T))
            biggest = max(biggest, float(np.max(np.abs(w))))
            # strict improvement relative to the form's scale keeps the argmin stable under Q -> cQ
            if not argmin or w[0] < best - 1e-12 * qscale:
                best = float(w[0])
                argmin = {"x": None if x is None else list(x), "xi": xi, "lambda": cone.basis @ V[:, 0]}
    if not np.isfinite(best):
        verdict, best = "null", 0.0
    else:
        thresh = tol * max(qscale, 1e-300)
        if biggest <= thresh:
            verdict = "null"
        elif best >= -thresh:
            verdict = "consistent"
        else:
            verdict = "inconsistent"
    return ConsistencyReport(best, biggest, argmin, verdict, dims, len(x_samples) * len(xi_samples))


@dataclass
class StrongConsistencyReport:
    values: dict
    errors: dict
    verdicts: dict

    @property
    def verdict(self) -> str:
        vs = set(self.verdicts.values())
        if "negative beyond error" in vs:
            return "negative beyond error"
        if vs == {"= 0 within error"}:
            return "= 0 within error"
        return ">= 0 within error"

    def to_dict(self) -> dict:
        return {"values": {k: [v.real, v.imag] for k, v in self.values.items()},
                "errors": dict(self.errors), "verdicts": dict(self.verdicts), "verdict": self.verdict}


def strong_consistency_check(Q: QuadraticForm, hdist: HDistEstimate, bank: TestBank,
                             tol: float = 0.0) -> StrongConsistencyReport:
    """``sum_jm <phi q_jm (x) 1, mu_jm>`` per test function, with its sign verdict.

    A constant ``Q`` uses the ``psi = one`` entries directly; a variable ``Q``
    needs a table built on :func:`product_bank`.
    """
    if "one" not in hdist.psi_labels:
        raise KeyError("estimate table has no psi = one entries")
    values, errors, verdicts = {}, {}, {}
    for phil in bank.phi_labels:
        total, err = 0j, 0.0
        for j in range(Q.n):
            for m in range(Q.n):
                if Q.is_constant:
                    q = Q.Q[j, m]
                    if q == 0:
                        continue
                    if not hdist.has(j, m, phil, "one"):
                        continue
                    e = hdist.entry(j, m, phil, "one")
                    total += q * e.value
                    err += abs(q) * e.error
                else:
                    lab = f"{phil}*q[{j},{m}]"
                    if not hdist.has(j, m, lab, "one"):
                        raise KeyError(f"variable form needs entry {lab!r}; build the table on product_bank")
                    e = hdist.entry(j, m, lab, "one")
                    total += e.value
                    err += e.error
        values[phil] = complex(total)
        errors[phil] = float(err)
        band = err + tol
        if abs(total) <= band:
            verdicts[phil] = "= 0 within error"
        elif total.real >= -band:
            verdicts[phil] = ">= 0 within error"
        else:
            verdicts[phil] = "negative beyond error"
    return StrongConsistencyReport(values, errors, verdicts)
