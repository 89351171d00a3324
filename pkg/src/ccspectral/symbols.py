"""Anisotropic unit manifold, projection onto it, and multiplier symbols.

The manifold is ``P = {eta : sum_k |eta_k|^(2 alpha_k) = 1}``. A nonzero
frequency is sent to ``P`` by ``pi_P(xi)_j = xi_j * rho(xi)^(-1/alpha_j)`` with
``rho(xi) = (sum_k |xi_k|^(2 alpha_k))^(1/2)``. Symbols are plain evaluators on
points of shape ``(..., d)`` with a parity tag.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.stats import qmc

__all__ = [
    "MultiOrder",
    "Symbol",
    "AnisotropicWeight",
    "MarcinkiewiczEstimate",
    "project_to_P",
    "rho",
    "hoermander_weight",
    "sobolev_weight",
    "cutoff_theta",
    "smoothstep",
    "even_odd_split",
    "marcinkiewicz_estimate",
    "symbol_from_label",
    "SYMBOL_LABELS",
]

PARITIES = ("even", "odd", "none")


@dataclass(frozen=True)
class MultiOrder:
    """Anisotropy orders ``(alpha_1, ..., alpha_d)``.

    Each entry is a positive integer or at least ``d``.
    """

    orders: tuple[float, ...]

    def __post_init__(self):
        orders = tuple(float(a) for a in np.atleast_1d(self.orders))
        d = len(orders)
        for a in orders:
            if a <= 0:
                raise ValueError(f"orders must be positive, got {orders}")
            if not (a.is_integer() or a >= d):
                raise ValueError(f"order {a} is neither an integer nor >= d = {d}")
        object.__setattr__(self, "orders", orders)

    @classmethod
    def isotropic(cls, d: int, order: int = 1) -> "MultiOrder":
        return cls((order,) * d)

    @classmethod
    def parabolic(cls, d_space: int) -> "MultiOrder":
        """``(1, 2, ..., 2)``: first order in time, second order in space."""
        return cls((1,) + (2,) * d_space)

    @property
    def dim(self) -> int:
        return len(self.orders)

    @property
    def is_isotropic(self) -> bool:
        return len(set(self.orders)) == 1

    def as_array(self) -> np.ndarray:
        return np.asarray(self.orders)


def _as_order(alpha, d: int | None = None) -> MultiOrder:
    if isinstance(alpha, MultiOrder):
        return alpha
    return MultiOrder(tuple(alpha))


def _rho_sq(xi: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    return np.sum(np.abs(xi) ** (2 * alpha), axis=-1)


def rho(xi, alpha) -> np.ndarray:
    """Anisotropic radius ``(sum_k |xi_k|^(2 alpha_k))^(1/2)``; vectorised over leading axes."""
    alpha = _as_order(alpha).as_array()
    xi = np.asarray(xi, dtype=float)
    return np.sqrt(_rho_sq(xi, alpha))


def project_to_P(xi, alpha) -> np.ndarray:
    """Project nonzero frequencies onto the manifold ``P``.

    Raises ``ValueError`` if any input vector is zero.
    """
    alpha = _as_order(alpha).as_array()
    xi = np.asarray(xi, dtype=float)
    s = _rho_sq(xi, alpha)
    if np.any(s == 0):
        raise ValueError("projection onto P is undefined at xi = 0")
    return xi * s[..., None] ** (-1.0 / (2 * alpha))


def hoermander_weight(xi, nu: int) -> np.ndarray:
    """``sqrt(1 + (2 pi |xi_1|)^2 + (2 pi |xi_2|)^4)`` with ``xi_1 = xi[..., :nu]``."""
    xi = np.asarray(xi, dtype=float)
    first = np.sum(xi[..., :nu] ** 2, axis=-1)
    second = np.sum(xi[..., nu:] ** 2, axis=-1)
    return np.sqrt(1 + 4 * np.pi**2 * first + 16 * np.pi**4 * second**2)


def sobolev_weight(xi, alpha) -> np.ndarray:
    """``sqrt(1 + sum_k (2 pi |xi_k|)^(2 alpha_k))``, the order-``alpha`` analogue of the Hörmander weight."""
    alpha = _as_order(alpha).as_array()
    xi = np.asarray(xi, dtype=float)
    return np.sqrt(1 + np.sum(np.abs(2 * np.pi * xi) ** (2 * alpha), axis=-1))


@dataclass(frozen=True)
class AnisotropicWeight:
    """Positive frequency weight used for anisotropic Sobolev norms.

    ``kind`` is one of ``"rho"`` (needs ``alpha``), ``"hoermander"`` (needs
    ``nu``), ``"parabolic_rho"`` (``rho`` with orders ``(1, 2, ..., 2)``) or
    ``"sobolev"`` (needs ``alpha``).
    """

    kind: str
    alpha: tuple | None = None
    nu: int | None = None

    def __post_init__(self):
        if self.kind not in ("rho", "hoermander", "parabolic_rho", "sobolev"):
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if self.kind in ("rho", "sobolev") and self.alpha is None:
            raise ValueError(f"{self.kind} weight needs alpha")
        if self.kind == "hoermander" and self.nu is None:
            raise ValueError("hoermander weight needs the split index nu")

    def __call__(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        if self.kind == "rho":
            return rho(xi, self.alpha)
        if self.kind == "parabolic_rho":
            return rho(xi, MultiOrder.parabolic(xi.shape[-1] - 1))
        if self.kind == "hoermander":
            return hoermander_weight(xi, self.nu)
        return sobolev_weight(xi, self.alpha)


def smoothstep(t) -> np.ndarray:
    """C-infinity step: 0 for ``t <= 0``, 1 for ``t >= 1``."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return a / (a + b)


def cutoff_theta(xi, inner_radius: float, outer_radius: float, alpha=None) -> np.ndarray:
    """Smooth cutoff: 1 for ``rho(xi) <= inner_radius``, 0 for ``rho(xi) >= outer_radius``.

    ``alpha`` defaults to isotropic order 1 (Euclidean radius).
    """
    if not 0 < inner_radius < outer_radius:
        raise ValueError("need 0 < inner_radius < outer_radius")
    xi = np.asarray(xi, dtype=float)
    if alpha is None:
        alpha = MultiOrder.isotropic(xi.shape[-1])
    r = rho(xi, alpha)
    return 1.0 - smoothstep((r - inner_radius) / (outer_radius - inner_radius))


@dataclass(frozen=True)
class Symbol:
    """Closed-form function of frequency with a declared parity.

    ``evaluator`` maps an array of points ``(..., d)`` to values ``(...)``.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    parity: str = "none"
    label: str = "symbol"
    smoothness_claim: bool = True

    def __post_init__(self):
        if self.parity not in PARITIES:
            raise ValueError(f"parity must be one of {PARITIES}")

    def __call__(self, eta) -> np.ndarray:
        eta = np.asarray(eta, dtype=float)
        out = np.asarray(self.evaluator(eta))
        return np.broadcast_to(out, eta.shape[:-1]) if out.shape != eta.shape[:-1] else out

    def compose_projection(self, alpha) -> Callable[[np.ndarray], np.ndarray]:
        """``xi -> psi(pi_P(xi))`` for nonzero ``xi``."""
        return lambda xi: self(project_to_P(xi, alpha))

    def negated(self) -> "Symbol":
        """``xi -> psi(-xi)``."""
        flip = {"even": "even", "odd": "odd", "none": "none"}[self.parity]
        return Symbol(lambda eta: self(-np.asarray(eta)), flip, f"{self.label}(-xi)")

    def check_parity(self, samples, atol: float = 1e-12) -> bool:
        """Verify the declared parity on sample points; ``none`` always passes."""
        if self.parity == "none":
            return True
        samples = np.asarray(samples, dtype=float)
        plus, minus = self(samples), self(-samples)
        target = minus if self.parity == "even" else -minus
        scale = max(1.0, float(np.max(np.abs(plus), initial=0.0)))
        return bool(np.max(np.abs(plus - target), initial=0.0) <= atol * scale)


def even_odd_split(psi: Symbol) -> tuple[Symbol, Symbol]:
    """``psi = psi_e + psi_o`` with ``psi_e`` even and ``psi_o`` odd."""

    def even(eta):
        eta = np.asarray(eta, dtype=float)
        return 0.5 * (psi(eta) + psi(-eta))

    def odd(eta):
        eta = np.asarray(eta, dtype=float)
        return 0.5 * (psi(eta) - psi(-eta))

    return (Symbol(even, "even", f"even({psi.label})", psi.smoothness_claim),
            Symbol(odd, "odd", f"odd({psi.label})", psi.smoothness_claim))


# --- built-in symbols -------------------------------------------------------

def _unit(eta):
    n = np.linalg.norm(eta, axis=-1, keepdims=True)
    return eta / np.where(n == 0, 1.0, n)


def _one() -> Symbol:
    return Symbol(lambda eta: np.ones(np.shape(eta)[:-1]), "even", "one")


def _riesz(k: int) -> Symbol:
    return Symbol(lambda eta: _unit(eta)[..., k], "odd", f"riesz:{k}")


def _direction_indicator(k: int, width: float) -> Symbol:
    # smooth bump around the directions +-e_k on the unit sphere
    def ev(eta):
        c = _unit(eta)[..., k]
        return np.exp(-(1.0 - c * c) / width)

    return Symbol(ev, "even", f"direction-indicator:{k}:{width:g}")


def _parabolic_xi0() -> Symbol:
    return Symbol(lambda eta: eta[..., 0], "odd", "parabolic-xi0")


def _parabolic_xixj(k: int, l: int) -> Symbol:
    return Symbol(lambda eta: eta[..., k] * eta[..., l], "even", f"parabolic-xixj:{k}:{l}")


def _custom_poly(spec: str) -> Symbol:
    """``"c@e1.e2.e3;c@..."``: sum of ``c * prod eta_k^e_k``."""
    terms = []
    for chunk in spec.split(";"):
        coeff, exps = chunk.split("@")
        terms.append((float(coeff), tuple(int(e) for e in exps.split("."))))
    degrees = {sum(e) % 2 for _, e in terms}
    parity = "none" if len(degrees) > 1 else ("even" if degrees == {0} else "odd")

    def ev(eta):
        out = np.zeros(np.shape(eta)[:-1])
        for c, exps in terms:
            mono = np.ones(np.shape(eta)[:-1])
            for k, e in enumerate(exps):
                if e:
                    mono = mono * eta[..., k] ** e
            out = out + c * mono
        return out

    return Symbol(ev, parity, f"custom-poly:{spec}")


SYMBOL_LABELS = (
    "one",
    "riesz:k",
    "direction-indicator:k:width",
    "parabolic-xi0",
    "parabolic-xixj:k:l",
    "custom-poly:coeffs",
)


def symbol_from_label(label: str) -> Symbol:
    """Build a registered symbol, e.g. ``"riesz:0"`` or ``"custom-poly:1@2.0;0.5@0.1"``."""
    name, _, rest = label.partition(":")
    args = rest.split(":") if rest else []
    try:
        if name == "one" and not args:
            return _one()
        if name == "riesz" and len(args) == 1:
            return _riesz(int(args[0]))
        if name == "direction-indicator" and len(args) == 2:
            return _direction_indicator(int(args[0]), float(args[1]))
        if name == "parabolic-xi0" and not args:
            return _parabolic_xi0()
        if name == "parabolic-xixj" and len(args) == 2:
            return _parabolic_xixj(int(args[0]), int(args[1]))
        if name == "custom-poly" and rest:
            return _custom_poly(rest)
    except ValueError as exc:
        raise ValueError(f"bad symbol label {label!r}: {exc}") from None
    raise ValueError(f"unknown symbol label {label!r}")


# --- Marcinkiewicz constant -------------------------------------------------

# central-difference weights for derivative orders 0..3 on offsets -2..2
_STENCILS = {
    0: {0: 1.0},
    1: {-1: -0.5, 1: 0.5},
    2: {-1: 1.0, 0: -2.0, 1: 1.0},
    3: {-2: -0.5, -1: 1.0, 1: -1.0, 2: 0.5},
}


@dataclass
class MarcinkiewiczEstimate:
    value: float
    argmax: np.ndarray
    multi_index: tuple[int, ...]
    level_maxima: list[float]
    skipped: int
    total: int
    unreliable: bool
    bounded: bool
    values: np.ndarray = field(repr=False, default=None)


def _multi_indices(d: int, max_order: int):
    for idx in itertools.product(range(max_order + 1), repeat=d):
        if sum(idx) <= max_order:
            yield idx


def dyadic_cloud(d: int, levels, per_level: int, spread: float = 4.0) -> tuple[np.ndarray, np.ndarray]:
    """Sample points off the coordinate hyperplanes, ``per_level`` per dyadic level.

    Each axis magnitude is ``2^(level + w)`` with ``w`` in ``[-spread, spread]``
    drawn from an unscrambled Halton sequence, so a denser cloud contains the
    sparser one.
    """
    pts, lev = [], []
    halton = qmc.Halton(d=2 * d, scramble=False)
    u = halton.random(per_level + 1)[1:]
    for j in levels:
        mags = 2.0 ** (j + spread * (2 * u[:, :d] - 1))
        signs = np.where(u[:, d:] < 0.5, -1.0, 1.0)
        pts.append(mags * signs)
        lev.append(np.full(per_level, j))
    return np.concatenate(pts), np.concatenate(lev)


def marcinkiewicz_estimate(func, d: int, max_order: int | None = None, levels=range(0, 11),
                           per_level: int = 128, spread: float = 4.0) -> MarcinkiewiczEstimate:
    """Sampled ``max |xi^a d^a func(xi)|`` over multi-indices ``|a| <= max_order``.

    Derivatives are nested central differences with per-axis step
    ``h_k = c_m |xi_k|`` where ``m`` is the total derivative order and
    ``c_m = eps^(1/(m+2))``. Samples where ``func`` fails or returns a
    non-finite value are skipped; more than 10% skipped marks the estimate
    unreliable. ``bounded`` is False when the top dyadic level exceeds the
    middle level by more than a factor 1.5 (growth with frequency).
    """
    if max_order is None:
        max_order = d
    if max_order > 3:
        raise ValueError("finite-difference stencils are provided up to order 3")
    levels = list(levels)
    pts, lev = dyadic_cloud(d, levels, per_level, spread)
    best = np.zeros(len(pts))
    best_idx = [(0,) * d] * len(pts)
    ok = np.ones(len(pts), dtype=bool)
    eps = np.finfo(float).eps
    for idx in _multi_indices(d, max_order):
        m = sum(idx)
        c = eps ** (1.0 / (m + 2)) if m else 0.0
        h = c * np.abs(pts)
        acc = np.zeros(len(pts), dtype=complex)
        offsets = [list(_STENCILS[n].items()) for n in idx]
        for combo in itertools.product(*offsets):
            weight = math.prod(w for _, w in combo)
            shift = np.array([o for o, _ in combo], dtype=float)
            with np.errstate(all="ignore"):
                try:
                    vals = np.asarray(func(pts + shift * h), dtype=complex)
                except (ValueError, ZeroDivisionError, FloatingPointError, ArithmeticError):
                    vals = np.full(len(pts), np.nan, dtype=complex)
            acc += weight * vals
        # xi^a / h^a = prod sign(xi_k)^a_k / c^m
        sign = np.prod(np.sign(pts) ** np.array(idx), axis=-1)
        term = np.abs(acc * sign / (c**m if m else 1.0))
        bad = ~np.isfinite(term)
        ok &= ~bad
        term = np.where(bad, 0.0, term)
        upd = term > best
        best = np.where(upd, term, best)
        for i in np.nonzero(upd)[0]:
            best_idx[i] = idx
    best = np.where(ok, best, 0.0)
    skipped = int(np.count_nonzero(~ok))
    imax = int(np.argmax(best))
    level_maxima = [float(best[lev == j].max(initial=0.0)) for j in levels]
    mid = level_maxima[len(level_maxima) // 2]
    bounded = not (level_maxima[-1] > 1.5 * mid and level_maxima[-1] > 0)
    return MarcinkiewiczEstimate(
        value=float(best[imax]),
        argmax=pts[imax],
        multi_index=best_idx[imax],
        level_maxima=level_maxima,
        skipped=skipped,
        total=len(pts),
        unreliable=skipped > 0.1 * len(pts),
        bounded=bounded,
        values=best,
    )
