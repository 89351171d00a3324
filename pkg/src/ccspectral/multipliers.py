"""Fourier multiplier operators on the torus lattice.

Lattice symbols are sampled at the integer frequencies of a grid. On the
Nyquist planes (some ``xi_k = -N_k/2``) the lattice has no mirror partner, so
the sampled value there is the average of the symbol over the sign flips of
the Nyquist components. This keeps the lattice symbol even (odd) whenever the
continuum symbol is, which is what realness of multipliers on real data needs.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .grid import Field, Grid, GridMismatchError, forward_transform, inverse_transform, lp_norm
from .symbols import AnisotropicWeight, MultiOrder, Symbol, cutoff_theta, project_to_P, rho

__all__ = [
    "MultiplierOp",
    "lattice_symbol",
    "apply_multiplier",
    "projected_multiplier",
    "apply_projected_symbol",
    "smoothing_op",
    "smoothing_derivative_op",
    "localisation_op",
    "derivative_symbol",
    "fractional_derivative",
    "anisotropic_norm",
    "truncate",
]


def lattice_symbol(grid: Grid, func: Callable[[np.ndarray], np.ndarray], zero_mode_value=None) -> np.ndarray:
    """Sample ``func`` on the frequency lattice with the Nyquist-plane averaging rule.

    If ``zero_mode_value`` is given, ``func`` is not evaluated at ``xi = 0``.
    """
    xi = grid.frequencies
    d = grid.dim
    if zero_mode_value is None:
        values = np.asarray(func(xi), dtype=complex)
    else:
        flat = xi.reshape(-1, d)
        nonzero = np.any(flat != 0, axis=-1)
        values = np.empty(flat.shape[0], dtype=complex)
        values[nonzero] = func(flat[nonzero])
        values[~nonzero] = zero_mode_value
        values = values.reshape(grid.sizes)
    mask = grid.nyquist_mask
    if mask.any():
        pts = xi[mask]
        nyq = np.isclose(pts, -np.asarray(grid.sizes) / 2)
        acc = np.zeros(len(pts), dtype=complex)
        for signs in itertools.product((1.0, -1.0), repeat=d):
            flipped = np.where(nyq, pts * np.asarray(signs), pts)
            acc += func(flipped)
        values[mask] = acc / 2**d
    return values


@dataclass(frozen=True, eq=False)
class MultiplierOp:
    """Linear operator ``f -> F^{-1}[symbol * F f]`` on one grid."""

    grid: Grid
    symbol_on_lattice: np.ndarray
    zero_mode_value: complex = 0.0
    label: str = "multiplier"

    @classmethod
    def from_function(cls, grid: Grid, func, zero_mode_value=None, label="multiplier") -> "MultiplierOp":
        values = lattice_symbol(grid, func, zero_mode_value)
        z = values[grid.zero_mode_index()]
        return cls(grid, values, complex(z), label)

    def __call__(self, f: Field) -> Field:
        return apply_multiplier(self, f)

    def compose(self, other: "MultiplierOp") -> "MultiplierOp":
        """Operator whose symbol is the lattice product ``self * other``."""
        if other.grid != self.grid:
            raise GridMismatchError("cannot compose multipliers on different grids")
        sym = self.symbol_on_lattice * other.symbol_on_lattice
        return MultiplierOp(self.grid, sym, complex(sym[self.grid.zero_mode_index()]),
                            f"{self.label}*{other.label}")

    def conj(self) -> "MultiplierOp":
        """Operator with the conjugate symbol (the L2 adjoint)."""
        return MultiplierOp(self.grid, np.conj(self.symbol_on_lattice), np.conj(self.zero_mode_value),
                            f"conj({self.label})")

    def scaled(self, c) -> "MultiplierOp":
        return MultiplierOp(self.grid, c * self.symbol_on_lattice, c * self.zero_mode_value, self.label)


def apply_multiplier(m: MultiplierOp, f: Field) -> Field:
    if f.grid != m.grid:
        raise GridMismatchError(f"multiplier on {m.grid.sizes}, field on {f.grid.sizes}")
    return inverse_transform(f.grid, m.symbol_on_lattice * f.spectrum)


def projected_multiplier(grid: Grid, psi: Symbol, alpha) -> MultiplierOp:
    """Multiplier with symbol ``psi(pi_P(xi))``; the zero mode is set to 0."""
    alpha = alpha if isinstance(alpha, MultiOrder) else MultiOrder(tuple(alpha))
    return MultiplierOp.from_function(grid, lambda xi: psi(project_to_P(xi, alpha)),
                                      zero_mode_value=0.0, label=f"A[{psi.label}]")


def apply_projected_symbol(psi: Symbol, alpha, f: Field) -> Field:
    return apply_multiplier(projected_multiplier(f.grid, psi, alpha), f)


def derivative_symbol(xi, orders) -> np.ndarray:
    """``prod_k (2 pi i xi_k)^orders_k`` with the principal branch.

    For ``xi_k < 0`` the factor is ``|2 pi xi_k|^a exp(-i a pi/2)``.
    """
    xi = np.asarray(xi, dtype=float)
    out = np.ones(xi.shape[:-1], dtype=complex)
    for k, a in enumerate(orders):
        if a == 0:
            continue
        x = xi[..., k]
        mag = np.abs(2 * np.pi * x) ** a
        if float(a).is_integer():
            factor = (2j * np.pi * x) ** int(a)
        else:
            factor = mag * np.exp(1j * a * (np.pi / 2) * np.sign(x))
        out = out * factor
    return out


def _axis_orders(d: int, axis: int, a: float) -> tuple:
    orders = [0.0] * d
    orders[axis] = a
    return tuple(orders)


def fractional_derivative(f: Field, axis: int, a: float) -> Field:
    """``d^a / dx_axis^a`` with symbol ``(2 pi i xi_axis)^a``, principal branch."""
    if a <= 0:
        raise ValueError("fractional order must be positive")
    orders = _axis_orders(f.grid.dim, axis, a)
    op = MultiplierOp.from_function(f.grid, lambda xi: derivative_symbol(xi, orders),
                                    label=f"D{axis}^{a:g}")
    return apply_multiplier(op, f)


def smoothing_op(grid: Grid, psi: Symbol, alpha, inner_radius: float, outer_radius: float) -> MultiplierOp:
    """``B_psi``: symbol ``psi(pi_P(xi)) (1 - theta(xi)) / rho(xi)``."""
    alpha = alpha if isinstance(alpha, MultiOrder) else MultiOrder(tuple(alpha))

    def sym(xi):
        return psi(project_to_P(xi, alpha)) * (1 - cutoff_theta(xi, inner_radius, outer_radius, alpha)) / rho(xi, alpha)

    return MultiplierOp.from_function(grid, sym, zero_mode_value=0.0, label=f"B[{psi.label}]")


def smoothing_derivative_op(grid: Grid, psi: Symbol, alpha, inner_radius: float, outer_radius: float,
                            orders) -> MultiplierOp:
    """``D^orders o B_psi``: ``B_psi`` times ``prod (2 pi i xi_k)^orders_k``.

    With ``orders = alpha_k e_k`` this is the composite ``d^{alpha_k}_k B_psi``.
    """
    alpha = alpha if isinstance(alpha, MultiOrder) else MultiOrder(tuple(alpha))

    def sym(xi):
        return (psi(project_to_P(xi, alpha)) * (1 - cutoff_theta(xi, inner_radius, outer_radius, alpha))
                * derivative_symbol(xi, orders) / rho(xi, alpha))

    return MultiplierOp.from_function(grid, sym, zero_mode_value=0.0, label=f"D{tuple(orders)}B[{psi.label}]")


def localisation_op(grid: Grid, psi: Symbol, alpha, orders, radii=None) -> MultiplierOp:
    """Symbol ``psi(pi_P) (1 - theta) conj((2 pi i xi)^orders) / rho``.

    The conjugate appears because the derivative is moved onto the second
    (conjugated) slot of a pairing. ``radii=None`` drops the cutoff.
    """
    alpha = alpha if isinstance(alpha, MultiOrder) else MultiOrder(tuple(alpha))

    def sym(xi):
        val = psi(project_to_P(xi, alpha)) * np.conj(derivative_symbol(xi, orders)) / rho(xi, alpha)
        if radii is not None:
            val = val * (1 - cutoff_theta(xi, radii[0], radii[1], alpha))
        return val

    return MultiplierOp.from_function(grid, sym, zero_mode_value=0.0, label=f"L{tuple(orders)}[{psi.label}]")


def anisotropic_norm(f: Field, p: float, w, order: float = 1.0) -> float:
    """``|| F^{-1}[w^order F f] ||_p``; ``order = -1`` gives the dual (negative) norm.

    ``w`` is an :class:`AnisotropicWeight`, a callable of frequency, or ``None``
    for the unit weight.
    """
    if p <= 1:
        raise ValueError("anisotropic_norm needs p > 1")
    if w is None:
        return lp_norm(f, p)
    weights = np.asarray(w(f.grid.frequencies), dtype=float)
    if np.any(weights <= 0):
        raise ValueError("weight must be positive on the whole lattice")
    g = inverse_transform(f.grid, weights**order * f.spectrum)
    return lp_norm(g, p)


def truncate(f: Field, l: float) -> Field:
    """Zero the samples with ``|f| >= l``."""
    if l <= 0:
        raise ValueError("truncation level must be positive")
    return Field(f.grid, np.where(np.abs(f.values) < l, f.values, 0))
