"""Weakly convergent sequence families with declared limits.

Every family lives on one grid, produces a tuple of component fields for each
index ``r`` and declares its weak limit analytically.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .grid import Field, Grid, forward_transform, inverse_transform, lp_norm
from .multipliers import MultiplierOp, derivative_symbol, lattice_symbol
from .profiles import ConstantProfile, periodic_offsets

__all__ = [
    "AliasingError",
    "SequenceFamily",
    "oscillation_family",
    "concentration_family",
    "paper_counterexample_family",
    "divcurl_pair",
    "parabolic_pair",
    "stack_families",
    "FAMILY_LABELS",
]

FAMILY_LABELS = ("oscillation", "concentration", "counterexample", "divcurl", "parabolic-pair")


class AliasingError(ValueError):
    """Requested oscillation frequency does not fit inside the grid's band."""


def _as_field(grid: Grid, profile) -> Field:
    if isinstance(profile, Field):
        return profile
    if hasattr(profile, "on"):
        return profile.on(grid)
    if callable(profile):
        return grid.evaluate(profile)
    return Field(grid, np.full(grid.sizes, float(profile)))


def _support_box_of(f: Field) -> np.ndarray:
    """Axis-aligned bounding box of the nonzero samples (full torus if none)."""
    nz = np.nonzero(f.values)
    box = []
    for axis, n in enumerate(f.grid.sizes):
        if len(nz[axis]) == 0:
            box.append((0.0, 1.0))
            continue
        idx = np.unique(nz[axis])
        if idx.min() == 0 or idx.max() == n - 1:
            box.append((0.0, 1.0))
        else:
            box.append(((idx.min() - 1) / n, (idx.max() + 1) / n))
    return np.array(box)


@dataclass
class SequenceFamily:
    """``r -> (u_1r, ..., u_Nr)`` on a fixed grid.

    ``weak_limit`` holds the declared limit per component. ``lp_bound`` is the
    declared uniform ``L^p`` bound of the component vector (max over
    components). ``dominating`` optionally holds fields ``V_j`` with
    ``|u_jr| <= V_j`` pointwise for all ``r``.
    """

    label: str
    grid: Grid
    generator: Callable[[float], tuple]
    weak_limit: tuple
    lp_exponent: float
    lp_bound: float
    support_box: np.ndarray
    dominating: tuple | None = None
    params: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def n_components(self) -> int:
        return len(self.weak_limit)

    def member(self, r) -> tuple:
        key = float(r)
        if key not in self._cache:
            comps = self.generator(r)
            if isinstance(comps, Field):
                comps = (comps,)
            self._cache[key] = tuple(comps)
        return self._cache[key]

    __call__ = member

    def scalar(self, r) -> Field:
        comps = self.member(r)
        if len(comps) != 1:
            raise ValueError(f"family {self.label!r} has {len(comps)} components")
        return comps[0]

    def recentred(self, r) -> tuple:
        return tuple(u - lim for u, lim in zip(self.member(r), self.weak_limit))

    def component_norms(self, r, p=None) -> list[float]:
        p = self.lp_exponent if p is None else p
        return [lp_norm(u, p) for u in self.member(r)]

    def outside_support_max(self, r) -> float:
        """Largest modulus of any component outside ``support_box``."""
        mask = np.ones(self.grid.sizes, dtype=bool)
        for axis, (x, (lo, hi)) in enumerate(zip(self.grid.coords, self.support_box)):
            mask = mask & (x >= lo) & (x <= hi)
        return max(float(np.max(np.abs(u.values[~mask]), initial=0.0)) for u in self.member(r))

    def domination_violations(self, r) -> int:
        """Number of samples where some ``|u_jr| > V_j``; 0 if no dominating field is declared."""
        if self.dominating is None:
            return 0
        return int(sum(np.count_nonzero(np.abs(u.values) > V.values)
                       for u, V in zip(self.member(r), self.dominating)))


def stack_families(label: str, *families: SequenceFamily) -> SequenceFamily:
    """Concatenate the components of families that share a grid."""
    grid = families[0].grid
    if any(f.grid != grid for f in families):
        raise ValueError("stacked families must share a grid")
    doms = None
    if all(f.dominating is not None for f in families):
        doms = tuple(V for f in families for V in f.dominating)
    boxes = np.stack([f.support_box for f in families])
    box = np.stack([boxes[:, :, 0].min(axis=0), boxes[:, :, 1].max(axis=0)], axis=-1)
    return SequenceFamily(
        label=label,
        grid=grid,
        generator=lambda r: tuple(u for f in families for u in f.member(r)),
        weak_limit=tuple(lim for f in families for lim in f.weak_limit),
        lp_exponent=min(f.lp_exponent for f in families),
        lp_bound=max(f.lp_bound for f in families),
        support_box=box,
        dominating=doms,
        params={"stack": [f.params for f in families]},
    )


def _check_band(grid: Grid, freq, r):
    if not grid.in_band(freq):
        raise AliasingError(
            f"frequency {np.asarray(freq).tolist()} at r={r:g} exceeds the band of grid {grid.sizes}")


def oscillation_family(grid: Grid, profile, direction, phase: str = "cosine", p: float = 2.0,
                       label: str = "oscillation") -> SequenceFamily:
    """``u_r(x) = a(x) g(2 pi r k.x)`` with ``g`` = cos or exp(i .); weak limit 0."""
    if phase not in ("cosine", "exponential"):
        raise ValueError("phase must be 'cosine' or 'exponential'")
    k = np.asarray(direction, dtype=float)
    if k.shape != (grid.dim,) or not np.any(k):
        raise ValueError("direction must be a nonzero integer vector of the grid dimension")
    a = _as_field(grid, profile)
    kx = sum(kk * x for kk, x in zip(k, grid.coords))

    def gen(r):
        _check_band(grid, r * k, r)
        arg = 2 * np.pi * r * kx
        g = np.cos(arg) if phase == "cosine" else np.exp(1j * arg)
        return (Field(grid, a.values * g),)

    return SequenceFamily(
        label=label,
        grid=grid,
        generator=gen,
        weak_limit=(grid.zeros(),),
        lp_exponent=p,
        lp_bound=lp_norm(a, p),
        support_box=_support_box_of(a),
        dominating=(Field(grid, np.abs(a.values) * (1 + 1e-12)),),
        params={"kind": "oscillation", "direction": k.tolist(), "phase": phase, "p": p},
    )


def _profile_lp_norm(profile, d: int, p: float, halfwidth: float, n: int | None = None) -> float:
    """Midpoint-rule ``||U||_p`` over ``[-halfwidth, halfwidth]^d``."""
    n = n or {1: 8192, 2: 512, 3: 96}[d]
    h = 2 * halfwidth / n
    t = -halfwidth + h * (np.arange(n) + 0.5)
    coords = np.meshgrid(*([t] * d), indexing="ij", sparse=True)
    vals = np.abs(np.broadcast_to(profile(*coords), (n,) * d))
    return float((np.sum(vals**p) * h**d) ** (1 / p))


def concentration_family(grid: Grid, profile, center, p: float = 2.0,
                         label: str = "concentration") -> SequenceFamily:
    """``u_r(x) = r^(d/p) U(r (x - x0))``; ``profile`` is ``U`` centred at the origin.

    ``profile.support_box`` (relative to the origin) must exist; members whose
    scaled support would leave the torus are rejected.
    """
    d = grid.dim
    x0 = np.asarray(center, dtype=float)
    ubox = np.asarray(profile.support_box, dtype=float)
    half = float(np.max(np.abs(ubox)))

    def gen(r):
        lo, hi = x0 + ubox[:, 0] / r, x0 + ubox[:, 1] / r
        if np.any(lo < 0) or np.any(hi > 1):
            raise ValueError(f"support of member r={r:g} escapes the unit torus")
        offs = periodic_offsets(grid, x0)
        vals = r ** (d / p) * profile(*(r * o for o in offs))
        return (Field(grid, np.broadcast_to(vals, grid.sizes).copy()),)

    box = np.stack([np.clip(x0 + ubox[:, 0], 0, 1), np.clip(x0 + ubox[:, 1], 0, 1)], axis=-1)
    return SequenceFamily(
        label=label,
        grid=grid,
        generator=gen,
        weak_limit=(grid.zeros(),),
        lp_exponent=p,
        lp_bound=_profile_lp_norm(profile, d, p, half),
        support_box=box,
        params={"kind": "concentration", "center": x0.tolist(), "p": p},
    )


def paper_counterexample_family(r_schedule, x0: float = 0.5, n: int | None = None,
                                label: str = "counterexample") -> SequenceFamily:
    """``u_r = r`` on ``|x - x0| < r^-2``, else 0, in one dimension.

    The grid has ``n = 8 max(r)^2`` points unless given; coarser grids are
    rejected. ``x0`` is moved to the nearest cell midpoint so the plateau holds
    exactly ``2 n / r^2`` samples and ``int u_r^2 = 2`` holds in quadrature.
    """
    r_schedule = sorted(float(r) for r in r_schedule)
    rmax = r_schedule[-1]
    need = int(8 * rmax**2)
    n = need if n is None else int(n)
    if n < need:
        raise ValueError(f"grid of {n} points cannot resolve the plateau at r={rmax:g}; need n >= {need}")
    grid = Grid((n,))
    j0 = int(np.floor(x0 * n))
    x0_snapped = (j0 + 0.5) / n
    width = 1.0 / r_schedule[0] ** 2
    if x0_snapped - 2 * width < 0 or x0_snapped + 2 * width > 1:
        raise ValueError("plateau does not fit inside the torus with margin")
    idx = np.arange(n)

    def gen(r):
        m = n / r**2
        if not float(m).is_integer():
            raise ValueError(f"n / r^2 must be an integer (n={n}, r={r:g})")
        inside = np.abs(2 * (idx - j0) - 1) < 2 * m
        return (Field(grid, np.where(inside, float(r), 0.0)),)

    return SequenceFamily(
        label=label,
        grid=grid,
        generator=gen,
        weak_limit=(grid.zeros(),),
        lp_exponent=2.0,
        lp_bound=float(np.sqrt(2.0)),
        support_box=np.array([[x0_snapped - width, x0_snapped + width]]),
        dominating=None,
        params={"kind": "counterexample", "x0": x0_snapped, "r_schedule": r_schedule, "n": n},
    )


def _spectral_derivative(f: Field, axis: int) -> Field:
    orders = [0] * f.grid.dim
    orders[axis] = 1
    op = MultiplierOp.from_function(f.grid, lambda xi: derivative_symbol(xi, orders))
    out = op(f)
    return out.real if f.is_real() else out


def divcurl_pair(grid: Grid, k1, k2, profile=None, label: str = "divcurl") -> tuple[SequenceFamily, SequenceFamily]:
    """Divergence-free ``u_r`` and curl-free ``v_r`` oscillating along ``k1`` and ``k2``.

    ``u_r = grad^perp(a sin(2 pi r k1.x)) / (2 pi r |k1|)`` and
    ``v_r = grad(a sin(2 pi r k2.x)) / (2 pi r |k2|)``; to leading order
    ``u_r = a cos(2 pi r k1.x) t1`` with ``t1 . k1 = 0`` and
    ``v_r = a cos(2 pi r k2.x) k2/|k2|``.
    """
    if grid.dim != 2:
        raise ValueError("divcurl_pair is two-dimensional")
    k1 = np.asarray(k1, dtype=float)
    k2 = np.asarray(k2, dtype=float)
    if not (np.any(k1) and np.any(k2)):
        raise ValueError("directions must be nonzero")
    if abs(k1 @ k2) > 1e-12:
        raise ValueError("divcurl_pair needs orthogonal directions k1 . k2 = 0")
    profile = ConstantProfile(1.0, 2) if profile is None else profile
    a = _as_field(grid, profile)
    X, Y = grid.coords

    def potential(r, k):
        _check_band(grid, r * k, r)
        return Field(grid, a.values * np.sin(2 * np.pi * r * (k[0] * X + k[1] * Y)))

    def gen_u(r):
        s = potential(r, k1) / (2 * np.pi * r * np.linalg.norm(k1))
        return (-_spectral_derivative(s, 1), _spectral_derivative(s, 0))

    def gen_v(r):
        s = potential(r, k2) / (2 * np.pi * r * np.linalg.norm(k2))
        return (_spectral_derivative(s, 0), _spectral_derivative(s, 1))

    grad_a = [np.abs(_spectral_derivative(a, ax).values) for ax in range(2)]
    # spectral differentiation is global, so members are not exactly zero outside supp(a)
    box = np.array([[0.0, 1.0], [0.0, 1.0]])

    # slack for the aliasing error of spectral differentiation, from the profile's outer-band spectrum
    xi = grid.frequencies
    outer = np.max(np.abs(xi) / (np.asarray(grid.sizes) / 4), axis=-1) >= 1
    a_hat = np.abs(forward_transform(a))[outer]
    xi_norm = np.linalg.norm(xi[outer], axis=-1)

    def dominating(k):
        kn = np.linalg.norm(k)
        # |u_j| <= |a| + |grad a| / (2 pi |k|) for r >= 1 in the continuum
        bound = np.abs(a.values) + (grad_a[0] + grad_a[1]) / (2 * np.pi * kn)
        tail = 2 * float(np.sum(a_hat * (1 + xi_norm / kn)))
        return Field(grid, bound + max(tail, 1e-6 * bound.max()))

    zero = grid.zeros()
    common = dict(grid=grid, lp_exponent=np.inf, support_box=box)
    bound = float(np.max(np.abs(a.values)) + max(g.max() for g in grad_a) / (2 * np.pi))
    u = SequenceFamily(label=f"{label}-u", generator=gen_u, weak_limit=(zero, zero), lp_bound=bound,
                       dominating=(dominating(k1),) * 2,
                       params={"kind": "divcurl", "role": "u", "k1": k1.tolist(), "k2": k2.tolist()}, **common)
    v = SequenceFamily(label=f"{label}-v", generator=gen_v, weak_limit=(zero, zero), lp_bound=bound,
                       dominating=(dominating(k2),) * 2,
                       params={"kind": "divcurl", "role": "v", "k1": k1.tolist(), "k2": k2.tolist()}, **common)
    return u, v


def parabolic_pair(grid: Grid, a_coeffs, profile, tau: float = 0.25, k=None, seed_phase: str = "cosine",
                   label: str = "parabolic", reject_fraction: float = 1e-3) -> SequenceFamily:
    """Pair ``(u1_r, u2_r)`` on the ``(t, x)`` torus with ``d_t u1 = sum_kl d_kl(a_kl u2)`` exactly.

    The seed is ``u2_r = b(t,x) g(2 pi (tau r^2 t + r k.x))`` with the
    ``xi_0 = 0`` and Nyquist planes filtered out; ``u1_r`` is obtained by
    dividing ``sum_kl d_kl(a_kl u2_r)`` by ``2 pi i xi_0`` on the remaining
    modes. ``a_coeffs`` is a scalar, a constant ``d x d`` matrix, or a
    callable ``(*coords) -> d x d`` nested list/array of sampled values.
    Seeds whose filtered energy fraction exceeds ``reject_fraction`` are
    rejected. The parabolic scaling keeps both components bounded.
    """
    d = grid.dim - 1
    if d < 1:
        raise ValueError("parabolic_pair needs a (t, x) grid with at least one space axis")
    if tau <= 0:
        raise ValueError("tau must be positive; the seed needs a nonzero time frequency")
    k = np.ones(d) if k is None else np.asarray(k, dtype=float)
    A = _coefficient_matrix(grid, a_coeffs, d)
    b = _as_field(grid, profile)
    xi = grid.frequencies
    keep = (xi[..., 0] != 0) & ~grid.nyquist_mask
    t = grid.coords[0]
    kx = sum(kk * x for kk, x in zip(k, grid.coords[1:]))
    dropped = {}

    dxx = {}
    for i in range(d):
        for j in range(d):
            orders = [0] * (d + 1)
            orders[i + 1] += 1
            orders[j + 1] += 1
            dxx[i, j] = lattice_symbol(grid, lambda z, o=tuple(orders): derivative_symbol(z, o))

    def flux_hat(u2: Field) -> np.ndarray:
        total = np.zeros(grid.sizes, dtype=complex)
        for (i, j), sym in dxx.items():
            total += sym * forward_transform(u2 * A[i][j])
        return total

    def gen(r):
        freq = np.concatenate([[tau * r * r], r * k])
        if not float(tau * r * r).is_integer():
            raise ValueError(f"tau r^2 must be an integer for a periodic seed (r={r:g})")
        _check_band(grid, freq, r)
        arg = 2 * np.pi * (tau * r * r * t + r * kx)
        g = np.cos(arg) if seed_phase == "cosine" else np.exp(1j * arg)
        seed = b * g
        seed_hat = forward_transform(seed)
        frac = float(np.sum(np.abs(seed_hat[~keep]) ** 2) / max(np.sum(np.abs(seed_hat) ** 2), 1e-300))
        if frac > reject_fraction:
            raise ValueError(f"seed carries {frac:.2e} of its energy on xi_0 = 0 / Nyquist modes")
        u2 = inverse_transform(grid, seed_hat * keep)
        if seed_phase == "cosine":
            u2 = u2.real
        F = flux_hat(u2)
        with np.errstate(divide="ignore", invalid="ignore"):
            u1_hat = np.where(keep, F / (2j * np.pi * np.where(keep, xi[..., 0], 1.0)), 0.0)
        dropped[float(r)] = {"seed_filtered": frac,
                             "flux_dropped": float(np.sqrt(np.sum(np.abs(F[~keep]) ** 2)
                                                           / max(np.sum(np.abs(F) ** 2), 1e-300)))}
        u1 = inverse_transform(grid, u1_hat)
        if seed_phase == "cosine":
            u1 = u1.real
        return (u1, u2)

    zero = grid.zeros()
    bmax = float(np.max(np.abs(b.values)))
    amax = float(max(np.max(np.abs(np.asarray(A[i][j]))) for i in range(d) for j in range(d)))
    fam = SequenceFamily(
        label=label,
        grid=grid,
        generator=gen,
        weak_limit=(zero, zero),
        lp_exponent=np.inf,
        lp_bound=bmax * max(1.0, 2 * np.pi * amax * float(k @ k) / tau) * 1.5,
        support_box=np.array([[0.0, 1.0]] * grid.dim),
        params={"kind": "parabolic-pair", "tau": tau, "k": k.tolist(), "phase": seed_phase},
    )
    fam.diagnostics["dropped"] = dropped
    fam.diagnostics["a_matrix"] = A
    return fam


def _coefficient_matrix(grid: Grid, a_coeffs, d: int):
    """Nested ``d x d`` list of scalars or sampled arrays, checked positive definite."""
    if callable(a_coeffs):
        vals = a_coeffs(*grid.coords)
        A = [[np.broadcast_to(np.asarray(vals[i][j], dtype=float), grid.sizes) for j in range(d)] for i in range(d)]
        stack = np.stack([np.stack([A[i][j] for j in range(d)], axis=-1) for i in range(d)], axis=-2)
        sym = 0.5 * (stack + np.swapaxes(stack, -1, -2))
        if np.min(np.linalg.eigvalsh(sym)) <= 0:
            raise ValueError("coefficient matrix must be positive definite everywhere")
        return A
    mat = np.atleast_2d(np.asarray(a_coeffs, dtype=float))
    if mat.shape == (1, 1) and d > 1:
        mat = mat[0, 0] * np.eye(d)
    if mat.shape != (d, d):
        raise ValueError(f"coefficient matrix must be {d}x{d}")
    if np.min(np.linalg.eigvalsh(0.5 * (mat + mat.T))) <= 0:
        raise ValueError("coefficient matrix must be positive definite")
    return [[float(mat[i, j]) for j in range(d)] for i in range(d)]
