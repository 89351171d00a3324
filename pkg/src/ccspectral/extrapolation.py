"""Limit estimates for ladders of pairings.

The r-ladder is extrapolated in ``h = 1/r`` by Richardson's rule on the last
pair, ``f_n + (f_n - f_{n-1}) / ((h_{n-1}/h_n)^p - 1)``. The order ``p`` is
estimated from the last three points (at least 1; first order when fewer
points exist or the differences are at the noise floor). A ladder whose raw
differences grow is marked unconverged and its error bar is widened to the
largest raw difference.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["Extrapolation", "richardson", "last_value"]


@dataclass
class Extrapolation:
    value: complex
    error: float
    converged: bool
    steps: list = field(default_factory=list)
    raw: list = field(default_factory=list)
    differences: list = field(default_factory=list)
    first_order: list = field(default_factory=list)
    method: str = "richardson"

    def to_dict(self) -> dict:
        c = complex(self.value)
        return {
            "value": [c.real, c.imag],
            "error": float(self.error),
            "converged": bool(self.converged),
            "method": self.method,
            "steps": [float(s) for s in self.steps],
            "raw": [[complex(v).real, complex(v).imag] for v in self.raw],
            "differences": [float(x) for x in self.differences],
            "first_order": [[complex(v).real, complex(v).imag] for v in self.first_order],
        }


def _check(steps, values):
    steps = np.asarray(steps, dtype=float)
    values = np.asarray(values, dtype=complex)
    if steps.ndim != 1 or len(steps) == 0 or len(steps) != len(values):
        raise ValueError("need matching nonempty step and value lists")
    if np.any(np.diff(steps) <= 0):
        raise ValueError("steps must be strictly increasing")
    if not np.all(np.isfinite(values)):
        raise ValueError("ladder contains non-finite values")
    return steps, values


def _monotone(diffs: np.ndarray, floor: float) -> bool:
    """Raw differences nonincreasing, ignoring those below the noise floor."""
    d = np.maximum(diffs, floor)
    return bool(np.all(np.diff(d) <= 0))


def _estimate_order(h: np.ndarray, diffs: np.ndarray, floor: float, max_order: float) -> float:
    """Order from the last two differences, ``d_i ~ C h_i^p``; 1 when undetermined."""
    if len(diffs) < 2 or diffs[-1] <= floor or diffs[-2] <= floor or diffs[-1] >= diffs[-2]:
        return 1.0
    p = np.log(diffs[-2] / diffs[-1]) / np.log(h[-2] / h[-1])
    return float(np.clip(p, 1.0, max_order))


def _extrapolate_pair(h, f, i, p):
    ratio = (h[i - 1] / h[i]) ** p
    return f[i] + (f[i] - f[i - 1]) / (ratio - 1.0)


def richardson(r_values, values, noise_rtol: float = 1e-12, scale: float | None = None,
               order: float | None = None, max_order: float = 8.0, conservative: bool = True) -> Extrapolation:
    """Extrapolate ``values(r)`` to ``r -> infinity`` assuming ``f(r) = f + C r^-p + ...``.

    ``order`` fixes ``p``; by default it is estimated from the last three
    points. The error compares the result with the extrapolant one step
    earlier (order refitted on the previous triple, or first order when only
    three points exist). ``conservative`` additionally floors the error at the
    last raw difference. ``scale`` sets the noise floor ``noise_rtol * scale``
    for the monotonicity test and the order estimate; by default it is the
    largest ``|value|``.
    """
    r, f = _check(r_values, values)
    h = 1.0 / r
    n = len(f)
    diffs = np.abs(np.diff(f))
    floor = noise_rtol * (np.max(np.abs(f)) if scale is None else scale)
    if n == 1:
        return Extrapolation(f[0], np.inf, False, r.tolist(), f.tolist(), [], [], "single")
    if order is None:
        p = _estimate_order(h, diffs, floor, max_order)
        p_prev = _estimate_order(h[:-1], diffs[:-1], floor, max_order) if n >= 4 else 1.0
    else:
        p = p_prev = float(order)
    pairs = np.array([_extrapolate_pair(h, f, i, p) for i in range(1, n)])
    value = pairs[-1]
    if n == 2:
        err = abs(value - f[-1])
    else:
        err = abs(value - _extrapolate_pair(h, f, n - 2, p_prev))
    if conservative:
        err = max(err, float(diffs[-1]))
    if diffs[-1] <= floor:
        value = f[-1]
        err = max(err if conservative else 0.0, float(diffs[-1]))
    converged = _monotone(diffs, floor)
    if not converged:
        err = max(err, float(diffs.max()))
    return Extrapolation(complex(value), float(err), converged, r.tolist(), f.tolist(),
                         diffs.tolist(), pairs.tolist(), f"richardson(p={p:.3g})")


def last_value(steps, values, noise_rtol: float = 1e-12, scale: float | None = None) -> Extrapolation:
    """Last entry as the limit, last difference as the error (used along truncation levels)."""
    s, f = _check(steps, values)
    diffs = np.abs(np.diff(f))
    floor = noise_rtol * (np.max(np.abs(f)) if scale is None else scale)
    err = float(diffs[-1]) if len(diffs) else 0.0
    converged = _monotone(diffs, floor) if len(diffs) else True
    if not converged:
        err = max(err, float(diffs.max()))
    return Extrapolation(complex(f[-1]), err, converged, s.tolist(), f.tolist(), diffs.tolist(), [], "last")
