"""Periodic grids on the unit torus and grid functions with spectral views.

The transform convention is ``u_hat(xi) = int exp(-2 pi i x.xi) u(x) dx``,
discretised as ``fftn(values) / prod(N)``: the sample sum times the cell
volume. Frequencies are the integers ``-N/2 .. N/2 - 1`` on each axis, stored
in the usual FFT ordering.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft

__all__ = [
    "Grid",
    "Field",
    "GridMismatchError",
    "forward_transform",
    "inverse_transform",
    "lp_norm",
    "pair",
]


class GridMismatchError(ValueError):
    """Two fields that must share a grid do not."""


@dataclass(frozen=True)
class Grid:
    """Uniform periodic lattice on ``[0, 1)^d`` with ``sizes[k]`` points per axis."""

    sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(n) for n in np.atleast_1d(self.sizes))
        if not sizes:
            raise ValueError("grid needs at least one axis")
        for n in sizes:
            if n < 4 or n & (n - 1):
                raise ValueError(f"axis size {n} must be a power of two >= 4")
        object.__setattr__(self, "sizes", sizes)

    @property
    def dim(self) -> int:
        return len(self.sizes)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.sizes

    @property
    def npoints(self) -> int:
        return int(np.prod(self.sizes))

    @property
    def cell_volume(self) -> float:
        return 1.0 / self.npoints

    @cached_property
    def axes(self) -> tuple[np.ndarray, ...]:
        """1-d sample coordinates per axis."""
        return tuple(np.arange(n) / n for n in self.sizes)

    @cached_property
    def coords(self) -> tuple[np.ndarray, ...]:
        """Broadcastable coordinate arrays (sparse meshgrid)."""
        return tuple(np.meshgrid(*self.axes, indexing="ij", sparse=True))

    def points(self) -> np.ndarray:
        """Dense coordinates, shape ``(d, *sizes)``."""
        return np.stack(np.meshgrid(*self.axes, indexing="ij"))

    @cached_property
    def frequency_axes(self) -> tuple[np.ndarray, ...]:
        """Integer frequencies per axis in FFT ordering."""
        return tuple(np.fft.fftfreq(n, 1.0 / n).round().astype(np.int64) for n in self.sizes)

    @cached_property
    def frequencies(self) -> np.ndarray:
        """Dense integer frequency lattice, shape ``(*sizes, d)``, FFT ordering."""
        mesh = np.meshgrid(*self.frequency_axes, indexing="ij")
        return np.stack(mesh, axis=-1).astype(float)

    @cached_property
    def nyquist_mask(self) -> np.ndarray:
        """True where some frequency component equals ``-N_k/2``."""
        mask = np.zeros(self.sizes, dtype=bool)
        for k, n in enumerate(self.sizes):
            idx = [slice(None)] * self.dim
            idx[k] = n // 2
            mask[tuple(idx)] = True
        return mask

    def zero_mode_index(self) -> tuple[int, ...]:
        return (0,) * self.dim

    def in_band(self, freq) -> bool:
        """Whether an integer frequency vector lies strictly inside the Nyquist band."""
        freq = np.atleast_1d(freq)
        return bool(np.all(np.abs(freq) < np.asarray(self.sizes) / 2))

    def field(self, values) -> "Field":
        return Field(self, values)

    def zeros(self) -> "Field":
        return Field(self, np.zeros(self.sizes))

    def ones(self) -> "Field":
        return Field(self, np.ones(self.sizes))

    def evaluate(self, func) -> "Field":
        """Sample ``func(*coords)`` on the grid."""
        return Field(self, np.broadcast_to(func(*self.coords), self.sizes).copy())

    def plane_wave(self, k, amplitude=1.0) -> "Field":
        """``amplitude * exp(2 pi i k.x)``."""
        k = np.asarray(k, dtype=float)
        phase = sum(kk * x for kk, x in zip(k, self.coords))
        return Field(self, amplitude * np.exp(2j * np.pi * phase) * np.ones(self.sizes))

    def random_field(self, rng, complex_values=False, bandlimit=None) -> "Field":
        """Pseudo-random field; ``bandlimit`` keeps only modes with max|xi_k| < bandlimit."""
        values = rng.standard_normal(self.sizes)
        if complex_values:
            values = values + 1j * rng.standard_normal(self.sizes)
        f = Field(self, values)
        if bandlimit is not None:
            keep = np.all(np.abs(self.frequencies) < bandlimit, axis=-1)
            coeffs = forward_transform(f) * keep
            f = inverse_transform(self, coeffs)
            if not complex_values:
                f = f.real
        return f


class Field:
    """Samples of a (complex) function on a :class:`Grid`.

    Arithmetic with scalars, arrays of the grid shape and other fields on the
    same grid is supported; the result is a new field.
    """

    __slots__ = ("grid", "values", "_spectrum")
    __array_priority__ = 100

    def __init__(self, grid: Grid, values):
        values = np.asarray(values)
        if values.shape != grid.sizes:
            raise ValueError(f"values shape {values.shape} does not match grid {grid.sizes}")
        if not (np.issubdtype(values.dtype, np.floating) or np.issubdtype(values.dtype, np.complexfloating)):
            values = values.astype(float)
        self.grid = grid
        self.values = values
        self._spectrum = None

    def __repr__(self):
        return f"Field(grid={self.grid.sizes}, dtype={self.values.dtype})"

    @property
    def spectrum(self) -> np.ndarray:
        """Cached forward transform."""
        if self._spectrum is None:
            self._spectrum = forward_transform(self)
        return self._spectrum

    @property
    def real(self) -> "Field":
        return Field(self.grid, self.values.real.copy())

    @property
    def imag(self) -> "Field":
        return Field(self.grid, self.values.imag.copy())

    def conj(self) -> "Field":
        return Field(self.grid, np.conj(self.values))

    def abs(self) -> "Field":
        return Field(self.grid, np.abs(self.values))

    def is_real(self, rtol=0.0) -> bool:
        if not np.iscomplexobj(self.values):
            return True
        scale = np.max(np.abs(self.values), initial=0.0)
        return bool(np.max(np.abs(self.values.imag), initial=0.0) <= rtol * scale)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def mean(self) -> complex:
        return self.values.mean()

    def _other(self, other):
        if isinstance(other, Field):
            if other.grid != self.grid:
                raise GridMismatchError(f"{self.grid.sizes} vs {other.grid.sizes}")
            return other.values
        return other

    def __add__(self, other):
        return Field(self.grid, self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Field(self.grid, self.values - self._other(other))

    def __rsub__(self, other):
        return Field(self.grid, self._other(other) - self.values)

    def __mul__(self, other):
        return Field(self.grid, self.values * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return Field(self.grid, self.values / self._other(other))

    def __neg__(self):
        return Field(self.grid, -self.values)


def forward_transform(f: Field) -> np.ndarray:
    """Spectral coefficients of ``f`` indexed like ``f.grid.frequencies``."""
    return sfft.fftn(f.values, norm="forward")


def inverse_transform(grid: Grid, coefficients) -> Field:
    """Field whose forward transform is ``coefficients``."""
    coefficients = np.asarray(coefficients)
    if coefficients.shape != grid.sizes:
        raise ValueError(f"coefficient shape {coefficients.shape} does not match grid {grid.sizes}")
    return Field(grid, sfft.ifftn(coefficients, norm="forward"))


def lp_norm(f: Field, p: float) -> float:
    """Quadrature ``(int |f|^p dx)^(1/p)``; ``p = inf`` gives the max modulus."""
    if p < 1:
        raise ValueError(f"lp_norm needs p >= 1, got {p}")
    mod = np.abs(f.values)
    if np.isinf(p):
        return float(mod.max())
    if p == 2:
        return float(np.sqrt(np.mean(mod * mod)))
    if p == 1:
        return float(np.mean(mod))
    return float(np.mean(mod**p) ** (1.0 / p))


def pair(f: Field, g: Field) -> complex:
    """Quadrature of ``int f conj(g) dx``."""
    if f.grid != g.grid:
        raise GridMismatchError(f"{f.grid.sizes} vs {g.grid.sizes}")
    return complex(np.vdot(g.values, f.values)) * f.grid.cell_volume
