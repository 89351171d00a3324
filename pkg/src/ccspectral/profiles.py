"""Smooth bump functions used as sequence profiles and as test functions.

A profile is callable on coordinate arrays in R^d (``profile(*coords)``) and
can be sampled on a torus grid with :meth:`on`, which measures distance to the
centre by the nearest periodic image.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Field, Grid

__all__ = ["GaussianBump", "CompactBump", "ConstantProfile", "ProductProfile", "periodic_offsets"]


def periodic_offsets(grid: Grid, center) -> tuple[np.ndarray, ...]:
    """``x - center`` wrapped to ``[-1/2, 1/2)`` per axis."""
    return tuple(((x - c + 0.5) % 1.0) - 0.5 for x, c in zip(grid.coords, center))


class _Profile:
    label: str

    def on(self, grid: Grid) -> Field:
        raise NotImplementedError

    def __mul__(self, other):
        return ProductProfile(self, other)


@dataclass(frozen=True)
class GaussianBump(_Profile):
    """``amplitude * exp(-|x - center|^2 / (2 width^2))``, periodised on the torus."""

    center: tuple
    width: float = 0.06
    amplitude: float = 1.0
    label: str = "gauss"

    def __call__(self, *coords):
        r2 = sum((x - c) ** 2 for x, c in zip(coords, self.center))
        return self.amplitude * np.exp(-r2 / (2 * self.width**2))

    def on(self, grid: Grid) -> Field:
        # sum over neighbouring images so the sampled function is smooth and periodic
        out = np.zeros(grid.sizes)
        offs = periodic_offsets(grid, self.center)
        images = (-1, 0, 1)
        for shift in np.ndindex(*(3,) * grid.dim):
            r2 = sum((o + images[s]) ** 2 for o, s in zip(offs, shift))
            out = out + np.exp(-r2 / (2 * self.width**2))
        return Field(grid, self.amplitude * out)

    @property
    def support_box(self):
        return np.array([[0.0, 1.0]] * len(self.center))

    def l1_norm(self) -> float:
        d = len(self.center)
        return abs(self.amplitude) * (2 * np.pi * self.width**2) ** (d / 2)


@dataclass(frozen=True)
class CompactBump(_Profile):
    """``amplitude * exp(1 - 1/(1 - s^2))`` for ``s = |x - center|/radius < 1``, else 0."""

    center: tuple
    radius: float = 0.25
    amplitude: float = 1.0
    label: str = "bump"

    def __post_init__(self):
        if not 0 < self.radius < 0.5:
            raise ValueError("bump radius must lie in (0, 1/2)")

    def _eval(self, offsets):
        s2 = sum(o**2 for o in offsets) / self.radius**2
        inside = s2 < 1
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            val = np.exp(1.0 - 1.0 / np.where(inside, 1.0 - s2, 1.0))
        return self.amplitude * np.where(inside, val, 0.0)

    def __call__(self, *coords):
        return self._eval([x - c for x, c in zip(coords, self.center)])

    def on(self, grid: Grid) -> Field:
        return Field(grid, np.broadcast_to(self._eval(periodic_offsets(grid, self.center)), grid.sizes).copy())

    @property
    def support_box(self):
        c = np.asarray(self.center, dtype=float)
        return np.stack([c - self.radius, c + self.radius], axis=-1)


@dataclass(frozen=True)
class ConstantProfile(_Profile):
    value: float = 1.0
    dim: int = 1
    label: str = "const"

    def __call__(self, *coords):
        return self.value * np.ones(np.broadcast(*coords).shape)

    def on(self, grid: Grid) -> Field:
        return Field(grid, np.full(grid.sizes, float(self.value)))

    @property
    def support_box(self):
        return np.array([[0.0, 1.0]] * self.dim)


@dataclass(frozen=True)
class ProductProfile(_Profile):
    first: object
    second: object

    @property
    def label(self):
        return f"{self.first.label}*{self.second.label}"

    def __call__(self, *coords):
        return self.first(*coords) * self.second(*coords)

    def on(self, grid: Grid) -> Field:
        return self.first.on(grid) * self.second.on(grid)

    @property
    def support_box(self):
        a, b = self.first.support_box, self.second.support_box
        return np.stack([np.maximum(a[:, 0], b[:, 0]), np.minimum(a[:, 1], b[:, 1])], axis=-1)
