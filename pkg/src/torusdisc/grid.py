"""Uniform discretization grids on the 2-torus.

A grid of resolution ``k`` places cell centers at ``(i/k, j/k)`` for
``0 <= i, j < k``.  Points are projected to the nearest center in the
wrap-around (quotient) metric; ties round half-up toward the larger index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, DomainError

# Largest admissible total cell count.  k = 12800 (q ~ 1.6e8) must fit with
# room to spare; anything past 2**34 cells is out of reach for this artifact.
DEFAULT_Q_LIMIT = 1 << 34


def mod1(x: float) -> float:
    """Reduce a real into [0, 1), robust for negative and near-integer inputs."""
    r = x - math.floor(x)
    return r - 1.0 if r >= 1.0 else r


def mod1_arr(x):
    r = x - np.floor(x)
    return np.where(r >= 1.0, r - 1.0, r)


@dataclass(frozen=True)
class GridSpec:
    """A uniform k x k subdivision of the torus; ``q = k**2`` cells."""

    k: int
    q: int

    @property
    def mesh(self) -> float:
        return 1.0 / self.k

    @property
    def half_mesh(self) -> float:
        return 0.5 / self.k


@dataclass(frozen=True)
class CellIndex:
    i: int
    j: int


@dataclass(frozen=True)
class TorusPoint:
    """A point of the torus with both coordinates reduced into [0, 1)."""

    x: float
    y: float

    def __post_init__(self):
        object.__setattr__(self, "x", mod1(self.x))
        object.__setattr__(self, "y", mod1(self.y))


def make_grid(k: int, q_limit: int = DEFAULT_Q_LIMIT) -> GridSpec:
    if k < 2:
        raise DomainError(f"grid resolution must be >= 2, got {k}")
    q = k * k
    if q > q_limit:
        raise CapacityError(
            f"grid of resolution {k} has {q} cells, exceeding the limit {q_limit}",
            required=q,
            available=q_limit,
        )
    return GridSpec(k=k, q=q)


def project(p: TorusPoint, g: GridSpec) -> CellIndex:
    """Nearest cell center per axis, ties rounding half-up."""
    k = g.k
    i = int(math.floor(p.x * k + 0.5)) % k
    j = int(math.floor(p.y * k + 0.5)) % k
    return CellIndex(i, j)


def project_arrays(xs, ys, k: int):
    i = np.floor(xs * k + 0.5).astype(np.int64) % k
    j = np.floor(ys * k + 0.5).astype(np.int64) % k
    return i, j


def cell_center(c: CellIndex, g: GridSpec) -> TorusPoint:
    if not (0 <= c.i < g.k and 0 <= c.j < g.k):
        raise DomainError(f"cell index {(c.i, c.j)} out of range for k={g.k}")
    return TorusPoint(c.i / g.k, c.j / g.k)


def lin(c: CellIndex, g: GridSpec) -> int:
    """Linearize a cell index into [0, q)."""
    return c.i * g.k + c.j


def cell_from_lin(n: int, g: GridSpec) -> CellIndex:
    if not (0 <= n < g.q):
        raise DomainError(f"linearization {n} out of range for q={g.q}")
    return CellIndex(n // g.k, n % g.k)


def wrap_distance(p: TorusPoint, q: TorusPoint) -> float:
    """Euclidean quotient distance on the flat torus."""
    dx = abs(p.x - q.x)
    dy = abs(p.y - q.y)
    dx = min(dx, 1.0 - dx)
    dy = min(dy, 1.0 - dy)
    return math.hypot(dx, dy)


def wrap_distance_arrays(ax, ay, bx, by):
    dx = np.abs(ax - bx)
    dy = np.abs(ay - by)
    dx = np.minimum(dx, 1.0 - dx)
    dy = np.minimum(dy, 1.0 - dy)
    return np.hypot(dx, dy)
