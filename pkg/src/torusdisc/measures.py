"""Canonical invariant measures of discrete maps, kept in exact rationals.

The invariant measure of a finite map is uniform on each cycle, with total
cycle weight proportional to the size of its basin of attraction; starting
from the uniform measure on a subset instead replaces basin sizes by their
intersection with the subset.  All masses are exact fractions; floats only
appear when a measure is rasterized into a log-scale density image.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from .errors import DomainError, TilingError
from .funcgraph import BasinLabeling, analyze
from .torusmaps import DiscreteMap

FLOOR = float("-inf")  # sentinel for zero-mass pixels, below any real log-mass


@dataclass(frozen=True)
class CycleAtoms:
    """One cycle's cells, each carrying mass numer/denom."""

    cells: np.ndarray
    numer: int
    denom: int


class DiscreteMeasure:
    """Atomic probability measure supported on cycles of a grid map."""

    def __init__(self, grid, cycles: Iterable[CycleAtoms]):
        self.grid = grid
        self.cycles = [c for c in cycles if c.numer != 0]

    def total_mass(self) -> Fraction:
        return sum(
            (Fraction(c.numer * len(c.cells), c.denom) for c in self.cycles),
            Fraction(0),
        )

    def max_atom(self) -> Fraction:
        if not self.cycles:
            return Fraction(0)
        return max(Fraction(c.numer, c.denom) for c in self.cycles)

    def atoms(self) -> dict:
        """Cell linearization -> exact mass (intended for modest supports)."""
        out = {}
        for c in self.cycles:
            mass = Fraction(c.numer, c.denom)
            for cell in c.cells.tolist():
                out[cell] = out.get(cell, Fraction(0)) + mass
        return out

    def support(self) -> np.ndarray:
        if not self.cycles:
            return np.array([], dtype=np.int64)
        return np.unique(np.concatenate([c.cells for c in self.cycles]))


def invariant_measure(s: DiscreteMap, labeling: BasinLabeling) -> DiscreteMeasure:
    """Closed form of the Cesaro limit of pushforwards of the uniform measure:
    each cell of a cycle with basin b and length l carries mass b/(q*l)."""
    q = s.grid.q
    if labeling.cycle_id.size != q:
        raise DomainError(
            f"labeling covers {labeling.cycle_id.size} cells, map has {q}"
        )
    cycles = []
    for cid in range(len(labeling.cycle_len)):
        length = int(labeling.cycle_len[cid])
        basin = int(labeling.basin_count[cid])
        cycles.append(
            CycleAtoms(cells=labeling.cycle_cells(cid), numer=basin, denom=q * length)
        )
    return DiscreteMeasure(s.grid, cycles)


def restricted_measure(s: DiscreteMap, subset) -> DiscreteMeasure:
    """Invariant measure started from the uniform measure on a cell subset."""
    subset = np.unique(np.asarray(list(subset), dtype=np.int64))
    if subset.size == 0:
        raise DomainError("subset must be nonempty")
    _, labeling = analyze(s)
    n = int(subset.size)
    hits = np.bincount(
        labeling.cycle_id[subset], minlength=len(labeling.cycle_len)
    )
    cycles = []
    for cid in range(len(labeling.cycle_len)):
        b = int(hits[cid])
        if b == 0:
            continue
        length = int(labeling.cycle_len[cid])
        cycles.append(
            CycleAtoms(cells=labeling.cycle_cells(cid), numer=b, denom=n * length)
        )
    return DiscreteMeasure(s.grid, cycles)


def pushforward(m: DiscreteMeasure, s: DiscreteMap) -> dict:
    """Exact atom map of s_* m, for invariance checks."""
    out = {}
    for c in m.cycles:
        mass = Fraction(c.numer, c.denom)
        for cell in s.image_of(c.cells).tolist():
            out[cell] = out.get(cell, Fraction(0)) + mass
    return out


@dataclass
class DensityImage:
    """px-by-px grid of log10 pixel masses; zero-mass pixels hold -inf."""

    px: int
    values: np.ndarray

    def save(self, path) -> None:
        np.savez(path, px=self.px, values=self.values)

    @classmethod
    def load(cls, path) -> "DensityImage":
        data = np.load(path)
        return cls(px=int(data["px"]), values=data["values"])


def _check_tiling(m: DiscreteMeasure, px: int) -> int:
    k = m.grid.k
    if px < 1:
        raise DomainError(f"px must be positive, got {px}")
    if px > k or k % px != 0:
        raise TilingError(f"px={px} must divide the grid resolution k={k}")
    return k


def coarse_masses(m: DiscreteMeasure, px: int):
    """Exact pixel masses of m aggregated onto a px-by-px tiling."""
    k = _check_tiling(m, px)
    masses = [[Fraction(0)] * px for _ in range(px)]
    for c in m.cycles:
        mass = Fraction(c.numer, c.denom)
        pi = (c.cells // k) * px // k
        pj = (c.cells % k) * px // k
        for a, b in zip(pi.tolist(), pj.tolist()):
            masses[a][b] += mass
    return masses


def coarse_density(m: DiscreteMeasure, px: int) -> DensityImage:
    masses = coarse_masses(m, px)
    values = np.full((px, px), FLOOR)
    for a in range(px):
        for b in range(px):
            if masses[a][b] > 0:
                values[a, b] = math.log10(float(masses[a][b]))
    return DensityImage(px=px, values=values)


def coarse_total_variation(a: DiscreteMeasure, b: DiscreteMeasure, px: int) -> float:
    """Half the L1 distance between pixel masses at resolution px."""
    ma = coarse_masses(a, px)
    mb = coarse_masses(b, px)
    tv = sum(
        abs(ma[i][j] - mb[i][j]) for i in range(px) for j in range(px)
    )
    return float(tv) / 2.0
