"""Shadowing diagnostics: how far discrete orbits stray from the
double-precision continuous orbit, plus Hausdorff distances between cell
sets and cross-resolution convergence of the maximal invariant set.

The continuous reference orbit is itself floating point, so the defect
measures discretization error relative to double-precision iteration.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import CapacityError, DomainError
from .funcgraph import analyze
from .grid import GridSpec, TorusPoint, make_grid, wrap_distance_arrays
from .torusmaps import DiscreteMap, MapExpr, discretize, eval_arrays

PAIRWISE_GUARD = 10**8


@dataclass
class ShadowReport:
    defect: float
    first_violation: Optional[int]
    horizon: int


def shadowing_defect(
    f: MapExpr,
    g: GridSpec,
    x: TorusPoint,
    horizon: int,
    delta: Optional[float] = None,
    table: Optional[DiscreteMap] = None,
) -> ShadowReport:
    """Max over m <= horizon of d(f^m(x), center of the discrete orbit of x).

    `first_violation` is the first step where the distance exceeded delta,
    when a delta is given.  A pre-materialized discretization can be passed
    to amortize table construction across calls.
    """
    if horizon < 1:
        raise DomainError("horizon must be >= 1")
    s = table if table is not None else discretize(f, g, materialize=False)
    k = g.k
    xs = np.array([x.x])
    ys = np.array([x.y])
    cell = s.image_of(np.array([int(np.floor(x.x * k + 0.5)) % k * k
                                + int(np.floor(x.y * k + 0.5)) % k]))
    defect = 0.0
    first = None
    for m in range(1, horizon + 1):
        xs, ys = eval_arrays(f, xs, ys)
        d = float(
            wrap_distance_arrays(xs, ys, (cell // k) / k, (cell % k) / k)[0]
        )
        if d > defect:
            defect = d
        if delta is not None and first is None and d > delta:
            first = m
        if m < horizon:
            cell = s.image_of(cell)
    return ShadowReport(defect=defect, first_violation=first, horizon=horizon)


def shadow_fraction(
    f: MapExpr,
    g: GridSpec,
    delta: float,
    horizon: int,
    sample_count: int,
    seed: int = 0,
) -> float:
    """Fraction of seeded uniform sample points whose defect stays <= delta."""
    if sample_count < 1:
        raise DomainError("sample_count must be >= 1")
    if horizon < 1:
        raise DomainError("horizon must be >= 1")
    rng = np.random.Generator(np.random.Philox(key=seed))
    xs = rng.random(sample_count)
    ys = rng.random(sample_count)
    k = g.k
    s = discretize(f, g)
    table = s.as_table()
    i = np.floor(xs * k + 0.5).astype(np.int64) % k
    j = np.floor(ys * k + 0.5).astype(np.int64) % k
    cell = (i * k + j).astype(np.int64)
    defect = np.zeros(sample_count)
    for m in range(1, horizon + 1):
        xs, ys = eval_arrays(f, xs, ys)
        cell = table[cell].astype(np.int64)
        d = wrap_distance_arrays(xs, ys, (cell // k) / k, (cell % k) / k)
        np.maximum(defect, d, out=defect)
    return float(np.count_nonzero(defect <= delta)) / sample_count


def _directed_sup_min(ax, ay, bx, by, chunk=4096):
    worst = 0.0
    for lo in range(0, ax.size, chunk):
        hi = min(lo + chunk, ax.size)
        d = wrap_distance_arrays(
            ax[lo:hi, None], ay[lo:hi, None], bx[None, :], by[None, :]
        )
        worst = max(worst, float(d.min(axis=1).max()))
    return worst


def hausdorff_points(ax, ay, bx, by) -> float:
    return max(_directed_sup_min(ax, ay, bx, by), _directed_sup_min(bx, by, ax, ay))


def hausdorff_distance(a, b, g: GridSpec) -> float:
    """Hausdorff distance between two nonempty cell sets, via cell centers."""
    a = np.asarray(list(a), dtype=np.int64)
    b = np.asarray(list(b), dtype=np.int64)
    if a.size == 0 or b.size == 0:
        raise DomainError("cell sets must be nonempty")
    if a.size * b.size > PAIRWISE_GUARD:
        raise CapacityError(
            f"|A|*|B| = {a.size * b.size} exceeds the pairwise guard {PAIRWISE_GUARD}",
            required=a.size * b.size,
            available=PAIRWISE_GUARD,
        )
    k = g.k
    return hausdorff_points((a // k) / k, (a % k) / k, (b // k) / k, (b % k) / k)


@dataclass
class OmegaSeriesEntry:
    k: int
    card_omega: int
    hausdorff_to_previous: Optional[float]
    status: str = "ok"


def omega_convergence_series(f: MapExpr, ks, max_bytes: Optional[int] = None):
    """Per-resolution maximal invariant sets and successive Hausdorff gaps."""
    ks = list(ks)
    if any(b <= a for a, b in zip(ks, ks[1:])):
        raise DomainError("resolutions must be strictly increasing")
    out = []
    prev_pts = None
    for k in ks:
        g = make_grid(k)
        try:
            s = discretize(f, g, max_bytes=max_bytes)
            _, labeling = analyze(s)
            omega = labeling.omega_cells()
            px_, py_ = (omega // k) / k, (omega % k) / k
            gap = None
            if prev_pts is not None:
                if omega.size * prev_pts[0].size <= PAIRWISE_GUARD:
                    gap = hausdorff_points(px_, py_, prev_pts[0], prev_pts[1])
            out.append(OmegaSeriesEntry(k=k, card_omega=omega.size, hausdorff_to_previous=gap))
            prev_pts = (px_, py_)
        except CapacityError:
            out.append(
                OmegaSeriesEntry(k=k, card_omega=-1, hausdorff_to_previous=None,
                                 status="skipped-capacity")
            )
            prev_pts = None
    return out
