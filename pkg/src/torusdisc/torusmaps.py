"""Torus maps under study: composition trees, evaluation, and discretization.

A map expression is a composition of atoms applied right-to-left:
vertical/horizontal shears by 1-periodic scalar fields, integer linear
automorphisms with determinant +-1, and the identity.  The built-in maps
f1..f4 are small perturbations of the identity or of the standard Anosov
automorphism (x, y) -> (x + y, x + 2y).

Floating-point policy: double precision, fixed left-to-right term summation,
trig arguments reduced mod 1 before scaling by 2*pi so argument-reduction
error stays bounded.  Compositions made only of linear automorphisms are
discretized in exact integer arithmetic on cell indices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import CapacityError, DomainError, UnknownNameError
from .grid import (
    GridSpec,
    TorusPoint,
    project_arrays,
    wrap_distance_arrays,
)

_TWO_PI = 2.0 * math.pi
_CHUNK = 1 << 22


# ---------------------------------------------------------------------------
# scalar fields


@dataclass(frozen=True)
class TrigTerm:
    """coef * kind(2*pi * freq * var) with kind in {cos, sin}, var in {x, y}."""

    coef: float
    freq: int
    kind: str
    var: str

    def __post_init__(self):
        if self.kind not in ("cos", "sin"):
            raise DomainError(f"trig kind must be 'cos' or 'sin', got {self.kind!r}")
        if self.var not in ("x", "y"):
            raise DomainError(f"trig var must be 'x' or 'y', got {self.var!r}")
        if int(self.freq) != self.freq or self.freq < 1:
            raise DomainError(f"trig frequency must be a positive integer, got {self.freq!r}")


@dataclass(frozen=True)
class TanhTerm:
    """coef * tanh(slope * inner(x, y)) with a trigonometric inner wave."""

    coef: float
    slope: float
    inner: TrigTerm


Term = Union[TrigTerm, TanhTerm]


@dataclass(frozen=True)
class ScalarField:
    """A finite sum of terms, 1-periodic in each variable."""

    terms: tuple


def _trig_eval(t: TrigTerm, x, y):
    v = x if t.var == "x" else y
    arg = t.freq * v
    arg = arg - np.floor(arg)
    w = np.cos(_TWO_PI * arg) if t.kind == "cos" else np.sin(_TWO_PI * arg)
    return t.coef * w


def _term_eval(t: Term, x, y):
    if isinstance(t, TrigTerm):
        return _trig_eval(t, x, y)
    return t.coef * np.tanh(t.slope * _trig_eval(t.inner, x, y))


def _field_eval(field: ScalarField, x, y):
    acc = x * 0.0
    for t in field.terms:
        acc = acc + _term_eval(t, x, y)
    return acc


# ---------------------------------------------------------------------------
# map expressions


@dataclass(frozen=True)
class Identity:
    pass


@dataclass(frozen=True)
class ShearY:
    """(x, y) -> (x, y + p(x, y))."""

    field: ScalarField


@dataclass(frozen=True)
class ShearX:
    """(x, y) -> (x + q(x, y), y)."""

    field: ScalarField


@dataclass(frozen=True)
class LinearAuto:
    """(x, y) -> (a x + b y, c x + d y) mod 1, with |det| = 1."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if abs(det) != 1:
            raise DomainError(f"linear automorphism needs |det| = 1, got det = {det}")


Atom = Union[Identity, ShearY, ShearX, LinearAuto]


@dataclass(frozen=True)
class MapExpr:
    """Composition of atoms, applied right-to-left (last atom acts first)."""

    atoms: tuple


def _mod1(v):
    r = v - np.floor(v)
    return np.where(r >= 1.0, r - 1.0, r)


def _atom_eval(atom: Atom, x, y):
    if isinstance(atom, Identity):
        return x, y
    if isinstance(atom, ShearY):
        return x, _mod1(y + _field_eval(atom.field, x, y))
    if isinstance(atom, ShearX):
        return _mod1(x + _field_eval(atom.field, x, y)), y
    if isinstance(atom, LinearAuto):
        nx = _mod1(atom.a * x + atom.b * y)
        ny = _mod1(atom.c * x + atom.d * y)
        return nx, ny
    raise DomainError(f"unknown atom type {type(atom).__name__}")


def eval_arrays(f: MapExpr, x, y):
    """Vectorized evaluation; inputs and outputs are coordinate arrays in [0, 1)."""
    for atom in reversed(f.atoms):
        x, y = _atom_eval(atom, x, y)
    return x, y


def eval_map(f: MapExpr, p: TorusPoint) -> TorusPoint:
    # Route through the array path so single-point and bulk evaluation are
    # bit-identical (numpy's scalar and SIMD ufunc loops may differ by an ulp).
    x, y = eval_arrays(f, np.array([p.x]), np.array([p.y]))
    return TorusPoint(float(x[0]), float(y[0]))


def linear_matrix(f: MapExpr) -> Optional[np.ndarray]:
    """Integer matrix of f if it is built purely from linear atoms, else None."""
    m = np.eye(2, dtype=np.int64)
    for atom in f.atoms:
        if isinstance(atom, Identity):
            continue
        if isinstance(atom, LinearAuto):
            m = m @ np.array([[atom.a, atom.b], [atom.c, atom.d]], dtype=np.int64)
        else:
            return None
    return m


# ---------------------------------------------------------------------------
# built-in maps


def _pert_field_p1() -> ScalarField:
    return ScalarField(
        (
            TrigTerm(1.0 / 259.0, 227, "cos", "x"),
            TrigTerm(1.0 / 271.0, 253, "sin", "x"),
        )
    )


def _pert_field_q1() -> ScalarField:
    return ScalarField(
        (
            TrigTerm(1.0 / 287.0, 241, "cos", "y"),
            TrigTerm(1.0 / 263.0, 217, "sin", "y"),
        )
    )


def _tanh(coef, slope, freq, var):
    return TanhTerm(coef, slope, TrigTerm(1.0, freq, "cos", var))


def _build_builtins():
    p1 = ShearY(_pert_field_p1())
    q1 = ShearX(_pert_field_q1())
    anosov = LinearAuto(1, 1, 1, 2)

    p3 = ShearY(
        ScalarField(
            (
                TrigTerm(1.0 / 259.0, 227, "cos", "y"),
                TrigTerm(1.0 / 271.0, 233, "sin", "x"),
            )
        )
    )
    q3 = ShearX(
        ScalarField(
            (
                TrigTerm(1.0 / 287.0, 241, "cos", "y"),
                TrigTerm(1.0 / 263.0, 217, "sin", "y"),
                TrigTerm(1.0 / 263.0, 271, "cos", "x"),
            )
        )
    )

    p4 = ShearY(
        ScalarField(
            (
                _tanh(1.0 / 259.0, 50.0, 1, "y"),
                _tanh(1.0 / 271.0, 50.0, 5, "x"),
            )
        )
    )
    q4 = ShearX(
        ScalarField(
            (
                _tanh(1.0 / 287.0, 50.0, 1, "y"),
                _tanh(1.0 / 263.0, 50.0, 7, "y"),
                _tanh(1.0 / 263.0, 50.0, 3, "x"),
            )
        )
    )

    return {
        "identity": MapExpr((Identity(),)),
        "anosov": MapExpr((anosov,)),
        "f1": MapExpr((p1, q1, p1)),
        "f2": MapExpr((p1, q1, p1, anosov)),
        "f3": MapExpr((q3, p3)),
        "f4": MapExpr((p4, q4, p4)),
    }


_BUILTINS = _build_builtins()


def builtin_map(name: str) -> MapExpr:
    try:
        return _BUILTINS[name]
    except KeyError:
        raise UnknownNameError(name, _BUILTINS.keys()) from None


# ---------------------------------------------------------------------------
# discretization


def table_dtype(q: int):
    return np.uint32 if q <= (1 << 32) else np.uint64


class DiscreteMap:
    """A finite self-map of a grid's cells, materialized or evaluated lazily."""

    def __init__(self, grid: GridSpec, table=None, expr: Optional[MapExpr] = None):
        if table is None and expr is None:
            raise DomainError("DiscreteMap needs a table or a map expression")
        self.grid = grid
        self.expr = expr
        self._table = table

    @classmethod
    def from_table(cls, table, grid: GridSpec) -> "DiscreteMap":
        table = np.asarray(table)
        if table.shape != (grid.q,):
            raise DomainError(f"table has {table.shape} entries, expected {grid.q}")
        if table.size and (int(table.min()) < 0 or int(table.max()) >= grid.q):
            raise DomainError("table entries must be cell linearizations in [0, q)")
        return cls(grid, table=table.astype(table_dtype(grid.q)))

    @property
    def materialized(self) -> bool:
        return self._table is not None

    def image_of(self, lins):
        """Images of an array of cell linearizations."""
        lins = np.asarray(lins, dtype=np.int64)
        if self._table is not None:
            return self._table[lins].astype(np.int64)
        return _compute_entries(self.expr, self.grid, lins)

    def __call__(self, n: int) -> int:
        return int(self.image_of(np.array([n]))[0])

    def as_table(self):
        """The full table, materializing once if the map is lazy."""
        if self._table is None:
            self._table = _materialize(self.expr, self.grid)
        return self._table


def _compute_entries(f: MapExpr, g: GridSpec, lins):
    k = g.k
    m = linear_matrix(f)
    i = lins // k
    j = lins % k
    if m is not None:
        a, b = int(m[0, 0]), int(m[0, 1])
        c, d = int(m[1, 0]), int(m[1, 1])
        return ((a * i + b * j) % k) * k + ((c * i + d * j) % k)
    x, y = eval_arrays(f, i / k, j / k)
    i2, j2 = project_arrays(x, y, k)
    return i2 * k + j2


def _materialize(f: MapExpr, g: GridSpec):
    out = np.empty(g.q, dtype=table_dtype(g.q))
    for lo in range(0, g.q, _CHUNK):
        hi = min(lo + _CHUNK, g.q)
        lins = np.arange(lo, hi, dtype=np.int64)
        out[lo:hi] = _compute_entries(f, g, lins)
    return out


def discretize(
    f: MapExpr,
    g: GridSpec,
    materialize: bool = True,
    max_bytes: Optional[int] = None,
) -> DiscreteMap:
    """The discretization of f on g: project-each-image-of-a-cell-center."""
    if materialize:
        need = g.q * np.dtype(table_dtype(g.q)).itemsize
        if max_bytes is not None and need > max_bytes:
            raise CapacityError(
                f"materializing k={g.k} needs {need} bytes, budget is {max_bytes}",
                required=need,
                available=max_bytes,
            )
        return DiscreteMap(g, table=_materialize(f, g), expr=f)
    return DiscreteMap(g, table=None, expr=f)


# ---------------------------------------------------------------------------
# distances


def grid_sup_distance(f: MapExpr, s: DiscreteMap) -> float:
    """Sup over cells of d(f(center), center of the image cell of s)."""
    g = s.grid
    k = g.k
    m = linear_matrix(f)
    best = 0.0
    for lo in range(0, g.q, _CHUNK):
        hi = min(lo + _CHUNK, g.q)
        lins = np.arange(lo, hi, dtype=np.int64)
        i = lins // k
        j = lins % k
        if m is not None:
            # Exact image indices; equal cells give distance exactly 0.
            a, b = int(m[0, 0]), int(m[0, 1])
            c, d = int(m[1, 0]), int(m[1, 1])
            fx = ((a * i + b * j) % k) / k
            fy = ((c * i + d * j) % k) / k
        else:
            fx, fy = eval_arrays(f, i / k, j / k)
        t = s.image_of(lins)
        dist = wrap_distance_arrays(fx, fy, (t // k) / k, (t % k) / k)
        best = max(best, float(dist.max()))
    return best


_PLASTIC = 1.324717957244746


def low_discrepancy_points(n: int):
    """First n points of the 2D R2 Kronecker sequence (prefix-stable)."""
    a1 = 1.0 / _PLASTIC
    a2 = 1.0 / (_PLASTIC * _PLASTIC)
    idx = np.arange(n, dtype=np.float64)
    return _mod1(0.5 + a1 * idx), _mod1(0.5 + a2 * idx)


def map_sup_distance(f: MapExpr, h: MapExpr, samples: int) -> float:
    """Lower-bound estimate of sup-distance over a deterministic sample set."""
    if samples < 1:
        raise DomainError("samples must be >= 1")
    best = 0.0
    for lo in range(0, samples, _CHUNK):
        hi = min(lo + _CHUNK, samples)
        a1 = 1.0 / _PLASTIC
        a2 = 1.0 / (_PLASTIC * _PLASTIC)
        idx = np.arange(lo, hi, dtype=np.float64)
        xs = _mod1(0.5 + a1 * idx)
        ys = _mod1(0.5 + a2 * idx)
        fx, fy = eval_arrays(f, xs, ys)
        hx, hy = eval_arrays(h, xs, ys)
        best = max(best, float(wrap_distance_arrays(fx, fy, hx, hy).max()))
    return best
