import math

import numpy as np
import pytest

from torusdisc import (
    DiscreteMap,
    MapExpr,
    ShearX,
    ShearY,
    TorusPoint,
    builtin_map,
    discretize,
    eval_map,
    grid_sup_distance,
    make_grid,
    map_sup_distance,
    project,
    wrap_distance,
)
from torusdisc.errors import CapacityError, DomainError, UnknownNameError
from torusdisc.grid import cell_center, cell_from_lin
from torusdisc.torusmaps import LinearAuto, TrigTerm, linear_matrix

F1_AMPLITUDES = 1 / 259 + 1 / 263 + 1 / 271 + 1 / 287


def test_builtin_lookup_error_lists_names():
    with pytest.raises(UnknownNameError) as exc:
        builtin_map("nope")
    assert "anosov" in str(exc.value) and "f4" in str(exc.value)


def test_anosov_evaluation():
    f = builtin_map("anosov")
    p = eval_map(f, TorusPoint(0.5, 0.5))
    assert (p.x, p.y) == (0.0, 0.5)
    p = eval_map(f, TorusPoint(0.2, 0.3))
    assert p.x == pytest.approx(0.5) and p.y == pytest.approx(0.8)


def test_identity_evaluation():
    f = builtin_map("identity")
    p = eval_map(f, TorusPoint(0.3, 0.7))
    assert (p.x, p.y) == (0.3, 0.7)


def test_f1_structure():
    f = builtin_map("f1")
    assert [type(a) for a in f.atoms] == [ShearY, ShearX, ShearY]
    p = f.atoms[0].field
    assert p.terms[0] == TrigTerm(1 / 259, 227, "cos", "x")
    assert p.terms[1] == TrigTerm(1 / 271, 253, "sin", "x")
    # first applied atom moves (0, 0) to (0, 1/259)
    partial = MapExpr((f.atoms[2],))
    moved = eval_map(partial, TorusPoint(0.0, 0.0))
    assert moved.x == 0.0 and moved.y == pytest.approx(1 / 259)


def test_f2_is_f1_after_anosov():
    f1 = builtin_map("f1")
    f2 = builtin_map("f2")
    assert f2.atoms[:3] == f1.atoms
    assert f2.atoms[3] == LinearAuto(1, 1, 1, 2)


def test_f1_against_extended_precision_oracle():
    # Independent >=80-bit evaluator of the same composition.
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 40

    def p_field(x):
        return mp.mpf(1) / 259 * mp.cos(2 * mp.pi * 227 * x) + mp.mpf(1) / 271 * mp.sin(
            2 * mp.pi * 253 * x
        )

    def q_field(y):
        return mp.mpf(1) / 287 * mp.cos(2 * mp.pi * 241 * y) + mp.mpf(1) / 263 * mp.sin(
            2 * mp.pi * 217 * y
        )

    def f1_exact(x, y):
        x, y = mp.mpf(x), mp.mpf(y)
        y = (y + p_field(x)) % 1
        x = (x + q_field(y)) % 1
        y = (y + p_field(x)) % 1
        return x, y

    f = builtin_map("f1")
    for x0, y0 in [(0.0, 0.0), (0.123, 0.456), (0.875, 0.25), (0.999, 0.001)]:
        got = eval_map(f, TorusPoint(x0, y0))
        ex, ey = f1_exact(x0, y0)
        assert abs(got.x - float(ex)) < 1e-12
        assert abs(got.y - float(ey)) < 1e-12


def test_linear_auto_requires_unit_determinant():
    with pytest.raises(DomainError):
        LinearAuto(2, 0, 0, 2)


def test_linear_matrix_of_compositions():
    assert (linear_matrix(builtin_map("anosov")) == [[1, 1], [1, 2]]).all()
    assert linear_matrix(builtin_map("f1")) is None
    assert (linear_matrix(builtin_map("identity")) == np.eye(2)).all()


def test_discretize_identity():
    g = make_grid(4)
    s = discretize(builtin_map("identity"), g)
    assert (s.as_table() == np.arange(16)).all()


def test_discretize_anosov_exact_permutation():
    g = make_grid(5)
    s = discretize(builtin_map("anosov"), g)
    table = s.as_table()
    expected = [((i + j) % 5) * 5 + ((i + 2 * j) % 5) for i in range(5) for j in range(5)]
    assert table.tolist() == expected
    assert sorted(table.tolist()) == list(range(25))


def test_discretize_matches_pointwise_composition():
    g = make_grid(8)
    f = builtin_map("f1")
    s = discretize(f, g)
    for n in range(g.q):
        c = cell_from_lin(n, g)
        image = project(eval_map(f, cell_center(c, g)), g)
        assert s.as_table()[n] == image.i * g.k + image.j


@pytest.mark.parametrize("name", ["identity", "anosov", "f1", "f4"])
def test_lazy_matches_materialized(name):
    g = make_grid(32)
    f = builtin_map(name)
    eager = discretize(f, g).as_table()
    lazy = discretize(f, g, materialize=False)
    assert (lazy.image_of(np.arange(g.q)) == eager).all()
    assert lazy(17) == int(eager[17])


def test_discretize_memory_budget():
    g = make_grid(64)
    with pytest.raises(CapacityError) as exc:
        discretize(builtin_map("identity"), g, max_bytes=16)
    assert exc.value.required > exc.value.available


def test_from_table_validation():
    g = make_grid(2)
    with pytest.raises(DomainError):
        DiscreteMap.from_table([0, 1, 2], g)
    with pytest.raises(DomainError):
        DiscreteMap.from_table([0, 1, 2, 4], g)


def test_grid_sup_distance_exact_cases():
    g = make_grid(5)
    assert grid_sup_distance(builtin_map("identity"), discretize(builtin_map("identity"), g)) == 0.0
    assert grid_sup_distance(builtin_map("anosov"), discretize(builtin_map("anosov"), g)) == 0.0


@pytest.mark.parametrize("k", [8, 16, 32, 64, 128])
def test_grid_sup_distance_projection_bound(k):
    g = make_grid(k)
    f = builtin_map("f1")
    d = grid_sup_distance(f, discretize(f, g))
    assert d <= math.sqrt(2) / (2 * k) * (1 + 1e-12)


def test_map_sup_distance_examples():
    f = builtin_map("f1")
    assert map_sup_distance(f, f, 100) == 0.0
    d = map_sup_distance(builtin_map("identity"), builtin_map("anosov"), 10**4)
    assert d >= 0.70
    d = map_sup_distance(builtin_map("f1"), builtin_map("identity"), 10**4)
    assert d <= 3 * F1_AMPLITUDES


def test_map_sup_distance_monotone_in_samples():
    f, h = builtin_map("identity"), builtin_map("f2")
    prev = 0.0
    for n in (10, 100, 1000, 5000):
        cur = map_sup_distance(f, h, n)
        assert cur >= prev
        prev = cur


def test_composition_evaluates_atomwise():
    f = builtin_map("f2")
    p = TorusPoint(0.31, 0.77)
    step = p
    for atom in reversed(f.atoms):
        step = eval_map(MapExpr((atom,)), step)
    whole = eval_map(f, p)
    assert wrap_distance(step, whole) < 1e-15
