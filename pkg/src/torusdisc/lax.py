"""Constructive cyclic approximation of a torus map on a grid.

Pipeline: sample-based cube adjacency, perfect matching by augmenting
paths, re-indexing in boustrophedon (snake) order, then completion to a
single cycle by a permutation moving every snake position by at most 2.
Also the three permutation surgeries: collapse to one short cycle, image
coarsening onto an embedded sub-grid, and block replication of a cyclic map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, MatchingError, SearchError, TilingError
from .grid import GridSpec, CellIndex, TorusPoint, wrap_distance
from .torusmaps import (
    DiscreteMap,
    MapExpr,
    eval_arrays,
    grid_sup_distance,
    linear_matrix,
)
from .grid import mod1_arr


# ---------------------------------------------------------------------------
# snake order


def snake_positions(g: GridSpec):
    """Arrays pos_of_cell (lin -> position) and cell_of_pos (position -> lin).

    Rows alternate direction so consecutive positions are edge-adjacent; for
    even k the seam from the last position back to position 0 is edge-adjacent
    through the wrap as well.
    """
    k = g.k
    lins = np.arange(g.q, dtype=np.int64)
    i = lins // k
    j = lins % k
    col = np.where(i % 2 == 0, j, k - 1 - j)
    pos_of_cell = i * k + col
    cell_of_pos = np.empty(g.q, dtype=np.int64)
    cell_of_pos[pos_of_cell] = lins
    return pos_of_cell, cell_of_pos


# ---------------------------------------------------------------------------
# cube adjacency


def cube_adjacency(
    f: MapExpr, g: GridSpec, samples_per_axis: int = 3, inflate: float = None
):
    """Left cell related to right cell iff some sample point of the left cube
    maps within wrap-distance `inflate` of the right cube."""
    if samples_per_axis < 1:
        raise DomainError("samples_per_axis must be >= 1")
    k = g.k
    if inflate is None:
        inflate = math.sqrt(2.0) / (2.0 * k * samples_per_axis)
    if inflate < 0:
        raise DomainError("inflate must be >= 0")
    half = 0.5 / k
    if samples_per_axis == 1:
        offs = [0.0]
    else:
        offs = np.linspace(-half, half, samples_per_axis).tolist()
    lins = np.arange(g.q, dtype=np.int64)
    i = lins // k
    j = lins % k
    m = linear_matrix(f)
    rel = [set() for _ in range(g.q)]
    w = int(math.floor(inflate * k + 0.5)) + 1
    for ox in offs:
        for oy in offs:
            if m is not None and ox == 0.0 and oy == 0.0:
                a, b = int(m[0, 0]), int(m[0, 1])
                c, d = int(m[1, 0]), int(m[1, 1])
                fx = ((a * i + b * j) % k) / k
                fy = ((c * i + d * j) % k) / k
            else:
                xs = mod1_arr(i / k + ox)
                ys = mod1_arr(j / k + oy)
                fx, fy = eval_arrays(f, xs, ys)
            bi = np.floor(fx * k + 0.5).astype(np.int64)
            bj = np.floor(fy * k + 0.5).astype(np.int64)
            for di in range(-w, w + 1):
                for dj in range(-w, w + 1):
                    ci = (bi + di) % k
                    cj = (bj + dj) % k
                    dx = np.abs(fx - ci / k)
                    dx = np.minimum(dx, 1.0 - dx)
                    dy = np.abs(fy - cj / k)
                    dy = np.minimum(dy, 1.0 - dy)
                    da = np.maximum(0.0, dx - half)
                    db = np.maximum(0.0, dy - half)
                    ok = np.hypot(da, db) <= inflate
                    right = ci * k + cj
                    for idx in np.flatnonzero(ok):
                        rel[idx].add(int(right[idx]))
    return [sorted(r) for r in rel]


# ---------------------------------------------------------------------------
# perfect matching


def hall_matching(rel, q: int):
    """Perfect matching respecting rel: greedy lowest-free-neighbor pass,
    then augmenting paths in lowest-index order.  Raises MatchingError with
    a Hall-violating witness when no perfect matching exists."""
    adj = [sorted(r) for r in rel]
    if len(adj) != q:
        raise DomainError(f"relation covers {len(adj)} left cells, expected {q}")
    match_l = [-1] * q
    match_r = [-1] * q
    for u in range(q):
        for v in adj[u]:
            if match_r[v] == -1:
                match_l[u] = v
                match_r[v] = u
                break
    for u in range(q):
        if match_l[u] != -1:
            continue
        visited = set()
        if not _augment(u, adj, match_l, match_r, visited):
            witness = {u} | {match_r[v] for v in visited}
            raise MatchingError(
                f"no perfect matching: the {len(witness)} cells {sorted(witness)[:8]}..."
                f" have only {len(visited)} joint neighbors",
                witness=witness,
            )
    return np.array(match_l, dtype=np.int64)


def _augment(root, adj, match_l, match_r, visited):
    frames = [[root, iter(adj[root]), -1]]
    while frames:
        frame = frames[-1]
        action = None
        for v in frame[1]:
            if v in visited:
                continue
            visited.add(v)
            frame[2] = v
            if match_r[v] == -1:
                action = "flip"
            else:
                frames.append([match_r[v], iter(adj[match_r[v]]), -1])
                action = "descend"
            break
        if action == "flip":
            for left, _, right in frames:
                match_l[left] = right
                match_r[right] = left
            return True
        if action == "descend":
            continue
        frames.pop()
    return False


# ---------------------------------------------------------------------------
# cyclic completion


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, a):
        p = self.parent
        root = a
        while p[root] != root:
            root = p[root]
        while p[a] != root:
            p[a], a = root, p[a]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra
            return True
        return False


def _check_permutation(s):
    s = np.asarray(s, dtype=np.int64)
    q = s.size
    if q == 0:
        raise DomainError("empty permutation")
    counts = np.bincount(s, minlength=q)
    if s.min() < 0 or s.max() >= q or not (counts == 1).all():
        raise DomainError("input is not a permutation of [0, q)")
    return s


def alpern_cyclize(s):
    """A permutation tau with |tau(p) - p| <= 2 such that tau∘s is one cycle.

    Adjacent transpositions merging distinct cycles are chosen in two
    disjoint sweeps (even-start pairs, then odd-start pairs), so each
    position moves at most once per sweep.
    """
    s = _check_permutation(s)
    q = s.size
    uf = _UnionFind(q)
    for p in range(q):
        uf.union(p, int(s[p]))
    t1 = np.arange(q, dtype=np.int64)
    t2 = np.arange(q, dtype=np.int64)
    for start, t in ((0, t1), (1, t2)):
        for p in range(start, q - 1, 2):
            if uf.union(p, p + 1):
                t[p], t[p + 1] = p + 1, p
    tau = t2[t1]
    result = tau[s]
    return tau, result


def is_single_cycle(perm) -> bool:
    perm = np.asarray(perm, dtype=np.int64)
    q = perm.size
    v = 0
    for steps in range(1, q + 1):
        v = int(perm[v])
        if v == 0:
            return steps == q
    return False


# ---------------------------------------------------------------------------
# the full pipeline


@dataclass
class LaxCertificate:
    is_cyclic: bool
    displacement_max: int
    d_n: float
    matching_d_n: float
    meets_eps: bool

    def bound(self, k: int) -> float:
        """Recorded upper bound matching_d_n + sqrt(5)/k * displacement."""
        return self.matching_d_n + math.sqrt(5.0) / k * self.displacement_max


def lax_cyclic_approximation(
    f: MapExpr,
    g: GridSpec,
    eps: float,
    samples_per_axis: int = None,
    inflate: float = None,
):
    """Cyclic permutation of the grid close to f, with a run-time certificate."""
    if eps <= 0:
        raise DomainError("eps must be positive")
    if linear_matrix(f) is not None:
        # A linear automorphism maps cubes onto exact cubes: the center sample
        # with no inflation already yields the true (bijective) relation.
        if samples_per_axis is None:
            samples_per_axis = 1
        if inflate is None:
            inflate = 0.0
    elif samples_per_axis is None:
        samples_per_axis = 3
    rel = cube_adjacency(f, g, samples_per_axis=samples_per_axis, inflate=inflate)
    match = hall_matching(rel, g.q)
    matching_map = DiscreteMap.from_table(match, g)
    matching_d = grid_sup_distance(f, matching_map)

    pos_of_cell, cell_of_pos = snake_positions(g)
    s_snake = pos_of_cell[match[cell_of_pos]]
    tau, res_snake = alpern_cyclize(s_snake)
    result_cells = cell_of_pos[res_snake[pos_of_cell]]
    result = DiscreteMap.from_table(result_cells, g)

    d_n = grid_sup_distance(f, result)
    cert = LaxCertificate(
        is_cyclic=is_single_cycle(res_snake),
        displacement_max=int(np.abs(tau - np.arange(g.q)).max()),
        d_n=d_n,
        matching_d_n=matching_d,
        meets_eps=d_n <= eps,
    )
    return result, cert


# ---------------------------------------------------------------------------
# permutation surgeries


def collapse_to_short_cycle(
    s: DiscreteMap, x: CellIndex, eps: float, max_tau: int
) -> DiscreteMap:
    """Redirect one edge of a q-cycle so the whole grid becomes a single
    preperiodic orbit whose cycle has length tau, the first return of x
    within eps."""
    g = s.grid
    k = g.k
    table = s.as_table()
    q = g.q
    if max_tau < 1 or max_tau > q:
        raise DomainError(f"max_tau must be in [1, {q}], got {max_tau}")
    x0 = x.i * k + x.j
    cx = TorusPoint(x.i / k, x.j / k)
    v = x0
    tau = None
    redirect_from = -1
    best = float("inf")
    for t in range(1, q + 1):
        pv = v
        v = int(table[v])
        if tau is None and t <= max_tau:
            center = TorusPoint((v // k) / k, (v % k) / k)
            d = wrap_distance(cx, center)
            best = min(best, d)
            if d < eps:
                tau = t
                redirect_from = pv
        if v == x0 and t < q:
            raise DomainError(f"map is not a single {q}-cycle (returned after {t} steps)")
    if v != x0:
        raise DomainError(f"map is not a single {q}-cycle")
    if tau is None:
        raise SearchError(
            f"no return of x within eps={eps} in {max_tau} steps; best distance {best}",
            best=best,
        )
    new_table = table.copy()
    new_table[redirect_from] = x0
    return DiscreteMap.from_table(new_table, g)


def coarsen_image(s: DiscreteMap, k_coarse: int) -> DiscreteMap:
    """Re-project every image cell onto the embedded k_coarse lattice."""
    g = s.grid
    k = g.k
    if k_coarse < 1 or k % k_coarse != 0:
        raise TilingError(f"k_coarse={k_coarse} must divide k={k}")
    r = k // k_coarse
    table = s.as_table().astype(np.int64)
    i = table // k
    j = table % k
    # Nearest coarse center, ties toward the larger index (same policy as
    # point projection).
    i2 = (((i + r // 2) // r) * r) % k
    j2 = (((j + r // 2) // r) * r) % k
    return DiscreteMap.from_table(i2 * k + j2, g)


def replicate_cycles(base: DiscreteMap, g: GridSpec) -> DiscreteMap:
    """Tile the fine grid with translated copies of a coarse cyclic map."""
    k0 = base.grid.k
    k = g.k
    if k % k0 != 0:
        raise TilingError(f"base resolution {k0} must divide target {k}")
    b = base.as_table().astype(np.int64)
    lins = np.arange(g.q, dtype=np.int64)
    i = lins // k
    j = lins % k
    u = i % k0
    v = j % k0
    img = b[u * k0 + v]
    u2 = img // k0
    v2 = img % k0
    out = (i - u + u2) * k + (j - v + v2)
    return DiscreteMap.from_table(out, g)
