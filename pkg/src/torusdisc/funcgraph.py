"""Functional-graph analysis of a discrete map: maximal invariant set,
cycles, basins, image cardinality, stabilization time.

The fast path (`analyze`) peels in-degree-zero cells in rounds to isolate
the maximal invariant set, then labels cycles and tails with iterative
path-following; everything runs in O(q) with a handful of q-sized arrays.
`naive_oracle` recomputes the same statistics by plain per-cell orbit
walking in pure Python and exists only to cross-check the fast path.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numba import njit

from .errors import CapacityError, DomainError
from .grid import GridSpec, TorusPoint, wrap_distance
from .torusmaps import DiscreteMap, table_dtype

NAIVE_ORACLE_MAX_Q = 10**6


@dataclass
class FuncGraphStats:
    q: int
    card_omega: int
    num_cycles: int
    cycle_lengths: Counter
    max_cycle_len: int
    image_card: int
    stabilization_time: int
    recurrence_rate: float


@dataclass
class BasinLabeling:
    """Per-cell cycle id and tail height, plus per-cycle sizes.

    Cycle ids are dense and assigned in increasing order of the smallest
    cell linearization on the cycle, so labelings are platform-independent.
    """

    cycle_id: np.ndarray
    tail_height: np.ndarray
    cycle_len: np.ndarray
    basin_count: np.ndarray

    def omega_cells(self) -> np.ndarray:
        return np.flatnonzero(self.tail_height == 0)

    def cycle_cells(self, cid: int) -> np.ndarray:
        return np.flatnonzero((self.cycle_id == cid) & (self.tail_height == 0))


@njit(cache=True)
def _peel(table):
    q = table.size
    indeg = np.zeros(q, np.int32)
    for i in range(q):
        indeg[table[i]] += 1
    image_card = 0
    for i in range(q):
        if indeg[i] > 0:
            image_card += 1
    in_omega = np.ones(q, np.bool_)
    cur = np.empty(q, np.int64)
    nxt = np.empty(q, np.int64)
    ncur = 0
    for i in range(q):
        if indeg[i] == 0:
            cur[ncur] = i
            ncur += 1
    rounds = 0
    while ncur > 0:
        rounds += 1
        for t in range(ncur):
            in_omega[cur[t]] = False
        nnxt = 0
        for t in range(ncur):
            w = table[cur[t]]
            indeg[w] -= 1
            if indeg[w] == 0 and in_omega[w]:
                nxt[nnxt] = w
                nnxt += 1
        cur, nxt = nxt, cur
        ncur = nnxt
    return in_omega, image_card, rounds


@njit(cache=True)
def _label(table, in_omega):
    q = table.size
    cycle_id = np.full(q, -1, np.int32)
    tail = np.zeros(q, np.int32)
    cyc_len = np.empty(q, np.int64)
    ncyc = 0
    # Ascending scan: the first cell met on each cycle is its minimum.
    for i in range(q):
        if in_omega[i] and cycle_id[i] < 0:
            length = 0
            v = i
            while cycle_id[v] < 0:
                cycle_id[v] = ncyc
                v = table[v]
                length += 1
            cyc_len[ncyc] = length
            ncyc += 1
    stack = np.empty(q, np.int64)
    for i in range(q):
        if cycle_id[i] >= 0:
            continue
        top = 0
        v = i
        while cycle_id[v] < 0:
            stack[top] = v
            top += 1
            v = table[v]
        cid = cycle_id[v]
        h = tail[v]
        while top > 0:
            top -= 1
            u = stack[top]
            h += 1
            cycle_id[u] = cid
            tail[u] = h
    basin = np.zeros(ncyc, np.int64)
    for i in range(q):
        basin[cycle_id[i]] += 1
    return cycle_id, tail, cyc_len[:ncyc].copy(), basin


def analyze(s: DiscreteMap):
    """Exact functional-graph statistics and basin labeling of s."""
    table = s.as_table()
    in_omega, image_card, rounds = _peel(table)
    cycle_id, tail, cyc_len, basin = _label(table, in_omega)
    card_omega = int(in_omega.sum())
    stats = FuncGraphStats(
        q=s.grid.q,
        card_omega=card_omega,
        num_cycles=len(cyc_len),
        cycle_lengths=Counter(cyc_len.tolist()),
        max_cycle_len=int(cyc_len.max()) if len(cyc_len) else 0,
        image_card=int(image_card),
        stabilization_time=int(rounds),
        recurrence_rate=card_omega / s.grid.q,
    )
    labeling = BasinLabeling(
        cycle_id=cycle_id, tail_height=tail, cycle_len=cyc_len, basin_count=basin
    )
    return stats, labeling


def naive_oracle(s: DiscreteMap):
    """Same contract as `analyze`, by per-cell orbit walking with visited marks."""
    q = s.grid.q
    if q > NAIVE_ORACLE_MAX_Q:
        raise CapacityError(
            f"naive oracle limited to q <= {NAIVE_ORACLE_MAX_Q}, got {q}",
            required=q,
            available=NAIVE_ORACLE_MAX_Q,
        )
    table = [int(v) for v in s.as_table()]
    cycle_of = [-1] * q
    tail = [0] * q
    done = [False] * q
    cycles = []  # cycle id -> list of cells
    for start in range(q):
        if done[start]:
            continue
        path = []
        pos = {}
        v = start
        while True:
            if v in pos:
                # New cycle closed within the current walk.
                at = pos[v]
                cyc = path[at:]
                cid = len(cycles)
                cycles.append(cyc)
                for c in cyc:
                    cycle_of[c] = cid
                    tail[c] = 0
                base_cid, base_h = cid, 0
                head = path[:at]
                break
            if done[v]:
                base_cid, base_h = cycle_of[v], tail[v]
                head = path
                break
            pos[v] = len(path)
            path.append(v)
            v = table[v]
        h = base_h
        for c in reversed(head):
            h += 1
            cycle_of[c] = base_cid
            tail[c] = h
        for c in path:
            done[c] = True
    # Renumber cycles by their smallest member.
    order = sorted(range(len(cycles)), key=lambda c: min(cycles[c]))
    renum = [0] * len(cycles)
    for new, old in enumerate(order):
        renum[old] = new
    cycle_id = np.array([renum[c] for c in cycle_of], dtype=np.int32)
    cyc_len = np.array([len(cycles[old]) for old in order], dtype=np.int64)
    basin = np.zeros(len(cycles), dtype=np.int64)
    for c in cycle_id:
        basin[c] += 1
    card_omega = int(sum(len(c) for c in cycles))
    stats = FuncGraphStats(
        q=q,
        card_omega=card_omega,
        num_cycles=len(cycles),
        cycle_lengths=Counter(cyc_len.tolist()),
        max_cycle_len=int(cyc_len.max()) if len(cycles) else 0,
        image_card=len(set(table)),
        stabilization_time=max(tail) if q else 0,
        recurrence_rate=card_omega / q,
    )
    labeling = BasinLabeling(
        cycle_id=cycle_id,
        tail_height=np.array(tail, dtype=np.int32),
        cycle_len=cyc_len,
        basin_count=basin,
    )
    return stats, labeling


def random_endomap(q: int, seed: int) -> DiscreteMap:
    """Uniform random self-map of q cells from a counter-based Philox stream.

    Philox is keyed by the seed only, so tables are reproducible across
    platforms; numpy's bounded-integer sampling is rejection-based and
    unbiased mod q.
    """
    if q < 1:
        raise DomainError(f"q must be >= 1, got {q}")
    rng = np.random.Generator(np.random.Philox(key=seed))
    table = rng.integers(0, q, size=q, dtype=np.uint64).astype(table_dtype(q))
    # Geometry is irrelevant for a random map; when q is not a perfect square
    # the grid is a placeholder carrying only the cell count.
    k = int(np.sqrt(q))
    grid = GridSpec(k=k if k * k == q else 1, q=q)
    return DiscreteMap(grid, table=table)


def cells_in_ball(center: TorusPoint, radius: float, g: GridSpec) -> np.ndarray:
    """Linearizations of all cells whose center lies within radius of center."""
    k = g.k
    r_idx = int(np.ceil(radius * k)) + 1
    ci = int(np.floor(center.x * k + 0.5))
    cj = int(np.floor(center.y * k + 0.5))
    out = []
    for di in range(-r_idx, r_idx + 1):
        for dj in range(-r_idx, r_idx + 1):
            i = (ci + di) % k
            j = (cj + dj) % k
            if wrap_distance(TorusPoint(i / k, j / k), center) <= radius:
                out.append(i * k + j)
    return np.array(sorted(set(out)), dtype=np.int64)


def epsilon_weak_mixing(
    s: DiscreteMap, eps: float, pairs, max_m: int
) -> Optional[int]:
    """Smallest m <= max_m with s^m(B) meeting B' for every ball pair, or None.

    Each pair is (center_B, center_B'); both balls have radius eps/2.
    """
    if not pairs:
        raise DomainError("at least one ball pair is required")
    if max_m < 1:
        raise DomainError("max_m must be >= 1")
    g = s.grid
    radius = eps / 2.0
    sources = []
    targets = []
    for idx, (b, b2) in enumerate(pairs):
        src = cells_in_ball(b, radius, g)
        if src.size == 0:
            raise DomainError(f"ball {idx} around ({b.x}, {b.y}) contains no grid cell")
        tgt = cells_in_ball(b2, radius, g)
        if tgt.size == 0:
            raise DomainError(f"ball {idx} around ({b2.x}, {b2.y}) contains no grid cell")
        sources.append(src)
        mask = np.zeros(g.q, dtype=bool)
        mask[tgt] = True
        targets.append(mask)
    current = list(sources)
    for m in range(1, max_m + 1):
        current = [np.unique(s.image_of(c)) for c in current]
        if all(targets[i][current[i]].any() for i in range(len(pairs))):
            return m
    return None
