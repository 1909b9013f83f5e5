"""Resolution sweeps: per-resolution statistics rows, frequency-in-average
diagnostics, CSV emission, density artifacts, and a content-addressed
result cache.

Rows skipped for memory or time budgets are emitted with an explicit
status, never silently dropped.  Cached rows keep their original runtime
so a rerun of an identical config reproduces byte-identical outputs.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional

import numpy as np

from .config import SweepConfig
from .errors import DomainError, TorusDiscError, UnknownNameError
from .funcgraph import analyze, epsilon_weak_mixing
from .grid import TorusPoint, make_grid
from .imaging import render_density_pgm, render_density_ppm
from .measures import DensityImage, coarse_density, invariant_measure
from .shadowing import shadow_fraction
from .torusmaps import discretize, table_dtype

CACHE_ENV = "TORUSDISC_CACHE"
CSV_HEADER = (
    "k,q,card_omega,num_cycles,max_cycle_len,image_card,"
    "stabilization_time,recurrence_rate,max_atom,runtime_ms,status"
)
# Rough per-cell bytes of the analysis working set on top of the table:
# in-degree counters, labels, tail heights, frontier queues, path stack.
ANALYZE_AUX_BYTES = 29


@dataclass
class SweepRow:
    k: int
    q: int
    card_omega: Optional[int]
    num_cycles: Optional[int]
    max_cycle_len: Optional[int]
    image_card: Optional[int]
    stabilization_time: Optional[int]
    recurrence_rate: Optional[float]
    max_atom: Optional[Fraction]
    runtime_ms: int
    status: str

    def is_ok(self) -> bool:
        return self.status == "ok"


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, Fraction):
        return f"{float(v):.12g}"
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def rows_to_csv(rows) -> str:
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(
            ",".join(
                _fmt(v)
                for v in (
                    r.k,
                    r.q,
                    r.card_omega,
                    r.num_cycles,
                    r.max_cycle_len,
                    r.image_card,
                    r.stabilization_time,
                    r.recurrence_rate,
                    r.max_atom,
                    r.runtime_ms,
                    r.status,
                )
            )
        )
    return "\n".join(lines) + "\n"


def _row_to_json(r: SweepRow) -> dict:
    d = dict(r.__dict__)
    if r.max_atom is not None:
        d["max_atom"] = [r.max_atom.numerator, r.max_atom.denominator]
    return d


def _row_from_json(d: dict) -> SweepRow:
    d = dict(d)
    if d.get("max_atom") is not None:
        d["max_atom"] = Fraction(*d["max_atom"])
    return SweepRow(**d)


def cache_key(cfg: SweepConfig, k: int) -> str:
    payload = {
        "map": cfg.canonical_map_doc(),
        "k": k,
        "analyses": {f: bool(v) for f, v in sorted(cfg.analyses.items())},
        "seed": cfg.seed,
        "px": cfg.px,
        "format": 1,
    }
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:24]


def cache_dir(cfg: SweepConfig) -> Path:
    return Path(os.environ.get(CACHE_ENV, Path(cfg.out_dir) / "cache"))


def _max_atom(stats, labeling) -> Fraction:
    q = stats.q
    best = Fraction(0)
    for basin, length in zip(labeling.basin_count.tolist(), labeling.cycle_len.tolist()):
        atom = Fraction(basin, q * length)
        if atom > best:
            best = atom
    return best


def _compute_row(cfg: SweepConfig, k: int):
    g = make_grid(k)
    f = cfg.map_expr()
    t0 = time.perf_counter()
    s = discretize(f, g, max_bytes=cfg.max_bytes)
    stats, labeling = analyze(s)
    max_atom = _max_atom(stats, labeling)
    extras = {}
    density = None
    if cfg.analyses.get("measure"):
        px = cfg.px if k % cfg.px == 0 else k
        measure = invariant_measure(s, labeling)
        density = coarse_density(measure, px)
        extras["density_px"] = px
    if cfg.analyses.get("weakmix"):
        pairs = [
            (TorusPoint(0.25, 0.25), TorusPoint(0.75, 0.75)),
            (TorusPoint(0.25, 0.75), TorusPoint(0.75, 0.25)),
        ]
        extras["weakmix_m"] = epsilon_weak_mixing(s, 0.25, pairs, max_m=100)
    if cfg.analyses.get("shadow"):
        extras["shadow_fraction"] = shadow_fraction(
            f, g, delta=1e-2, horizon=100, sample_count=1000, seed=cfg.seed
        )
    runtime_ms = int((time.perf_counter() - t0) * 1000)
    row = SweepRow(
        k=k,
        q=g.q,
        card_omega=stats.card_omega,
        num_cycles=stats.num_cycles,
        max_cycle_len=stats.max_cycle_len,
        image_card=stats.image_card,
        stabilization_time=stats.stabilization_time,
        recurrence_rate=stats.recurrence_rate,
        max_atom=max_atom,
        runtime_ms=runtime_ms,
        status="ok",
    )
    return row, extras, density


def _skipped(k: int, status: str) -> SweepRow:
    return SweepRow(
        k=k, q=k * k, card_omega=None, num_cycles=None, max_cycle_len=None,
        image_card=None, stabilization_time=None, recurrence_rate=None,
        max_atom=None, runtime_ms=0, status=status,
    )


def run_sweep(cfg: SweepConfig, write_figures: bool = True):
    """One row per scheduled resolution; artifacts land under cfg.out_dir."""
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    probe = out / ".writable"
    try:
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise TorusDiscError(f"output directory {out} is not writable: {exc}") from exc
    cdir = cache_dir(cfg)
    cdir.mkdir(parents=True, exist_ok=True)

    rows = []
    extras_all = {}
    last_ok = None  # (q, seconds) of the slowest completed row
    for k in cfg.schedule:
        key = cache_key(cfg, k)
        entry = cdir / key
        row_file = entry / "row.json"
        density_file = entry / "density.npz"
        if row_file.exists():
            payload = json.loads(row_file.read_text())
            row = _row_from_json(payload["row"])
            extras = payload.get("extras", {})
            density = DensityImage.load(density_file) if density_file.exists() else None
        else:
            q = k * k
            need = q * np.dtype(table_dtype(q)).itemsize + q * ANALYZE_AUX_BYTES
            if need > cfg.max_bytes:
                row, extras, density = _skipped(k, "skipped-capacity"), {}, None
            elif last_ok is not None and last_ok[1] * (q / last_ok[0]) > cfg.max_seconds:
                row, extras, density = _skipped(k, "skipped-timeout"), {}, None
            else:
                row, extras, density = _compute_row(cfg, k)
            entry.mkdir(parents=True, exist_ok=True)
            row_file.write_text(
                json.dumps({"row": _row_to_json(row), "extras": extras}, sort_keys=True)
            )
            if density is not None:
                density.save(density_file)
        if row.is_ok():
            last_ok = (row.q, max(row.runtime_ms, 1) / 1000.0)
        rows.append(row)
        extras_all[k] = extras
        if density is not None:
            render_density_pgm(density, out / f"density_{key}_k{k}.pgm")
            render_density_ppm(density, out / f"density_{key}_k{k}.ppm")

    (out / "rows.csv").write_text(rows_to_csv(rows))
    (out / "diagnostics.json").write_text(
        json.dumps({str(k): v for k, v in extras_all.items()}, sort_keys=True, indent=2)
    )
    if write_figures:
        from .plots import sweep_figures

        sweep_figures(rows, out)
    return rows


# ---------------------------------------------------------------------------
# frequency-in-average diagnostics

_PRED_RE = re.compile(r"^(\w+)(?:\((\d+)\))?$")


def _predicate(name: str):
    m = _PRED_RE.match(name.strip())
    if not m:
        raise UnknownNameError(name, _PREDICATES)
    base, arg = m.group(1), m.group(2)
    if base not in _PREDICATES:
        raise UnknownNameError(base, _PREDICATES)
    if base in ("omega_below", "cycles_at_least"):
        if arg is None:
            raise DomainError(f"predicate {base} needs an integer argument, e.g. {base}(100)")
        bound = int(arg)
        if base == "omega_below":
            return lambda r: r.card_omega is not None and r.card_omega < bound
        return lambda r: r.num_cycles is not None and r.num_cycles >= bound
    if base == "is_permutation":
        return lambda r: r.image_card is not None and r.image_card == r.q
    return lambda r: (
        r.image_card is not None and r.image_card == r.q and r.num_cycles == 1
    )


_PREDICATES = ("is_permutation", "is_cyclic_permutation", "omega_below", "cycles_at_least")


def property_frequency(rows, predicate: str):
    """Running proportion of rows 1..M satisfying the named predicate."""
    pred = _predicate(predicate)
    out = []
    hits = 0
    for m, row in enumerate(rows, start=1):
        if pred(row):
            hits += 1
        out.append((m, hits / m))
    return out
