"""Command-line surface: analyze, sweep, measure, lax, shadow, render."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import parse_config
from .errors import TorusDiscError
from .funcgraph import analyze
from .grid import make_grid
from .imaging import render_density_pgm, render_density_ppm
from .lax import lax_cyclic_approximation
from .measures import DensityImage, coarse_density, invariant_measure
from .shadowing import shadow_fraction
from .sweep import run_sweep
from .torusmaps import builtin_map, discretize


def _add_map_args(p):
    p.add_argument("--map", required=True, help="built-in map name (identity, anosov, f1..f4)")
    p.add_argument("--k", type=int, required=True, help="grid resolution (cells per axis)")


def cmd_analyze(args):
    g = make_grid(args.k)
    s = discretize(builtin_map(args.map), g)
    stats, _ = analyze(s)
    out = {
        "k": args.k,
        "q": stats.q,
        "card_omega": stats.card_omega,
        "num_cycles": stats.num_cycles,
        "max_cycle_len": stats.max_cycle_len,
        "image_card": stats.image_card,
        "stabilization_time": stats.stabilization_time,
        "recurrence_rate": stats.recurrence_rate,
    }
    print(json.dumps(out, indent=2))


def cmd_sweep(args):
    cfg = parse_config(args.config)
    rows = run_sweep(cfg)
    for r in rows:
        print(f"k={r.k} status={r.status} card_omega={r.card_omega} runtime_ms={r.runtime_ms}")
    print(f"artifacts written under {cfg.out_dir}")


def cmd_measure(args):
    g = make_grid(args.k)
    if args.k % args.px != 0:
        raise TorusDiscError(f"--px {args.px} must divide --k {args.k}")
    s = discretize(builtin_map(args.map), g)
    _, labeling = analyze(s)
    density = coarse_density(invariant_measure(s, labeling), args.px)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    if out.suffix == ".npz":
        density.save(out)
    elif out.suffix == ".ppm":
        render_density_ppm(density, out)
    else:
        render_density_pgm(density, out)
    print(f"wrote {out}")


def cmd_lax(args):
    g = make_grid(args.k)
    result, cert = lax_cyclic_approximation(builtin_map(args.map), g, args.eps)
    print(json.dumps({
        "is_cyclic": cert.is_cyclic,
        "displacement_max": cert.displacement_max,
        "matching_d_n": cert.matching_d_n,
        "d_n": cert.d_n,
        "meets_eps": cert.meets_eps,
        "bound": cert.bound(g.k),
    }, indent=2))


def cmd_shadow(args):
    g = make_grid(args.k)
    frac = shadow_fraction(
        builtin_map(args.map), g, delta=args.delta, horizon=args.horizon,
        sample_count=args.samples, seed=args.seed,
    )
    print(f"shadow_fraction = {frac:.6f}")


def cmd_render(args):
    density = DensityImage.load(args.infile)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    if out.suffix == ".ppm":
        render_density_ppm(density, out)
    else:
        render_density_pgm(density, out)
    print(f"wrote {out}")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="torusdisc",
        description="Spatial discretizations of torus maps: statistics, measures, cyclic approximations",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="functional-graph statistics of a discretized map")
    _add_map_args(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sweep", help="run a resolution sweep from a JSON config")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("measure", help="density image of the canonical invariant measure")
    _add_map_args(p)
    p.add_argument("--px", type=int, default=128)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("lax", help="certified cyclic approximation")
    _add_map_args(p)
    p.add_argument("--eps", type=float, required=True)
    p.set_defaults(func=cmd_lax)

    p = sub.add_parser("shadow", help="fraction of sampled points shadowed within delta")
    _add_map_args(p)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_shadow)

    p = sub.add_parser("render", help="render a saved density (.npz) to PGM/PPM")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_render)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except TorusDiscError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
