"""Matplotlib figures rendered alongside the delimited sweep output."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def sweep_figures(rows, out_dir) -> list:
    """Render the standard sweep panels to PNG files; returns written paths."""
    out_dir = Path(out_dir)
    ok = [r for r in rows if r.status == "ok"]
    if not ok:
        return []
    ks = [r.k for r in ok]
    panels = [
        ("card_omega", "size of the maximal invariant set", [r.card_omega for r in ok]),
        ("num_cycles", "number of periodic orbits", [r.num_cycles for r in ok]),
        ("max_cycle_len", "longest periodic orbit", [r.max_cycle_len for r in ok]),
        ("max_atom", "largest atom of the invariant measure", [float(r.max_atom) for r in ok]),
    ]
    written = []
    fig, axes = plt.subplots(2, 2, figsize=(10, 7))
    for ax, (key, label, values) in zip(axes.flat, panels):
        ax.plot(ks, values, marker=".", lw=0.8)
        ax.set_xlabel("grid resolution k")
        ax.set_ylabel(label)
        ax.grid(True, alpha=0.3)
    fig.tight_layout()
    path = out_dir / "sweep_stats.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(ks, [max(r.recurrence_rate, 1e-12) for r in ok], marker=".")
    ax.set_xlabel("grid resolution k")
    ax.set_ylabel("recurrence rate |Omega| / q")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    path = out_dir / "recurrence_rate.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)
    return written
