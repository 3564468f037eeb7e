"""Artifact emission: delimited time series, structured summaries, figures.

The CSV columns are fixed and documented (downstream fitting tools rely on
the order):

    t, mass, E, pseudoE, sigma1..sigmaK, mom1..momK, h1..hK, Jnorm, y,
    L{r} (one column per configured exponent), kinetic, potential,
    nonlinear, pseudoRate, energyRate, boundaryRatio

Floats are written with repr-faithful %.17g so identical runs produce
identical bytes.  Figures are a convenience by-product of a run (PNG next
to the CSV); nothing downstream reads them and they can be disabled.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np


def _fmt(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


def csv_columns(diag) -> list[str]:
    K = diag.max_k
    cols = ["t", "mass", "E", "pseudoE"]
    cols += [f"sigma{k}" for k in range(1, K + 1)]
    cols += [f"mom{k}" for k in range(1, K + 1)]
    cols += [f"h{k}" for k in range(1, K + 1)]
    cols += ["Jnorm", "y"]
    cols += [f"L{fmt_exp(r)}" for r in diag.lr_exponents]
    cols += ["kinetic", "potential", "nonlinear", "pseudoRate", "energyRate",
             "boundaryRatio"]
    return cols


def fmt_exp(r: float) -> str:
    r = float(r)
    return str(int(r)) if r == int(r) else str(r)


def record_row(rec, diag) -> list[float]:
    K = diag.max_k
    row = [rec.t, rec.mass, rec.energy, rec.pseudo_energy]
    row += [rec.sigma_norms[k] for k in range(1, K + 1)]
    row += list(rec.momenta)
    row += list(rec.hk_norms)
    row += [rec.j_norm, rec.y_value]
    row += [rec.lr_norms[float(r)] for r in diag.lr_exponents]
    row += [rec.kinetic, rec.potential_term, rec.nonlinear_term, rec.pseudo_rate,
            rec.energy_rate, rec.boundary_ratio]
    return row


def write_timeseries_csv(path, trajectory, diag) -> None:
    path = Path(path)
    lines = [",".join(csv_columns(diag))]
    for rec in trajectory.records:
        lines.append(",".join(_fmt(v) for v in record_row(rec, diag)))
    path.write_text("\n".join(lines) + "\n")


def write_sweep_csv(path, rows: list[dict]) -> None:
    if not rows:
        return
    cols = list(rows[0].keys())
    lines = [",".join(cols)]
    for row in rows:
        cells = []
        for c in cols:
            v = row[c]
            if v is None:
                cells.append("")
            elif isinstance(v, float):
                cells.append(_fmt(v))
            else:
                cells.append(str(v))
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")


def _sanitize(obj):
    if isinstance(obj, dict):
        return {str(k): _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):  # before int: bool subclasses int
        return bool(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_sanitize(v) for v in obj.tolist()]
    return obj


def write_summary_json(path, summary: dict) -> None:
    Path(path).write_text(json.dumps(_sanitize(summary), indent=2, sort_keys=True) + "\n")


def render_figures(out_dir, trajectory, summary: dict) -> list[Path]:
    """Render norm/energy (and scattering, when present) figures to PNG."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_dir = Path(out_dir)
    written = []
    t = trajectory.times

    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    axes[0].plot(t, trajectory.series("sigma1"), label="sigma_1")
    axes[0].plot(t, trajectory.series("h1"), label="h_1")
    axes[0].plot(t, trajectory.series("mom1"), label="|| |x| u ||")
    axes[0].set_yscale("log")
    axes[0].set_xlabel("t")
    axes[0].legend(fontsize=8)
    axes[0].set_title("norm growth")
    mass = trajectory.series("mass")
    axes[1].plot(t, np.abs(mass - mass[0]) / mass[0])
    axes[1].set_xlabel("t")
    axes[1].set_yscale("log")
    axes[1].set_title("relative mass drift")
    fig.tight_layout()
    p = out_dir / "norms.png"
    fig.savefig(p, dpi=110)
    plt.close(fig)
    written.append(p)

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(t, trajectory.series("energy"), label="E")
    ax.plot(t, trajectory.series("pseudo_energy"), label="pseudo-E")
    if "gronwall" in summary:
        c0 = summary["gronwall"]["C0_min"]
        pe0 = trajectory.records[0].pseudo_energy
        ax.plot(t, (1.0 + pe0) * np.exp(c0 * (t - t[0])) - 1.0, "k--",
                label=f"envelope C0={c0:.3g}", lw=1)
    ax.set_xlabel("t")
    ax.legend(fontsize=8)
    ax.set_title("energies")
    fig.tight_layout()
    p = out_dir / "energies.png"
    fig.savefig(p, dpi=110)
    plt.close(fig)
    written.append(p)

    if "scattering" in summary:
        times = summary["scattering"]["times"]
        diffs = summary["scattering"]["differences"]
        fig, ax = plt.subplots(figsize=(5, 4))
        ax.loglog(times[:-1], diffs, "o-")
        ax.set_xlabel("t")
        ax.set_ylabel("||w(t_{j+1}) - w(t_j)||")
        ax.set_title(f"pullback differences ({summary['scattering']['verdict']})")
        fig.tight_layout()
        p = out_dir / "scattering.png"
        fig.savefig(p, dpi=110)
        plt.close(fig)
        written.append(p)
    return written
