"""The four figure kinds.

Scaling-law quantities are always drawn log-log.  Theory overlays are
computed here from their closed forms, never read from the data:
the transfer-norm power coupling^2 / (8 - 2 E^2) and the local dimension
(4 - E^2 - coupling^2) / (4 - E^2) of the decaying random model.
"""

import os
from dataclasses import dataclass

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .artifacts import ArtifactError, load_run, require_columns  # noqa: E402

FIGURE_KINDS = ("growth-loglog", "exponent-vs-E", "borel-fan", "transport")

# fixed renderer settings so identical inputs give identical bytes
matplotlib.rcParams.update({
    "figure.dpi": 110,
    "savefig.dpi": 110,
    "svg.hashsalt": "latspec-figures",
})


def transfer_power_theory(coupling, energy):
    return coupling ** 2 / (8.0 - 2.0 * np.asarray(energy) ** 2)


def local_dimension_theory(coupling, energy):
    e2 = np.asarray(energy) ** 2
    return (4.0 - e2 - coupling ** 2) / (4.0 - e2)


@dataclass
class FigureRequest:
    run_dir: str
    kind: str
    output: str
    theory_overlays: bool = True


def _tail_slope(x, y):
    lx, ly = np.log(x), np.log(y)
    tail = slice(len(lx) // 2, None)
    a = np.vstack([lx[tail], np.ones_like(lx[tail])]).T
    return float(np.linalg.lstsq(a, ly[tail], rcond=None)[0][0])


def _fig_growth(columns, summary, ax):
    key = "E" if "E" in columns else "representation"
    require_columns(columns, [key, "R", "norm_sq"], "growth-loglog")
    for value in dict.fromkeys(columns[key].tolist()):
        sel = columns[key] == value
        r = columns["R"][sel]
        n2 = columns["norm_sq"][sel]
        label = f"{key}={value}" if key == "E" else str(value)
        ax.loglog(r, n2, "o-", ms=3,
                  label=f"{label}  (slope {_tail_slope(r, n2):.2f})")
    ax.set_xlabel("R")
    ax.set_ylabel(r"$\|u\|^2_{C_R}$")
    ax.set_title("norm growth over expanding cubes")
    ax.legend(fontsize=7)


def _fig_exponent_vs_e(columns, summary, ax, overlays):
    fits = summary.get("fits")
    coupling = summary.get("coupling")
    if not fits or coupling is None or "cv_mean" not in fits[0]:
        raise ArtifactError(
            "exponent-vs-E needs a kls-exponent summary with per-energy fits"
        )
    energies = np.array([f["energy"] for f in fits])
    order = np.argsort(energies)
    energies = energies[order]
    means = np.array([f["cv_mean"] for f in fits])[order]
    errs = np.array([f["cv_stderr"] for f in fits])[order]
    alphas = np.array([f["alpha_est"] for f in fits])[order]
    ax.errorbar(energies, means, yerr=2 * errs, fmt="o", ms=4, capsize=3,
                label="measured power")
    ax.plot(energies, alphas, "s", ms=4, label="derived dimension")
    if overlays:
        grid = np.linspace(min(energies.min(), -1.5), max(energies.max(), 1.5), 200)
        ax.plot(grid, transfer_power_theory(coupling, grid), "-", lw=1,
                label=r"$\lambda^2/(8-2E^2)$")
        ax.plot(grid, local_dimension_theory(coupling, grid), "--", lw=1,
                label=r"$(4-E^2-\lambda^2)/(4-E^2)$")
    ax.set_xlabel("E")
    ax.set_ylabel("exponent")
    ax.set_title(f"transfer power and local dimension (coupling {coupling})")
    ax.legend(fontsize=7)


def _fig_borel_fan(columns, summary, ax):
    require_columns(columns, ["size", "seed", "eps", "im_f"], "borel-fan")
    for size in dict.fromkeys(columns["size"].tolist()):
        sel_size = columns["size"] == size
        for seed in dict.fromkeys(columns["seed"][sel_size].tolist()):
            sel = sel_size & (columns["seed"] == seed)
            ax.loglog(columns["eps"][sel], columns["im_f"][sel],
                      "-", lw=0.7, alpha=0.6)
    if "in_window" in columns:
        win = columns["in_window"] > 0.5
        if win.any():
            ax.loglog(columns["eps"][win], columns["im_f"][win], "k.",
                      ms=2.5, label="fit window")
            ax.legend(fontsize=7)
    ax.set_xlabel(r"$\varepsilon$")
    ax.set_ylabel(r"$\mathrm{Im}\,F(E+i\varepsilon)$")
    ax.set_title("Borel-transform scaling fan")


def _fig_transport(columns, summary, ax):
    require_columns(columns, ["T", "m", "moment"], "transport")
    for m in dict.fromkeys(columns["m"].tolist()):
        sel = columns["m"] == m
        t = columns["T"][sel]
        mom = columns["moment"][sel]
        if np.any(np.isnan(mom)):
            continue
        beta = summary.get("exponents", {}).get(str(int(m)), {}).get("value")
        label = f"m={int(m)}"
        if beta is not None:
            label += rf"  ($\beta_{int(m)}$ = {beta:.2f})"
        ax.loglog(t, mom, "o-", ms=3, label=label)
    if "survival" in columns:
        surv = columns["survival"]
        sel = ~np.isnan(surv)
        if sel.any():
            twin = ax.twinx()
            t = columns["T"][sel]
            twin.semilogx(t, surv[sel], "r--", lw=1, label="ball survival")
            twin.set_ylabel("survival", color="r")
            twin.set_ylim(0, 1.05)
    ax.set_xlabel("T")
    ax.set_ylabel(r"$\langle\langle |X|^m \rangle\rangle_T$")
    ax.set_title("time-averaged transport moments")
    ax.legend(fontsize=7, loc="upper left")


def render(request):
    """Render one figure kind from a run directory; writes both PNG and
    SVG next to the requested output path and returns their paths."""
    if request.kind not in FIGURE_KINDS:
        raise ArtifactError(f"unknown figure kind {request.kind!r}")
    columns, summary = load_run(request.run_dir)
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    try:
        if request.kind == "growth-loglog":
            _fig_growth(columns, summary, ax)
        elif request.kind == "exponent-vs-E":
            _fig_exponent_vs_e(columns, summary, ax, request.theory_overlays)
        elif request.kind == "borel-fan":
            _fig_borel_fan(columns, summary, ax)
        else:
            _fig_transport(columns, summary, ax)
        fig.tight_layout()
        base, ext = os.path.splitext(request.output)
        if ext.lower() not in (".png", ".svg"):
            base = request.output
        paths = (base + ".png", base + ".svg")
        fig.savefig(paths[0], metadata={"Software": "latspec-figures"})
        fig.savefig(paths[1], metadata={"Date": None})
        return paths
    finally:
        plt.close(fig)


def check_exponent_overlay(run_dir, tol=0.03):
    """Deviation of the measured transfer powers from the closed-form
    curve: returns (max deviation, per-energy table).  The overlay
    'brackets' the points when the max deviation is within tol."""
    _, summary = load_run(run_dir)
    fits = summary.get("fits")
    coupling = summary.get("coupling")
    if not fits or coupling is None:
        raise ArtifactError("not a kls-exponent artifact")
    table = []
    for f in fits:
        dev = abs(f["cv_mean"] - float(transfer_power_theory(coupling, f["energy"])))
        table.append((f["energy"], f["cv_mean"], dev))
    max_dev = max(dev for _, _, dev in table)
    return max_dev, table
