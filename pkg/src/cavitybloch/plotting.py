"""Figure rendering for the experiment runner.

Every experiment gets one PNG summarising its data files, written next
to them.  Rendering is headless (Agg) and optional; the CSV files are
the primary output.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

_MARKERS = {"bragg": "o", "doppleron": "s", "triple": "D"}


def _save(fig, path: Path) -> Path:
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path


def _render_dispersion(experiment, settings, results, out):
    tables = results["tables"]
    fig, axes = plt.subplots(1, len(tables), figsize=(4.2 * len(tables), 3.6),
                             sharey=True)
    axes = np.atleast_1d(axes)
    for ax, entry in zip(axes, tables):
        table = entry["table"]
        for nu in range(1, table.nu_max + 1):
            ax.plot(table.k, table.band(nu), lw=1.2)
        e_top = table.energies.max()
        for cr in entry["crossings"]:
            if cr.energy <= e_top:
                ax.plot(cr.k, cr.energy, _MARKERS[cr.kind], mfc="none",
                        mec="k", ms=7)
        ax.set_xlabel("k")
        ax.set_title(f"delta = {entry['delta']:g}")
    axes[0].set_ylabel("E")
    fig.suptitle(f"bands, v0 = {settings['v0']:g}")
    return [_save(fig, out / f"{experiment}.png")]


def _density_panel(ax, traj, which):
    mat = traj.snapshot_plus if which == "plus" else traj.snapshot_minus
    x = traj.final_state.grid.x
    extent = [traj.snapshot_t[0], traj.snapshot_t[-1], x[0], x[-1]]
    ax.imshow(mat, aspect="auto", origin="lower", extent=extent,
              cmap="Greys" if which == "plus" else "Blues")
    ax.set_ylabel("x")
    ax.set_title(f"|psi_{which}|^2")


def _render_bloch(experiment, settings, results, out):
    traj = results["trajectory"]
    n_rows = 2 + (2 if traj.snapshot_t is not None else 0)
    fig, axes = plt.subplots(n_rows, 1, figsize=(6.4, 2.2 * n_rows),
                             sharex=True)
    row = 0
    if traj.snapshot_t is not None:
        _density_panel(axes[0], traj, "plus")
        _density_panel(axes[1], traj, "minus")
        row = 2
    axes[row].plot(traj.t, traj.inversion, lw=1.0)
    axes[row].set_ylabel("<sigma_z>")
    axes[row].set_ylim(-1.05, 1.05)
    row += 1
    if traj.band_pops is not None:
        for i, nu in enumerate(traj.nu_list):
            axes[row].plot(traj.t, traj.band_pops[:, i], lw=1.0,
                           label=f"band {nu}")
        axes[row].legend(fontsize=8)
        axes[row].set_ylabel("P(band)")
    else:
        axes[row].plot(traj.t, traj.x_mean, lw=1.0)
        axes[row].set_ylabel("<x>")
    axes[row].set_xlabel("t")
    return [_save(fig, out / f"{experiment}.png")]


def _render_crossing_sweep(experiment, settings, results, out):
    sweep = results["sweep"]
    fig, ax = plt.subplots(figsize=(5.4, 3.8))
    ax.plot(sweep["force"], sweep["p_window"], ":o", label="P_+(-1<p<0)")
    ax.plot(sweep["force"], sweep["p_band1"], "--s", label="P(band 1)")
    ax.plot(sweep["force"], sweep["lz3_matrix"], "-", label="transition matrix")
    ax.plot(sweep["force"], sweep["lz3_integrated"], "-.", label="3-level integration")
    ax.set_xlabel("F")
    ax.set_ylabel("transfer probability")
    ax.legend(fontsize=8)
    return [_save(fig, out / f"{experiment}.png")]


def _render_surfaces(experiment, settings, results, out):
    k, t, surfaces = results["k"], results["t"], results["surfaces"]
    fig = plt.figure(figsize=(6.4, 4.2))
    ax = fig.add_subplot(projection="3d")
    tt, kk = np.meshgrid(t, k)
    for nu in range(surfaces.shape[0]):
        ax.plot_surface(kk, tt, surfaces[nu], alpha=0.75,
                        cmap="viridis" if nu == 0 else "plasma",
                        linewidth=0, antialiased=False)
    ax.set_xlabel("k")
    ax.set_ylabel("t")
    ax.set_zlabel("E")
    return [_save(fig, out / f"{experiment}.png")]


def _render_chirp(experiment, settings, results, out):
    traj = results["trajectory"]
    has_snap = traj.snapshot_t is not None
    fig, axes = plt.subplots(2 if has_snap else 1, 1,
                             figsize=(6.4, 4.4 if has_snap else 3.0),
                             sharex=True)
    axes = np.atleast_1d(axes)
    if has_snap:
        _density_panel(axes[0], traj, "minus")
    ax = axes[-1]
    ax.plot(traj.t, traj.inversion, lw=1.0, label="numerical")
    ax.plot(traj.t, results["adiabatic"] - 1.0, ":", lw=1.0,
            label="adiabatic (shifted)")
    ax.set_xlabel("t")
    ax.set_ylabel("<sigma_z>")
    ax.legend(fontsize=8)
    return [_save(fig, out / f"{experiment}.png")]


def _render_decay(experiment, settings, results, out):
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    for run in results["runs"]:
        ax.plot(run["t"], run["inversion"], lw=0.8,
                label=f"1/kappa = {1.0 / run['kappa']:.0f}")
    if "poisson" in results:
        avg = results["poisson"]
        ax.plot(avg["t"], avg["inversion"], "k--", lw=1.2,
                label=f"n_bar = {avg['n_bar']:g} average")
    ax.set_xlabel("t")
    ax.set_ylabel("<sigma_z>")
    ax.legend(fontsize=8)
    return [_save(fig, out / f"{experiment}.png")]


_RENDERERS = {
    "dispersion": _render_dispersion,
    "bloch": _render_bloch,
    "crossing_sweep": _render_crossing_sweep,
    "surfaces": _render_surfaces,
    "chirp": _render_chirp,
    "decay": _render_decay,
}


def render(experiment: str, settings: dict, results: dict, out: Path) -> list[Path]:
    """Render the figure(s) for one experiment; returns the written paths."""
    renderer = _RENDERERS.get(settings["kind"])
    if renderer is None:
        return []
    return renderer(experiment, settings, results, out)
