"""Figure rendering for CLI reports.

Every function takes already-computed data and writes one PNG next to
the delimited output. The Agg backend keeps this headless; fixed dpi
and stripped writer metadata keep the bytes reproducible.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_SAVE = {"dpi": 110, "metadata": {"Software": None}}


def _finish(fig, path: str) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    fig.savefig(path, **_SAVE)
    plt.close(fig)
    return path


def residual_figure(report, path: str) -> str:
    """Log-scale bars of max |residual| per equation with the tolerance
    line."""
    names = [r.equation for r in report.results]
    vals = [max(r.max_abs_residual, 1e-20) for r in report.results]
    fig, ax = plt.subplots(figsize=(7, 3.2))
    ax.bar(range(len(names)), vals, color="#4878a8")
    ax.axhline(report.tol, color="#c44e52", lw=1.2,
               label=f"tolerance {report.tol:g}")
    ax.set_yscale("log")
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("max |residual|")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _finish(fig, path)


def trajectory_figure(traj, swirl, path: str) -> str:
    """Meridian path and the conserved r * v_theta along it."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8, 3.2))
    ax1.plot(traj.r, traj.z, color="#4878a8")
    ax1.plot([traj.r[0]], [traj.z[0]], "o", color="#55a868")
    ax1.plot([traj.r[-1]], [traj.z[-1]], "s", color="#c44e52")
    ax1.set_xlabel("r")
    ax1.set_ylabel("z")
    ax1.set_title("particle path", fontsize=9)
    ax2.plot(traj.times, swirl, color="#4878a8")
    ax2.set_xlabel("t")
    ax2.set_ylabel("r * vtheta")
    ax2.set_title("transported angular momentum", fontsize=9)
    fig.tight_layout()
    return _finish(fig, path)


def snapshot_figure(snapshot, exact, path: str) -> str:
    """Absolute swirl error over the meridian grid."""
    grid = snapshot.grid
    err = np.abs(snapshot.values - exact)
    fig, ax = plt.subplots(figsize=(5.5, 4))
    mesh = ax.pcolormesh(grid.r_nodes(), grid.z_nodes(), err.T,
                         shading="nearest", cmap="magma")
    fig.colorbar(mesh, ax=ax, label="|vtheta error|")
    ax.set_xlabel("r")
    ax.set_ylabel("z")
    ax.set_title(f"swirl error at t = {snapshot.time_tag:.4f}", fontsize=9)
    fig.tight_layout()
    return _finish(fig, path)


def convergence_figure(study, path: str) -> str:
    """Error versus grid spacing with a second-order guide line."""
    h = np.array([e.h for e in study.entries])
    err = np.array([e.rel_linf for e in study.entries])
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.loglog(h, err, "o-", color="#4878a8", label="measured")
    guide = err[0] * (h / h[0]) ** 2
    ax.loglog(h, guide, "--", color="#999999", label="order 2")
    ax.set_xlabel("grid spacing h")
    ax.set_ylabel("relative sup error")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _finish(fig, path)


def fit_figure(samples, fit, t_star: float, path: str) -> str:
    """Samples and fitted power law in log-log axes."""
    taus = np.array([t_star - t for t, _ in samples])
    qs = np.array([q for _, q in samples])
    order = np.argsort(taus)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.loglog(taus[order], qs[order], "o", color="#4878a8",
              label="samples")
    ax.loglog(taus[order], fit.prefactor * taus[order] ** fit.exponent,
              "-", color="#c44e52",
              label=f"fit exponent {fit.exponent:.4f}")
    ax.set_xlabel("time to blowup")
    ax.set_ylabel("sup |grad v|")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _finish(fig, path)


def bkm_figure(curve, references, path: str) -> str:
    """Vorticity time integral against the logarithmic reference."""
    t1 = [p[0] for p in curve]
    vals = [p[1] for p in curve]
    refs = [p[1] for p in references]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(t1, vals, "o-", color="#4878a8", label="quadrature")
    ax.plot(t1, refs, "--", color="#c44e52", label="log reference")
    ax.set_xlabel("t1")
    ax.set_ylabel("integral of sup |omega|")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _finish(fig, path)


def energy_figure(eps_study, path: str) -> str:
    """Truncated kinetic energy as the inner radius shrinks."""
    eps = [p[0] for p in eps_study]
    vals = [p[1] for p in eps_study]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.semilogx(eps, vals, "o-", color="#4878a8")
    ax.invert_xaxis()
    ax.set_xlabel("inner radius")
    ax.set_ylabel("kinetic energy")
    fig.tight_layout()
    return _finish(fig, path)
