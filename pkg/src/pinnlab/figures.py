"""Matplotlib renderings of the three study tables, used by ``pinnlab report``."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "figure.figsize": (6.0, 4.2),
    "figure.dpi": 120,
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.6,
    "lines.markersize": 4,
    "legend.frameon": False,
    "svg.hashsalt": "pinnlab",
}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, metadata={"Software": None} if str(path).endswith(".png") else None)
    plt.close(fig)
    return Path(path)


def perturbation_figure(rows, path):
    d = np.array([r["delta"] for r in rows])
    with plt.rc_context(STYLE):
        fig, (ax, ax2) = plt.subplots(1, 2, figsize=(10, 4))
        ax.loglog(d, [max(r["d_total"], 1e-300) for r in rows], "o-", label="measured |dL_PINN|")
        ax.loglog(d, [r["bound"] for r in rows], "--", label="bound 2dS + d^2(1+lam C^2)")
        ax.set_xlabel("perturbation amplitude delta")
        ax.set_ylabel("loss change")
        ax.legend()
        ax2.semilogx(d, [r["ratio"] for r in rows], "o-")
        ax2.axhline(1.0, color="k", lw=0.8)
        ax2.set_xlabel("perturbation amplitude delta")
        ax2.set_ylabel("measured / bound")
        return _save(fig, path)


def concentration_figure(agg, fit, path):
    n = np.array([a["n_f"] for a in agg], dtype=float)
    s = np.array([a["std"] for a in agg])
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.loglog(n, s, "o-", label="std of L_f")
        if fit is not None:
            ax.loglog(n, np.exp(fit.intercept) * n ** fit.slope, "--",
                      label=f"fit slope {fit.slope:.3f}")
        ax.loglog(n, s[0] * np.sqrt(n[0] / n), ":", label="N_f^-1/2 reference")
        ax.set_xlabel("collocation points N_f")
        ax.set_ylabel("std of physics loss")
        ax.legend()
        return _save(fig, path)


def generalization_figure(rows, fit, path):
    ls = np.array([r["l_s"] for r in rows])
    c0 = np.array([r["c0_error"] for r in rows])
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        sc = ax.scatter(ls, c0, c=[r["n_f"] for r in rows], cmap="viridis", s=18)
        fig.colorbar(sc, ax=ax, label="N_f")
        if fit is not None:
            grid = np.geomspace(ls.min(), ls.max(), 50)
            ax.plot(grid, np.exp(fit.intercept) * grid ** fit.slope, "--",
                    label=f"fit slope {fit.slope:.3f}")
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("Sobolev loss L_s")
        ax.set_ylabel("C0 error")
        ax.legend()
        return _save(fig, path)
