"""Figure rendering for sweep tables.

Every function takes rows produced by :mod:`.harness` and writes a PNG next
to the delimited output; nothing here opens a window (Agg backend is forced
at import).  The plots are meant as quick visual reports of a run, not
publication figures.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .harness import FitResult, power_law_fit  # noqa: E402

__all__ = [
    "plot_observable_sweep",
    "plot_mf_sweep",
    "plot_gap_sweep",
    "plot_chi_sweep",
    "plot_binder",
    "plot_phase_diagram",
    "plot_fit",
]


def _save(fig, path) -> None:
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def _groups(rows, sweep_param, ycol):
    """{N: (x, y)} with error rows dropped, N ascending."""
    out = {}
    for N in sorted({r["N"] for r in rows}):
        sel = [
            r
            for r in rows
            if r["N"] == N and not r.get("error") and r.get(ycol) is not None
        ]
        x = np.array([r[sweep_param] for r in sel], dtype=float)
        y = np.array([r[ycol] for r in sel], dtype=float)
        if x.size:
            out[int(N)] = (x, y)
    return out


def _colors(n):
    return plt.cm.viridis(np.linspace(0.0, 0.85, max(n, 2)))


def plot_observable_sweep(rows, sweep_param, observables, path) -> None:
    """Panel grid of each observable versus the swept coupling, per N."""
    obs = [o for o in observables if any(r.get(o) is not None for r in rows)]
    if not obs:
        raise ValueError("no observable columns present in rows")
    ncol = 2 if len(obs) > 1 else 1
    nrow = (len(obs) + ncol - 1) // ncol
    fig, axes = plt.subplots(
        nrow, ncol, figsize=(4.2 * ncol, 3.0 * nrow), squeeze=False,
        constrained_layout=True,
    )
    for ax, name in zip(axes.flat, obs):
        groups = _groups(rows, sweep_param, name)
        for color, (N, (x, y)) in zip(_colors(len(groups)), groups.items()):
            ax.plot(x, y, "-", color=color, lw=1.2, label=f"N={N}")
        mf_col = name + "_mf"
        mf = _groups(rows, sweep_param, mf_col)
        if mf:
            x, y = mf[max(mf)]
            ax.plot(x, y, "k--", lw=1.0, label="mean field")
        ax.set_xlabel(sweep_param)
        ax.set_ylabel(name)
    for ax in axes.flat[len(obs):]:
        ax.set_visible(False)
    axes.flat[0].legend(fontsize=7, ncol=2)
    _save(fig, path)


def plot_mf_sweep(rows, sweep_param, path) -> None:
    """Mean-field branches: transverse order, magnetization, entropy."""
    x = np.array([r[sweep_param] for r in rows], dtype=float)
    fm = np.array([r.get("branch") == "ferromagnetic" for r in rows])
    fig, axes = plt.subplots(1, 3, figsize=(11, 3.1), constrained_layout=True)
    for ax, col, label in zip(
        axes, ["Sxx_mf", "sz", "entropy_per_spin"],
        ["transverse order  sx^2", "sz", "entropy per spin"],
    ):
        y = np.array([r[col] for r in rows], dtype=float)
        ax.plot(x, y, "-", color="tab:blue", lw=1.3)
        if fm.any():
            ax.plot(x[fm], y[fm], "-", color="tab:red", lw=1.8)
        ax.set_xlabel(sweep_param)
        ax.set_ylabel(label)
    if fm.any():
        axes[0].plot([], [], color="tab:red", lw=1.8, label="ferromagnetic")
        axes[0].plot([], [], color="tab:blue", lw=1.3, label="paramagnetic")
        axes[0].legend(fontsize=8)
    _save(fig, path)


def plot_gap_sweep(rows, sweep_param, path) -> None:
    """Gap versus coupling per N, plus minimum gap versus N (log-log)."""
    groups = _groups(rows, sweep_param, "gap")
    groups = {
        N: (x[np.isfinite(y)], y[np.isfinite(y)]) for N, (x, y) in groups.items()
    }
    groups = {N: xy for N, xy in groups.items() if xy[0].size}
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.6, 3.3), constrained_layout=True)
    for color, (N, (x, y)) in zip(_colors(len(groups)), groups.items()):
        if x.size > 1:
            ax1.plot(x, y, "-", color=color, lw=1.2, label=f"N={N}")
        else:
            ax1.plot(x, y, "o", color=color, label=f"N={N}")
    ax1.set_xlabel(sweep_param)
    ax1.set_ylabel("gap")
    ax1.legend(fontsize=7)
    Ns = np.array(sorted(groups))
    gmin = np.array([groups[N][1].min() for N in Ns])
    ax2.loglog(Ns, gmin, "o", color="tab:blue")
    if Ns.size >= 3 and (gmin > 0).all():
        fit = power_law_fit(Ns, gmin)
        xs = np.linspace(Ns.min(), Ns.max(), 50)
        ax2.loglog(xs, fit.prefactor * xs**fit.exponent, "k--", lw=1,
                   label=f"N^{fit.exponent:.3f}")
        ax2.legend(fontsize=8)
    ax2.set_xlabel("N")
    ax2.set_ylabel("min gap")
    _save(fig, path)


def plot_chi_sweep(rows, sweep_param, path) -> None:
    """Averaged susceptibility versus coupling per N, with peak markers."""
    groups = _groups(rows, sweep_param, "chi_av")
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.6, 3.3), constrained_layout=True)
    peaks = {}
    for color, (N, (x, y)) in zip(_colors(len(groups)), groups.items()):
        ax1.plot(x, y, "-", color=color, lw=1.2, label=f"N={N}")
        i = int(np.argmax(y))
        peaks[N] = y[i]
        ax1.plot([x[i]], [y[i]], "v", color=color, ms=4)
    ax1.set_xlabel(sweep_param)
    ax1.set_ylabel("chi_av")
    ax1.legend(fontsize=7)
    Ns = np.array(sorted(peaks))
    pk = np.array([peaks[N] for N in Ns])
    ax2.loglog(Ns, pk, "o", color="tab:blue")
    if Ns.size >= 3 and (pk > 0).all():
        fit = power_law_fit(Ns, pk)
        xs = np.linspace(Ns.min(), Ns.max(), 50)
        ax2.loglog(xs, fit.prefactor * xs**fit.exponent, "k--", lw=1,
                   label=f"N^{fit.exponent:.3f}")
        ax2.legend(fontsize=8)
    ax2.set_xlabel("N")
    ax2.set_ylabel("max chi_av")
    _save(fig, path)


def plot_binder(curve_rows, crossing_rows, sweep_param, axis, path) -> None:
    """Binder-cumulant curves with the pairwise crossings marked."""
    ycol = f"Bc_{axis}"
    groups = _groups(curve_rows, sweep_param, ycol)
    fig, ax = plt.subplots(figsize=(4.6, 3.4), constrained_layout=True)
    for color, (N, (x, y)) in zip(_colors(len(groups)), groups.items()):
        ax.plot(x, y, "-", color=color, lw=1.2, label=f"N={N}")
    for r in crossing_rows:
        ax.axvline(r["crossing"], color="0.5", ls=":", lw=0.9)
    ax.set_xlabel(sweep_param)
    ax.set_ylabel(ycol)
    ax.legend(fontsize=7)
    _save(fig, path)


def plot_phase_diagram(rows, path, marker=None) -> None:
    """Mean-field critical line in the (Jx, Jy) plane."""
    x = np.array([r["Jx"] for r in rows], dtype=float)
    y = np.array([r["Jy_c"] for r in rows], dtype=float)
    order = np.argsort(x)
    fig, ax = plt.subplots(figsize=(4.6, 3.4), constrained_layout=True)
    ax.plot(x[order], y[order], "-", color="tab:blue", lw=1.4, label="Jy_c(Jx)")
    lo = min(y.min(), x.min())
    ax.fill_between(x[order], y[order], y.max(), alpha=0.15, color="tab:red",
                    label="ferromagnetic")
    if marker is not None:
        ax.plot([marker[0]], [marker[1]], "k*", ms=9)
    ax.set_xlabel("Jx")
    ax.set_ylabel("Jy")
    ax.set_ylim(lo, y.max())
    ax.legend(fontsize=8)
    _save(fig, path)


def plot_fit(x, y, fit: FitResult, path, xlabel="x", ylabel="y") -> None:
    """Log-log scatter with the fitted power law overlaid."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    fig, ax = plt.subplots(figsize=(4.2, 3.3), constrained_layout=True)
    ax.loglog(x, y, "o", color="tab:blue")
    xs = np.linspace(x.min(), x.max(), 64)
    ax.loglog(xs, fit.prefactor * xs**fit.exponent, "k--", lw=1.1,
              label=f"exponent {fit.exponent:.4f} (rms {fit.residual_rms:.3f})")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.legend(fontsize=8)
    _save(fig, path)
