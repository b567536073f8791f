#!/usr/bin/env python3
"""Regenerate every data table (and PNG) in this directory.

Each figure of the study is reproduced as one or more delimited tables
written next to this script, mostly by invoking the ``xyzspin`` CLI on
the JSON configs under ``configs/``.  Derived tables
(per-size minima, peak positions, mean-field deltas, power-law
exponents) are computed here from the CLI output using the library's
own fitting helpers, so the whole directory is reproducible with

    python docs/figures/generate.py            # everything, ~10-15 min
    python docs/figures/generate.py --only fig4 fig8

Sweeps run at a reduced scale compared to the original study (smaller
system sizes, coarser grids); README.md lists the exact reduction for
every figure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import shutil
import subprocess
import sys
import time
from pathlib import Path

HERE = Path(__file__).resolve().parent
CONFIG_DIR = HERE / "configs"
CLI = [sys.executable, "-m", "xyzspin.cli"]

MODEL = {"Jx": 0.6, "Jy": 1.3, "Jz": 1.0, "gamma": 1.0, "Gamma": 0.0, "N": 4}
MIXED = {"gamma": 1.0 / 3.0, "Gamma": 2.0 / 3.0}  # gamma + Gamma = 1, Gamma = 2 gamma


def run(*args: str) -> None:
    cmd = CLI + list(args)
    print("  $", " ".join(a if " " not in a else repr(a) for a in cmd[2:]))
    subprocess.run(cmd, check=True, cwd=HERE)


def config(name: str, sweep: dict | None = None, **overrides) -> str:
    doc = dict(MODEL, **overrides)
    if sweep is not None:
        doc["sweep"] = sweep
    CONFIG_DIR.mkdir(exist_ok=True)
    path = CONFIG_DIR / f"{name}.json"
    path.write_text(json.dumps(doc, indent=2) + "\n")
    return str(path.relative_to(HERE))


def write_table(name: str, columns: list[str], rows: list[dict]) -> None:
    with open(HERE / name, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=columns)
        w.writeheader()
        w.writerows(rows)
    print(f"  wrote {name} ({len(rows)} rows)")


def read(name: str):
    from xyzspin.harness import read_table

    return read_table(HERE / name)


def group_by(rows, key):
    out: dict = {}
    for r in rows:
        out.setdefault(r[key], []).append(r)
    return out


def as_int(v) -> int:
    """Undo the float round-trip CSV imposes on integer columns."""
    return int(round(v))


def clean_checkpoints() -> None:
    shutil.rmtree(HERE / "checkpoints", ignore_errors=True)


# ----------------------------------------------------------------------
# fig2 -- mean-field steady state vs Jy, collective+local (a) and local (b)


def fig2() -> None:
    sweep = {"param": "Jy", "lo": 1.0, "hi": 2.2, "points": 121}
    cfg = config("fig2a_mf_mixed", sweep=sweep, N=math.inf, **MIXED)
    run("mf-sweep", "--config", cfg, "--out", "fig2a_mf_mixed.csv")
    cfg = config("fig2b_mf_local", sweep=sweep, N=math.inf)
    run("mf-sweep", "--config", cfg, "--out", "fig2b_mf_local.csv")


# ----------------------------------------------------------------------
# fig3 -- Liouvillian spectrum in the complex plane, N = 4, Jy = Jz


def fig3() -> None:
    from xyzspin.liouvillian import build_full_liouvillian
    from xyzspin.model import ModelParams
    from xyzspin.spectral import full_spectrum

    cases = [
        ("fig3a_spectrum_local.csv", ModelParams(**{**MODEL, "Jy": 1.0})),
        ("fig3b_spectrum_mixed.csv", ModelParams(**{**MODEL, "Jy": 1.0, **MIXED})),
    ]
    summary = []
    clouds = []
    for name, p in cases:
        rep = full_spectrum(build_full_liouvillian(p))
        rows = [
            {"i": i, "re": ev.real, "im": ev.imag}
            for i, ev in enumerate(rep.eigenvalues)
        ]
        write_table(name, ["i", "re", "im"], rows)
        summary.append(
            {
                "case": Path(name).stem.split("_")[-1],
                "gamma": p.gamma,
                "Gamma": p.Gamma,
                "pt_symmetric": rep.pt_symmetric,
                "eta": rep.eta if rep.pt_symmetric else "",
                "gap": rep.gap,
            }
        )
        clouds.append(rep)
    write_table(
        "fig3_summary.csv",
        ["case", "gamma", "Gamma", "pt_symmetric", "eta", "gap"],
        summary,
    )

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, axes = plt.subplots(1, 2, figsize=(9, 4), sharey=True)
    for ax, rep, (_, p), title in zip(
        axes, clouds, cases, ["local dissipation", "local + collective"]
    ):
        ev = rep.eigenvalues
        ax.plot([e.real for e in ev], [e.imag for e in ev], "o", ms=3, alpha=0.6)
        if rep.pt_symmetric:
            ax.axvline(-rep.eta, ls="--", c="k", lw=0.8)
        ax.set_title(f"{title} (gamma={p.gamma:.3g}, Gamma={p.Gamma:.3g})")
        ax.set_xlabel(r"Re $\lambda$")
    axes[0].set_ylabel(r"Im $\lambda$")
    fig.tight_layout()
    fig.savefig(HERE / "fig3_spectra.png", dpi=150)
    plt.close(fig)
    print("  wrote fig3_spectra.png")


# ----------------------------------------------------------------------
# fig4 -- gap vs Jy for N = 2..8 and the power-law fit of its minimum


def fig4() -> None:
    cfg = config(
        "fig4_gap",
        sweep={"param": "Jy", "lo": 0.8, "hi": 2.2, "points": 15,
               "Ns": [2, 3, 4, 5, 6, 7, 8]},
    )
    run("gap-sweep", "--config", cfg, "--out", "fig4a_gap_sweep.csv")
    _, rows = read("fig4a_gap_sweep.csv")
    minima = []
    for N, grp in sorted(group_by(rows, "N").items()):
        best = min(grp, key=lambda r: r["gap"])
        minima.append(
            {"N": as_int(N), "min_gap": best["gap"], "Jy_at_min": best["Jy"]}
        )
    write_table("fig4b_gap_minima.csv", ["N", "min_gap", "Jy_at_min"], minima)
    run(
        "fit", "--table", "fig4b_gap_minima.csv", "--x", "N", "--y", "min_gap",
        "--out", "fig4b_fit.csv",
    )


# ----------------------------------------------------------------------
# fig5 -- phase diagram: mean-field boundary plus quantum Bc crossings


def fig5() -> None:
    cfg = config("fig5_boundary")
    run(
        "phase-diagram", "--config", cfg, "--jx-lo", "-1.0", "--jx-hi", "0.9",
        "--points", "39", "--out", "fig5_mf_boundary.csv",
    )
    from xyzspin.meanfield import mf_phase_boundary

    for jx in (0.0, 0.3, 0.6):
        ((_, jy_c),) = mf_phase_boundary([jx], Jz=MODEL["Jz"], gamma=MODEL["gamma"])
        tag = f"jx{jx:.1f}".replace(".", "")
        cfg = config(
            f"fig5_cross_{tag}",
            Jx=jx,
            sweep={"param": "Jy", "lo": round(jy_c - 0.03, 6),
                   "hi": round(jy_c + 0.09, 6), "points": 9, "Ns": [20, 30]},
        )
        run(
            "bc-cross", "--config", cfg, "--pairs", "20:30", "--reference",
            str(jy_c), "--out", f"fig5_cross_{tag}.csv",
        )
    clean_checkpoints()


# ----------------------------------------------------------------------
# fig6 + fig7 -- steady-state observables vs Jy (local dissipation), the
# mean-field reference, and finite-size exponents at three couplings


OBS_SWEEP = {"param": "Jy", "lo": 1.1, "hi": 1.7, "points": 33,
             "observables": ["Sxx", "Mz", "entropy_per_spin"]}
SCALING_COUPLINGS = (1.1, 1.15625, 1.7)  # PM phase / critical point / FM phase


def _deltas_and_exponents(
    obs_table, mf_for, prefix, couplings=SCALING_COUPLINGS, fit_min_n=20
):
    """Write |observable - mean field| and its power-law exponents in N.

    *mf_for* maps (N, Jy) to the mean-field reference row (with a Jy grid
    identical to the observable sweep, so float keys match exactly).
    Sizes below *fit_min_n* stay in the delta table but are excluded from
    the fits as clearly pre-asymptotic.
    """
    from xyzspin.harness import power_law_fit

    _, rows = read(obs_table)
    deltas = []
    for r in rows:
        mf = mf_for(r["N"], r["Jy"])
        deltas.append(
            {
                "N": as_int(r["N"]),
                "Jy": r["Jy"],
                "dSxx": abs(r["Sxx"] - mf["Sxx_mf"]),
                "dMz": abs(r["Mz"] - mf["sz"]),
                "dS": abs(r["entropy_per_spin"] - mf["entropy_per_spin"]),
            }
        )
    write_table(f"{prefix}_deltas.csv", ["N", "Jy", "dSxx", "dMz", "dS"], deltas)
    fits = []
    for jy in couplings:
        sel = sorted(
            (
                r
                for r in deltas
                if abs(r["Jy"] - jy) < 1e-9 and r["N"] >= fit_min_n
            ),
            key=lambda r: r["N"],
        )
        for col in ("dSxx", "dMz", "dS"):
            fit = power_law_fit([r["N"] for r in sel], [r[col] for r in sel])
            fits.append(
                {
                    "Jy": jy, "observable": col, "exponent": fit.exponent,
                    "prefactor": fit.prefactor, "residual_rms": fit.residual_rms,
                    "n_points": len(sel),
                }
            )
    write_table(
        f"{prefix}_exponents.csv",
        ["Jy", "observable", "exponent", "prefactor", "residual_rms", "n_points"],
        fits,
    )


def fig6() -> None:
    cfg = config(
        "fig6_observables", sweep={**OBS_SWEEP, "Ns": [10, 20, 30, 40, 50]}
    )
    run("ss-sweep", "--config", cfg, "-v", "--out", "fig6_observables.csv")
    cfg = config("fig6_mf", N=math.inf, sweep=OBS_SWEEP)
    run("mf-sweep", "--config", cfg, "--no-plot", "--out", "fig6_mf.csv")
    clean_checkpoints()


def fig7() -> None:
    _, mf_rows = read("fig6_mf.csv")
    mf_by_jy = {round(r["Jy"], 12): r for r in mf_rows}
    _deltas_and_exponents(
        "fig6_observables.csv", lambda N, jy: mf_by_jy[round(jy, 12)], "fig7"
    )


# ----------------------------------------------------------------------
# fig8 -- bimodality crossings and angle-averaged susceptibility


def fig8() -> None:
    cfg = config(
        "fig8a_bc_curves",
        sweep={"param": "Jy", "lo": 1.0, "hi": 1.8, "points": 33,
               "Ns": [10, 20, 30, 40], "observables": ["Bc_x"]},
    )
    run("ss-sweep", "--config", cfg, "-v", "--out", "fig8a_bc_curves.csv")
    cfg = config(
        "fig8b_crossings",
        sweep={"param": "Jy", "lo": 1.08, "hi": 1.22, "points": 15,
               "Ns": [10, 15, 20, 25, 30, 35]},
    )
    run(
        "bc-cross", "--config", cfg, "-v", "--pairs",
        "10:15,15:20,20:25,25:30,30:35", "--out", "fig8b_crossings.csv",
    )
    cfg = config(
        "fig8c_chi",
        sweep={"param": "Jy", "lo": 1.0, "hi": 1.8, "points": 17,
               "Ns": [10, 20, 30, 40]},
    )
    run("chi-sweep", "--config", cfg, "-v", "--out", "fig8c_chi.csv")
    _, rows = read("fig8c_chi.csv")
    peaks = []
    for N, grp in sorted(group_by(rows, "N").items()):
        best = max(grp, key=lambda r: r["chi_av"])
        peaks.append(
            {"N": as_int(N), "chi_max": best["chi_av"], "Jy_at_max": best["Jy"]}
        )
    write_table("fig8d_chi_peaks.csv", ["N", "chi_max", "Jy_at_max"], peaks)
    run(
        "fit", "--table", "fig8d_chi_peaks.csv", "--x", "N", "--y", "chi_max",
        "--out", "fig8d_fit.csv",
    )
    clean_checkpoints()


# ----------------------------------------------------------------------
# fig9 -- the highly anisotropic ferromagnet, Jy up to 100


def fig9() -> None:
    sweep = {"param": "Jy", "lo": 10.0, "hi": 100.0, "points": 10,
             "observables": ["Sxx"]}
    cfg = config("fig9_sxx", sweep={**sweep, "Ns": [20, 30, 40, 50]})
    run("ss-sweep", "--config", cfg, "-v", "--out", "fig9a_sxx.csv")
    cfg = config("fig9_mf", N=math.inf, sweep=sweep)
    run("mf-sweep", "--config", cfg, "--no-plot", "--out", "fig9_mf.csv")
    clean_checkpoints()

    from xyzspin.harness import power_law_fit

    _, rows = read("fig9a_sxx.csv")
    _, mf_rows = read("fig9_mf.csv")
    mf_by_jy = {round(r["Jy"], 12): r for r in mf_rows}
    fits = []
    for jy, grp in sorted(group_by(rows, "Jy").items()):
        grp = sorted(grp, key=lambda r: r["N"])
        mf = mf_by_jy[round(jy, 12)]
        fit = power_law_fit(
            [r["N"] for r in grp], [abs(r["Sxx"] - mf["Sxx_mf"]) for r in grp]
        )
        fits.append(
            {
                "Jy": jy, "alpha1": fit.exponent, "alpha1_abs": abs(fit.exponent),
                "prefactor": fit.prefactor, "residual_rms": fit.residual_rms,
            }
        )
    write_table(
        "fig9c_alpha1.csv",
        ["Jy", "alpha1", "alpha1_abs", "prefactor", "residual_rms"],
        fits,
    )


# ----------------------------------------------------------------------
# fig10 + fig11 -- the same observables and scalings with collective
# dissipation switched on (Gamma = 2 gamma, gamma + Gamma = 1)


def fig10() -> None:
    cfg = config(
        "fig10_observables", **MIXED, sweep={**OBS_SWEEP, "Ns": [10, 20, 30, 40]}
    )
    run("ss-sweep", "--config", cfg, "-v", "--out", "fig10_observables.csv")
    cfg = config("fig10_mf_inf", N=math.inf, **MIXED, sweep=OBS_SWEEP)
    run("mf-sweep", "--config", cfg, "--no-plot", "--out", "fig10_mf_inf.csv")
    # the finite-N mean-field reference (the effective local rate
    # gamma + Gamma/(N-1) depends on N once Gamma > 0)
    for N in (10, 20, 30, 40):
        cfg = config(f"fig10_mf_N{N}", N=N, **MIXED, sweep=OBS_SWEEP)
        run("mf-sweep", "--config", cfg, "--no-plot", "--out", f"fig10_mf_N{N}.csv")
    clean_checkpoints()


def fig11() -> None:
    mf_by_n = {}
    for N in (10, 20, 30, 40):
        _, mf_rows = read(f"fig10_mf_N{N}.csv")
        mf_by_n[N] = {round(r["Jy"], 12): r for r in mf_rows}
    _deltas_and_exponents(
        "fig10_observables.csv", lambda N, jy: mf_by_n[N][round(jy, 12)], "fig11"
    )


FIGURES = {
    "fig2": fig2, "fig3": fig3, "fig4": fig4, "fig5": fig5, "fig6": fig6,
    "fig7": fig7, "fig8": fig8, "fig9": fig9, "fig10": fig10, "fig11": fig11,
}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--only", nargs="*", choices=sorted(FIGURES),
                    help="regenerate a subset (fig7 needs fig6's tables, "
                         "fig11 needs fig10's)")
    args = ap.parse_args()
    for name in args.only or FIGURES:
        t0 = time.perf_counter()
        print(f"[{name}]")
        FIGURES[name]()
        print(f"[{name}] done in {time.perf_counter() - t0:.0f}s")


if __name__ == "__main__":
    main()
