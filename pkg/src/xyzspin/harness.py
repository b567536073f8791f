"""Sweep orchestration, power-law fits, crossings, and extrapolations.

This is the layer the command-line interface calls into: it turns a
``(ModelParams, SweepSpec)`` pair into tables of observables with their
mean-field references and finite-size deviations attached, restartable
through per-point checkpoint files, plus the finite-size analysis helpers
(log-log fits, Binder-cumulant crossings, 1/N extrapolation) used to locate
the critical point.
"""

from __future__ import annotations

import concurrent.futures
import csv
import dataclasses
import hashlib
import json
import math
import pathlib
import warnings

import numpy as np

from . import meanfield
from .liouvillian import (
    ResourceLimitError,
    build_full_liouvillian,
    build_symmetric_liouvillian,
)
from .model import ModelParams, SweepSpec, serialize_config
from .observables import compute_report
from .spectral import (
    SymmetryAssumptionError,
    full_spectrum,
    gap_via_antigap,
    local_dissipation_eta,
)

__all__ = [
    "FitResult",
    "ExtrapolationResult",
    "SweepResult",
    "power_law_fit",
    "curve_intersection",
    "critical_point_extrapolation",
    "run_sweep",
    "gap_sweep",
    "binder_crossing",
    "phase_diagram",
    "write_table",
    "read_table",
]

# swept-coupling regions called out in reports (in units of gamma + Gamma)
CRITICAL_REGION = (0.75, 1.75)
HIGH_ANISOTROPY_THRESHOLD = 2.3

_DELTA_SOURCES = {
    "Sxx": "Sxx_mf",
    "Syy": "Syy_mf",
    "Mz": "Mz_mf",
    "entropy_per_spin": "entropy_per_spin_mf",
}


@dataclasses.dataclass
class FitResult:
    """Power law y = prefactor * x**exponent fitted in log-log space."""

    exponent: float
    prefactor: float
    residual_rms: float
    n_points: int


@dataclasses.dataclass
class ExtrapolationResult:
    """N -> infinity intercept of a polynomial fit in 1/N."""

    value: float
    uncertainty: float  # spread between fit degrees
    by_degree: dict[int, float]


@dataclasses.dataclass
class SweepResult:
    columns: list[str]
    rows: list[dict]
    failures: list[tuple[int, float, str]]
    config_hash: str = ""


def power_law_fit(x, y) -> FitResult:
    """Least-squares fit of log y against log x.

    Both arrays must be strictly positive; the RMS residual is reported in
    log space (so 0.1 means a typical 10% miss).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size != y.size:
        raise ValueError("x and y must have the same length")
    if x.size < 2:
        raise ValueError("need at least two points to fit a power law")
    if (x <= 0).any() or (y <= 0).any():
        raise ValueError("power-law fit requires strictly positive data")
    lx, ly = np.log(x), np.log(y)
    A = np.column_stack([lx, np.ones_like(lx)])
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - A @ coef
    return FitResult(
        exponent=float(coef[0]),
        prefactor=float(np.exp(coef[1])),
        residual_rms=float(np.sqrt(np.mean(resid**2))),
        n_points=int(x.size),
    )


def curve_intersection(x, y1, y2, reference: float | None = None) -> float:
    """Abscissa where two sampled curves cross, by linear interpolation.

    With several sign changes the crossing nearest *reference* is returned
    (with a warning); without a reference, multiple crossings raise.
    """
    x = np.asarray(x, dtype=float)
    d = np.asarray(y1, dtype=float) - np.asarray(y2, dtype=float)
    if x.size != d.size:
        raise ValueError("x, y1, y2 must have the same length")
    crossings: list[float] = []
    for i in range(d.size - 1):
        a, b = d[i], d[i + 1]
        if a == 0.0:
            crossings.append(float(x[i]))
        elif a * b < 0.0:
            crossings.append(float(x[i] - a * (x[i + 1] - x[i]) / (b - a)))
    if d[-1] == 0.0:
        crossings.append(float(x[-1]))
    if not crossings:
        raise ValueError("curves do not cross on the sampled grid")
    if len(crossings) == 1:
        return crossings[0]
    if reference is None:
        raise ValueError(
            f"curves cross {len(crossings)} times at {crossings}; pass a "
            "reference point to disambiguate"
        )
    pick = min(crossings, key=lambda c: abs(c - reference))
    warnings.warn(
        f"{len(crossings)} crossings found ({crossings}); returning the one "
        f"nearest {reference}",
        stacklevel=2,
    )
    return pick


def critical_point_extrapolation(Ns, values, degrees=(3, 4)) -> ExtrapolationResult:
    """Extrapolate a finite-size estimate to N -> infinity.

    Fits polynomials in 1/N of each requested degree (capped at
    n_points - 1) and reports the constant term of the highest-degree fit,
    with the spread across degrees as the uncertainty.
    """
    Ns = np.asarray(Ns, dtype=float)
    values = np.asarray(values, dtype=float)
    if Ns.size != values.size:
        raise ValueError("Ns and values must have the same length")
    if Ns.size < 2:
        raise ValueError("need at least two system sizes")
    if (Ns < 2).any():
        raise ValueError("system sizes must be >= 2")
    u = 1.0 / Ns
    by_degree: dict[int, float] = {}
    for deg in sorted(set(degrees)):
        d = min(deg, Ns.size - 1)
        coef = np.polyfit(u, values, d)
        by_degree[d] = float(coef[-1])  # value at u = 0
    vals = list(by_degree.values())
    return ExtrapolationResult(
        value=vals[-1],
        uncertainty=float(max(vals) - min(vals)) if len(vals) > 1 else 0.0,
        by_degree=by_degree,
    )


# -- observable sweeps --------------------------------------------------


def _config_hash(params: ModelParams, sweep: SweepSpec, n_theta: int) -> str:
    payload = serialize_config(params, sweep) + f"\nn_theta={n_theta}"
    return hashlib.sha256(payload.encode()).hexdigest()[:12]


def _region_tag(params: ModelParams, sweep_param: str, value: float) -> str:
    if sweep_param not in ("Jx", "Jy", "Jz"):
        return ""
    r = value / params.rate_unit
    if r > HIGH_ANISOTROPY_THRESHOLD:
        return "high_anisotropy"
    if CRITICAL_REGION[0] <= r <= CRITICAL_REGION[1]:
        return "critical"
    return ""


def sweep_columns(sweep: SweepSpec) -> list[str]:
    cols = ["N", sweep.param]
    cols.extend(sweep.observables)
    cols.extend(["branch", "Sxx_mf", "Syy_mf", "Mz_mf", "entropy_per_spin_mf"])
    for name in sweep.observables:
        if name in _DELTA_SOURCES:
            cols.append(f"delta_{name}")
    cols.extend(["region", "error"])
    return cols


def _sweep_point(task) -> dict:
    """One grid point: observables + mean-field reference + deviations."""
    params, sweep_param, value, observables, n_theta = task
    row: dict = {"N": params.N, sweep_param: value, "error": ""}
    row["region"] = _region_tag(params, sweep_param, value)
    try:
        report = compute_report(params, observables, n_theta=n_theta)
        row.update(report)
        ref = meanfield.mf_reference(params)
        row["branch"] = ref["branch"]
        for key in ("Sxx_mf", "Syy_mf", "Mz_mf", "entropy_per_spin_mf"):
            row[key] = ref[key]
        for name in observables:
            src = _DELTA_SOURCES.get(name)
            if src is not None:
                row[f"delta_{name}"] = abs(report[name] - ref[src])
    except Exception as exc:  # recorded, sweep continues
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def run_sweep(
    params: ModelParams,
    sweep: SweepSpec,
    out_dir: str | pathlib.Path | None = None,
    workers: int = 1,
    resume: bool = False,
    n_theta: int = 64,
    progress=None,
) -> SweepResult:
    """Steady-state observables over the sweep grid for every requested N.

    Each completed point is checkpointed to
    ``<out_dir>/checkpoints/<confighash>_N<N>_p<index>.json``; with
    ``resume=True`` existing checkpoints (same config hash) are loaded
    instead of recomputed.  Failed points carry the exception in their
    ``error`` column and are listed in ``SweepResult.failures``; they do
    not abort the sweep.  Rows come back sorted by (N, grid index)
    regardless of worker scheduling.
    """
    params.require_valid()
    errs = sweep.errors()
    if errs:
        raise ValueError("; ".join(errs))
    Ns = sweep.Ns or (params.N,)
    values = sweep.values()
    chash = _config_hash(params, sweep, n_theta)
    ckdir = None
    if out_dir is not None:
        ckdir = pathlib.Path(out_dir) / "checkpoints"
        ckdir.mkdir(parents=True, exist_ok=True)

    keys = []
    tasks = {}
    for N in Ns:
        for idx, v in enumerate(values):
            p = params.replace(N=N, **{sweep.param: v})
            keys.append((N, idx))
            tasks[(N, idx)] = (p, sweep.param, v, sweep.observables, n_theta)

    rows: dict[tuple[int, int], dict] = {}
    pending = []
    for key in keys:
        path = None if ckdir is None else ckdir / f"{chash}_N{key[0]}_p{key[1]:04d}.json"
        if resume and path is not None and path.exists():
            rows[key] = json.loads(path.read_text())
        else:
            pending.append((key, path))

    done = len(rows)
    total = len(keys)

    def _store(key, path, row):
        nonlocal done
        rows[key] = row
        if path is not None:
            path.write_text(json.dumps(row))
        done += 1
        if progress is not None:
            progress(done, total)

    if workers <= 1 or len(pending) <= 1:
        for key, path in pending:
            _store(key, path, _sweep_point(tasks[key]))
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            futs = {
                pool.submit(_sweep_point, tasks[key]): (key, path)
                for key, path in pending
            }
            for fut in concurrent.futures.as_completed(futs):
                key, path = futs[fut]
                _store(key, path, fut.result())

    ordered = [rows[k] for k in sorted(rows)]
    failures = [
        (r["N"], r[sweep.param], r["error"]) for r in ordered if r.get("error")
    ]
    return SweepResult(
        columns=sweep_columns(sweep),
        rows=ordered,
        failures=failures,
        config_hash=chash,
    )


# -- gap sweeps ---------------------------------------------------------


def gap_sweep(
    params: ModelParams,
    Ns,
    values=None,
    sweep_param: str = "Jy",
    method: str = "antigap",
    basis: str = "symmetric",
    k: int = 6,
    n_max: int = 9,
    dense_limit: int = 4096,
) -> SweepResult:
    """Spectral gap over an (N x coupling) grid.

    ``method="dense"`` diagonalizes the whole Liouvillian (small systems
    only) and reports the PT check on the full spectrum;
    ``method="antigap"`` uses the reflection-certified shifted Arnoldi
    route with eta = N gamma / 2, which requires purely local dissipation.
    """
    if method not in ("dense", "antigap"):
        raise ValueError(f"method must be 'dense' or 'antigap', got {method!r}")
    if basis not in ("symmetric", "full"):
        raise ValueError(f"basis must be 'symmetric' or 'full', got {basis!r}")
    if method == "antigap" and params.Gamma != 0:
        raise ValueError(
            "the antigap route needs eta = N gamma / 2, which holds only "
            "for purely local dissipation (Gamma = 0); use method='dense'"
        )
    vals = [getattr(params, sweep_param)] if values is None else list(values)
    columns = ["N", sweep_param, "gap", "method", "eta", "pt_detected", "basis"]
    rows: list[dict] = []
    failures: list[tuple[int, float, str]] = []
    for N in Ns:
        for v in vals:
            p = params.replace(N=N, **{sweep_param: v})
            row = {
                "N": N,
                sweep_param: v,
                "method": method,
                "basis": basis,
                "gap": math.nan,
                "eta": math.nan,
                "pt_detected": 0,
            }
            try:
                L = (
                    build_symmetric_liouvillian(p)
                    if basis == "symmetric"
                    else build_full_liouvillian(p, n_max=n_max)
                )
                if method == "dense":
                    rep = full_spectrum(L, dense_limit=dense_limit)
                    row.update(
                        gap=rep.gap, eta=rep.eta, pt_detected=int(rep.pt_symmetric)
                    )
                else:
                    eta = local_dissipation_eta(p)
                    res = gap_via_antigap(L, eta=eta, k=k)
                    row.update(gap=res.gap, eta=eta, pt_detected=1)
            except (SymmetryAssumptionError, ResourceLimitError, RuntimeError) as exc:
                failures.append((N, v, f"{type(exc).__name__}: {exc}"))
            rows.append(row)
    return SweepResult(columns=columns, rows=rows, failures=failures)


def binder_crossing(
    params: ModelParams,
    pairs,
    lo: float,
    hi: float,
    points: int,
    axis: str = "x",
    sweep_param: str = "Jy",
    reference: float | None = None,
    out_dir=None,
    resume: bool = False,
    progress=None,
    return_curves: bool = False,
):
    """Crossing of Binder-cumulant curves for pairs of system sizes.

    Computes Bc along the sweep grid for every N appearing in *pairs*
    (reusing the run_sweep checkpointing), then intersects each pair's
    curves.  The crossing drifts to the critical coupling as N grows.
    With ``return_curves=True`` the underlying sweep table is returned as a
    second element.
    """
    obs_name = f"Bc_{axis}"
    Ns = tuple(sorted({n for pair in pairs for n in pair}))
    sweep = SweepSpec(
        param=sweep_param, lo=lo, hi=hi, points=points, Ns=Ns,
        observables=(obs_name,),
    )
    table = run_sweep(
        params, sweep, out_dir=out_dir, resume=resume, progress=progress
    )
    if table.failures:
        raise RuntimeError(
            f"{len(table.failures)} sweep points failed: {table.failures[:3]}"
        )
    x = np.array(sweep.values())
    curves = {
        N: np.array([r[obs_name] for r in table.rows if r["N"] == N]) for N in Ns
    }
    rows = []
    for Na, Nb in pairs:
        c = curve_intersection(x, curves[Na], curves[Nb], reference=reference)
        rows.append({"N_a": Na, "N_b": Nb, "crossing": c, "axis": axis})
    result = SweepResult(
        columns=["N_a", "N_b", "crossing", "axis"],
        rows=rows,
        failures=[],
        config_hash=table.config_hash,
    )
    if return_curves:
        return result, table
    return result


def phase_diagram(
    params: ModelParams, jx_lo: float, jx_hi: float, points: int
) -> SweepResult:
    """Mean-field phase boundary Jy_c(Jx) at the model's Jz and gamma.

    Grid points falling on the singular line Jx = Jz are skipped.
    """
    grid = np.linspace(jx_lo, jx_hi, points)
    grid = grid[np.abs(grid - params.Jz) > 1e-12]
    pairs = meanfield.mf_phase_boundary(grid, params.Jz, params.gamma)
    rows = [{"Jx": jx, "Jy_c": jyc} for jx, jyc in pairs]
    return SweepResult(columns=["Jx", "Jy_c"], rows=rows, failures=[])


# -- tables -------------------------------------------------------------


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, float) and math.isnan(value):
        return "nan"
    return value


def write_table(path, columns: list[str], rows: list[dict], fmt: str = "csv") -> None:
    """Write rows as CSV (header line, '.' decimal) or a JSON document."""
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(columns)
            for row in rows:
                w.writerow([_cell(row.get(c)) for c in columns])
    elif fmt == "json":
        clean = [
            {
                c: (None if isinstance(row.get(c), float) and math.isnan(row[c]) else row.get(c))
                for c in columns
            }
            for row in rows
        ]
        with open(path, "w") as fh:
            json.dump({"columns": columns, "rows": clean}, fh, indent=1)
            fh.write("\n")
    else:
        raise ValueError(f"unknown table format {fmt!r}")


def read_table(path) -> tuple[list[str], list[dict]]:
    """Read a table written by :func:`write_table` (format by extension)."""
    path = pathlib.Path(path)
    if path.suffix == ".json":
        doc = json.loads(path.read_text())
        return doc["columns"], doc["rows"]
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        columns = next(r)
        rows = []
        for rec in r:
            row = {}
            for c, v in zip(columns, rec):
                try:
                    row[c] = float(v) if v != "" else None
                except ValueError:
                    row[c] = v
            rows.append(row)
        return columns, rows
