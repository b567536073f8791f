"""Command-line interface.

Every analysis entry point reads a JSON config (model parameters plus an
optional ``sweep`` block), writes a delimited table (CSV by default, JSON on
request), and -- unless ``--no-plot`` is given -- renders a PNG figure next
to the table.  Exit codes: 0 on success, 1 when a computation fails
(solver, eigensolver, fit), 2 on bad usage or config.
"""

from __future__ import annotations

import dataclasses
import pathlib

import click

from . import __version__, harness, meanfield
from .model import OBSERVABLE_NAMES, ConfigError, parse_config
from .observables import (
    averaged_susceptibility,
    averaged_susceptibility_linear,
    compute_report,
)

_COMPUTE_ERRORS = (RuntimeError, ValueError, ArithmeticError)


def _load_config(path: str):
    try:
        text = pathlib.Path(path).read_text()
    except OSError as exc:
        raise click.UsageError(f"cannot read config {path}: {exc}")
    try:
        return parse_config(text)
    except ConfigError as exc:
        raise click.UsageError(f"bad config {path}: {exc}")


def _out_path(out: str | None, fmt: str, default_stem: str) -> pathlib.Path:
    if out is not None:
        return pathlib.Path(out)
    return pathlib.Path(f"{default_stem}.{fmt}")


def _write(columns, rows, out: pathlib.Path, fmt: str) -> None:
    harness.write_table(out, columns, rows, fmt=fmt)
    click.echo(f"wrote {out}")


def _progress(verbose: bool):
    if not verbose:
        return None

    def cb(done: int, total: int) -> None:
        click.echo(f"  [{done}/{total}]", err=True)

    return cb


def common_options(f):
    f = click.option(
        "--config", "config_path", required=True,
        type=click.Path(exists=True, dir_okay=False),
        help="JSON config with model parameters and optional sweep block.",
    )(f)
    f = click.option("--out", "out", default=None, type=click.Path(dir_okay=False),
                     help="Output table path (default: <command>.<format>).")(f)
    f = click.option("--format", "fmt", type=click.Choice(["csv", "json"]),
                     default="csv", show_default=True, help="Table format.")(f)
    f = click.option("--plot/--no-plot", "plot", default=True, show_default=True,
                     help="Render a PNG figure next to the table.")(f)
    f = click.option("-v", "--verbose", is_flag=True, help="Progress output.")(f)
    return f


def sweep_options(f):
    f = click.option("--workers", default=1, show_default=True,
                     help="Parallel worker processes for sweep points.")(f)
    f = click.option("--resume", is_flag=True,
                     help="Reuse per-point checkpoints from a previous run.")(f)
    return f


@click.group()
@click.version_option(version=__version__)
def main() -> None:
    """Steady states, spectra and mean-field analysis of the dissipative
    all-to-all XYZ model."""


@main.command("mf-sweep")
@common_options
def mf_sweep(config_path, out, fmt, plot, verbose):
    """Mean-field steady state along the sweep grid."""
    params, sweep = _load_config(config_path)
    columns = [sweep.param, "sx", "sy", "sz", "Sxx_mf", "entropy_per_spin", "branch"]
    rows = []
    try:
        for v in sweep.values():
            p = params.replace(**{sweep.param: v})
            ref = meanfield.mf_reference(p)
            rows.append({
                sweep.param: v, "sx": ref["sx"], "sy": ref["sy"], "sz": ref["sz"],
                "Sxx_mf": ref["Sxx_mf"],
                "entropy_per_spin": ref["entropy_per_spin_mf"],
                "branch": ref["branch"],
            })
    except _COMPUTE_ERRORS as exc:
        raise click.ClickException(str(exc))
    path = _out_path(out, fmt, "mf-sweep")
    _write(columns, rows, path, fmt)
    if plot:
        from . import plotting

        plotting.plot_mf_sweep(rows, sweep.param, path.with_suffix(".png"))
        click.echo(f"wrote {path.with_suffix('.png')}")


@main.command("ss-sweep")
@common_options
@sweep_options
def ss_sweep(config_path, out, fmt, plot, verbose, workers, resume):
    """Exact steady-state observables over the sweep grid (all N)."""
    params, sweep = _load_config(config_path)
    path = _out_path(out, fmt, "ss-sweep")
    try:
        res = harness.run_sweep(
            params, sweep, out_dir=path.parent, workers=workers, resume=resume,
            progress=_progress(verbose),
        )
    except _COMPUTE_ERRORS as exc:
        raise click.ClickException(str(exc))
    _write(res.columns, res.rows, path, fmt)
    if plot:
        from . import plotting

        plotting.plot_observable_sweep(
            res.rows, sweep.param, sweep.observables, path.with_suffix(".png")
        )
        click.echo(f"wrote {path.with_suffix('.png')}")
    if res.failures:
        raise click.ClickException(
            f"{len(res.failures)} of {len(res.rows)} points failed; see the "
            "'error' column"
        )


@main.command("gap-sweep")
@common_options
@click.option("--method", type=click.Choice(["antigap", "dense"]),
              default="antigap", show_default=True)
@click.option("--basis", type=click.Choice(["symmetric", "full"]),
              default="symmetric", show_default=True)
@click.option("--k", default=6, show_default=True,
              help="Ritz values per antigap solve.")
def gap_sweep_cmd(config_path, out, fmt, plot, verbose, method, basis, k):
    """Liouvillian spectral gap over the sweep grid (all N)."""
    params, sweep = _load_config(config_path)
    Ns = sweep.Ns or (params.N,)
    try:
        res = harness.gap_sweep(
            params, Ns, values=sweep.values(), sweep_param=sweep.param,
            method=method, basis=basis, k=k,
        )
    except _COMPUTE_ERRORS as exc:
        raise click.ClickException(str(exc))
    path = _out_path(out, fmt, "gap-sweep")
    _write(res.columns, res.rows, path, fmt)
    if plot:
        from . import plotting

        plotting.plot_gap_sweep(res.rows, sweep.param, path.with_suffix(".png"))
        click.echo(f"wrote {path.with_suffix('.png')}")
    if res.failures:
        raise click.ClickException(f"{len(res.failures)} points failed: "
                                   f"{res.failures[:3]}")


@main.command("observables")
@common_options
def observables_cmd(config_path, out, fmt, plot, verbose):
    """Full observable report at the config's single parameter point."""
    params, sweep = _load_config(config_path)
    try:
        rep = compute_report(params, sweep.observables)
    except _COMPUTE_ERRORS as exc:
        raise click.ClickException(str(exc))
    columns = ["N", "Jy"] + list(sweep.observables)
    row = {"N": params.N, "Jy": params.Jy}
    row.update(rep)
    path = _out_path(out, fmt, "observables")
    _write(columns, [row], path, fmt)


@main.command("chi-sweep")
@common_options
@sweep_options
@click.option("--method", type=click.Choice(["linear", "contract"]),
              default="linear", show_default=True,
              help="linear: response solves at h -> 0; contract: finite-field.")
@click.option("--h", "field", default=None, type=float,
              help="Finite field strength (contract method).")
@click.option("--n-theta", default=64, show_default=True,
              help="Angles in the transverse-plane average.")
def chi_sweep(config_path, out, fmt, plot, verbose, workers, resume, method,
              field, n_theta):
    """Angle-averaged susceptibility over the sweep grid (all N)."""
    params, sweep = _load_config(config_path)
    path = _out_path(out, fmt, "chi-sweep")
    columns = ["N", sweep.param, "chi_av", "method", "error"]
    rows = []
    try:
        if method == "linear":
            res = harness.run_sweep(
                params,
                dataclasses.replace(sweep, observables=("chi_av",)),
                out_dir=path.parent, workers=workers, resume=resume,
                n_theta=n_theta, progress=_progress(verbose),
            )
            for r in res.rows:
                rows.append({"N": r["N"], sweep.param: r[sweep.param],
                             "chi_av": r.get("chi_av"), "method": "linear",
                             "error": r.get("error", "")})
        else:
            Ns = sweep.Ns or (params.N,)
            for N in Ns:
                for v in sweep.values():
                    p = params.replace(N=N, **{sweep.param: v})
                    rows.append({
                        "N": N, sweep.param: v,
                        "chi_av": averaged_susceptibility(
                            p, h=field, n_theta=n_theta
                        ),
                        "method": "contract", "error": "",
                    })
    except _COMPUTE_ERRORS as exc:
        raise click.ClickException(str(exc))
    _write(columns, rows, path, fmt)
    if plot:
        from . import plotting

        plotting.plot_chi_sweep(rows, sweep.param, path.with_suffix(".png"))
        click.echo(f"wrote {path.with_suffix('.png')}")
    bad = [r for r in rows if r.get("error")]
    if bad:
        raise click.ClickException(f"{len(bad)} of {len(rows)} points failed")


@main.command("bc-cross")
@common_options
@sweep_options
@click.option("--pairs", "pairs_text", default=None,
              help="Size pairs like '50:60,60:70' (default: consecutive Ns).")
@click.option("--axis", type=click.Choice(["x", "y"]), default="x",
              show_default=True)
@click.option("--reference", default=None, type=float,
              help="Disambiguating point if curves cross more than once.")
def bc_cross(config_path, out, fmt, plot, verbose, workers, resume, pairs_text,
             axis, reference):
    """Binder-cumulant crossings between pairs of system sizes."""
    params, sweep = _load_config(config_path)
    Ns = sweep.Ns or (params.N,)
    if pairs_text:
        try:
            pairs = [
                tuple(int(t) for t in chunk.split(":"))
                for chunk in pairs_text.split(",")
            ]
            if any(len(p) != 2 for p in pairs):
                raise ValueError
        except ValueError:
            raise click.UsageError(f"cannot parse --pairs {pairs_text!r}")
    else:
        if len(Ns) < 2:
            raise click.UsageError("need at least two Ns for crossings")
        pairs = list(zip(Ns[:-1], Ns[1:]))
    path = _out_path(out, fmt, "bc-cross")
    try:
        res, curves = harness.binder_crossing(
            params, pairs, lo=sweep.lo, hi=sweep.hi, points=sweep.points,
            axis=axis, sweep_param=sweep.param, reference=reference,
            out_dir=path.parent, resume=resume, progress=_progress(verbose),
            return_curves=True,
        )
    except _COMPUTE_ERRORS as exc:
        raise click.ClickException(str(exc))
    _write(res.columns, res.rows, path, fmt)
    curves_path = path.with_name(path.stem + "_curves" + path.suffix)
    _write(curves.columns, curves.rows, curves_path, fmt)
    if plot:
        from . import plotting

        plotting.plot_binder(curves.rows, res.rows, sweep.param, axis,
                             path.with_suffix(".png"))
        click.echo(f"wrote {path.with_suffix('.png')}")


@main.command("phase-diagram")
@common_options
@click.option("--jx-lo", default=-1.0, show_default=True)
@click.option("--jx-hi", default=0.95, show_default=True)
@click.option("--points", default=80, show_default=True)
def phase_diagram_cmd(config_path, out, fmt, plot, verbose, jx_lo, jx_hi, points):
    """Mean-field phase boundary Jy_c(Jx)."""
    params, _ = _load_config(config_path)
    try:
        res = harness.phase_diagram(params, jx_lo, jx_hi, points)
    except _COMPUTE_ERRORS as exc:
        raise click.ClickException(str(exc))
    path = _out_path(out, fmt, "phase-diagram")
    _write(res.columns, res.rows, path, fmt)
    if plot:
        from . import plotting

        plotting.plot_phase_diagram(res.rows, path.with_suffix(".png"),
                                    marker=(params.Jx, params.Jy))
        click.echo(f"wrote {path.with_suffix('.png')}")


@main.command("fit")
@click.option("--table", "table_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="CSV/JSON table produced by another subcommand.")
@click.option("--x", "xcol", required=True, help="Abscissa column.")
@click.option("--y", "ycol", required=True, help="Ordinate column.")
@click.option("--where", "filters", multiple=True,
              help="Row filter col=value; repeatable.")
@click.option("--out", "out", default=None, type=click.Path(dir_okay=False))
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]),
              default="csv", show_default=True)
@click.option("--plot/--no-plot", "plot", default=True, show_default=True)
def fit_cmd(table_path, xcol, ycol, filters, out, fmt, plot):
    """Power-law fit y = a x^alpha over rows of an existing table."""
    columns, rows = harness.read_table(table_path)
    for col in (xcol, ycol):
        if col not in columns:
            raise click.UsageError(
                f"column {col!r} not in table (has {columns})"
            )
    for flt in filters:
        if "=" not in flt:
            raise click.UsageError(f"bad --where filter {flt!r}")
        col, _, val = flt.partition("=")
        if col not in columns:
            raise click.UsageError(f"filter column {col!r} not in table")
        try:
            target = float(val)
            rows = [
                r for r in rows
                if isinstance(r.get(col), (int, float))
                and abs(r[col] - target) < 1e-9
            ]
        except ValueError:
            rows = [r for r in rows if r.get(col) == val]
    xs = [r[xcol] for r in rows if r.get(xcol) is not None and r.get(ycol) is not None]
    ys = [r[ycol] for r in rows if r.get(xcol) is not None and r.get(ycol) is not None]
    try:
        res = harness.power_law_fit(xs, ys)
    except ValueError as exc:
        raise click.ClickException(str(exc))
    path = _out_path(out, fmt, "fit")
    _write(
        ["x", "y", "exponent", "prefactor", "residual_rms", "n_points"],
        [{
            "x": xcol, "y": ycol, "exponent": res.exponent,
            "prefactor": res.prefactor, "residual_rms": res.residual_rms,
            "n_points": res.n_points,
        }],
        path, fmt,
    )
    click.echo(f"exponent = {res.exponent:.6f}  (rms {res.residual_rms:.4f}, "
               f"{res.n_points} points)")
    if plot:
        from . import plotting

        plotting.plot_fit(xs, ys, res, path.with_suffix(".png"),
                          xlabel=xcol, ylabel=ycol)
        click.echo(f"wrote {path.with_suffix('.png')}")


if __name__ == "__main__":
    main()
