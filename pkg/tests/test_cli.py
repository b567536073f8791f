"""End-to-end tests of the command-line interface.

Each test drives ``xyzspin.cli.main`` through Click's test runner with a
small JSON config written to a temp directory, then checks the exit code,
the delimited table, and the PNG figure rendered next to it.
"""

from __future__ import annotations

import json
import math
import pathlib

import pytest
from click.testing import CliRunner

from xyzspin import harness
from xyzspin.cli import main
from xyzspin.model import OBSERVABLE_NAMES, ModelParams
from xyzspin.observables import compute_report

SUBCOMMANDS = (
    "mf-sweep",
    "ss-sweep",
    "gap-sweep",
    "observables",
    "chi-sweep",
    "bc-cross",
    "phase-diagram",
    "fit",
)


@pytest.fixture()
def runner():
    return CliRunner()


def write_config(tmp_path, name="config.json", sweep=None, **model):
    doc = {"Jx": 0.6, "Jy": 1.2, "Jz": 1.0, "gamma": 1.0, "Gamma": 0.0, "N": 3}
    doc.update(model)
    if sweep is not None:
        doc["sweep"] = sweep
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


def combined(result):
    """stdout plus stderr; Click routes error messages to stderr."""
    try:
        return result.output + result.stderr
    except (ValueError, AttributeError):
        return result.output


def read_rows(path, fmt="csv"):
    columns, rows = harness.read_table(path)
    return columns, rows


class TestBasics:
    def test_version(self, runner):
        result = runner.invoke(main, ["--version"])
        assert result.exit_code == 0
        assert "version" in result.output

    def test_help_lists_every_subcommand(self, runner):
        result = runner.invoke(main, ["--help"])
        assert result.exit_code == 0
        for name in SUBCOMMANDS:
            assert name in result.output

    def test_subcommand_help(self, runner):
        for name in SUBCOMMANDS:
            result = runner.invoke(main, [name, "--help"])
            assert result.exit_code == 0, name

    def test_missing_config_is_usage_error(self, runner):
        result = runner.invoke(main, ["ss-sweep"])
        assert result.exit_code == 2

    def test_nonexistent_config_is_usage_error(self, runner, tmp_path):
        result = runner.invoke(
            main, ["ss-sweep", "--config", str(tmp_path / "nope.json")]
        )
        assert result.exit_code == 2

    def test_malformed_config_is_usage_error(self, runner, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("not json at all")
        result = runner.invoke(main, ["observables", "--config", str(path)])
        assert result.exit_code == 2
        assert "bad config" in combined(result)

    def test_invalid_physics_is_usage_error(self, runner, tmp_path):
        cfg = write_config(tmp_path, gamma=-1.0)
        result = runner.invoke(main, ["observables", "--config", str(cfg)])
        assert result.exit_code == 2
        assert "gamma" in combined(result)

    def test_unknown_subcommand(self, runner):
        result = runner.invoke(main, ["frobnicate"])
        assert result.exit_code == 2


class TestMfSweep:
    def test_table_and_figure(self, runner, tmp_path):
        cfg = write_config(
            tmp_path, N=6,
            sweep={"param": "Jy", "lo": 1.0, "hi": 1.3, "points": 7},
        )
        out = tmp_path / "mf.csv"
        result = runner.invoke(
            main, ["mf-sweep", "--config", str(cfg), "--out", str(out)]
        )
        assert result.exit_code == 0, combined(result)
        assert out.exists()
        assert out.with_suffix(".png").stat().st_size > 0
        columns, rows = read_rows(out)
        assert columns[0] == "Jy"
        assert len(rows) == 7
        branches = {r["branch"] for r in rows}
        assert branches == {"paramagnetic", "ferromagnetic"}
        for r in rows:
            if r["Jy"] < 1.15:
                assert r["Sxx_mf"] == 0.0
            if r["Jy"] > 1.16:
                assert r["Sxx_mf"] > 0.0

    def test_json_format(self, runner, tmp_path):
        cfg = write_config(
            tmp_path, N=4,
            sweep={"param": "Jy", "lo": 1.0, "hi": 1.1, "points": 3},
        )
        out = tmp_path / "mf.json"
        result = runner.invoke(
            main,
            ["mf-sweep", "--config", str(cfg), "--out", str(out),
             "--format", "json"],
        )
        assert result.exit_code == 0, combined(result)
        doc = json.loads(out.read_text())
        assert set(doc) == {"columns", "rows"}
        assert len(doc["rows"]) == 3
        assert out.with_suffix(".png").exists()

    def test_no_plot(self, runner, tmp_path):
        cfg = write_config(
            tmp_path, N=4,
            sweep={"param": "Jy", "lo": 1.0, "hi": 1.1, "points": 2},
        )
        out = tmp_path / "mf.csv"
        result = runner.invoke(
            main,
            ["mf-sweep", "--config", str(cfg), "--out", str(out), "--no-plot"],
        )
        assert result.exit_code == 0
        assert out.exists()
        assert not out.with_suffix(".png").exists()

    def test_default_output_name(self, runner, tmp_path):
        with runner.isolated_filesystem(temp_dir=tmp_path) as cwd:
            cfg = write_config(
                pathlib.Path(cwd), N=4,
                sweep={"param": "Jy", "lo": 1.0, "hi": 1.1, "points": 2},
            )
            result = runner.invoke(main, ["mf-sweep", "--config", str(cfg)])
            assert result.exit_code == 0
            assert (pathlib.Path(cwd) / "mf-sweep.csv").exists()


class TestSsSweep:
    def test_small_sweep(self, runner, tmp_path):
        cfg = write_config(
            tmp_path,
            sweep={"param": "Jy", "lo": 1.0, "hi": 1.4, "points": 3,
                   "Ns": [2, 3], "observables": ["Sxx", "Mz"]},
        )
        out = tmp_path / "ss.csv"
        result = runner.invoke(
            main, ["ss-sweep", "--config", str(cfg), "--out", str(out)]
        )
        assert result.exit_code == 0, combined(result)
        assert "wrote" in result.output
        columns, rows = read_rows(out)
        assert {"N", "Jy", "Sxx", "Mz"} <= set(columns)
        assert len(rows) == 6
        for r in rows:
            assert math.isfinite(r["Sxx"]) and math.isfinite(r["Mz"])
            assert -1.0 <= r["Mz"] <= 1.0
        assert out.with_suffix(".png").stat().st_size > 0

    def test_failed_points_exit_one(self, runner, tmp_path):
        # gamma = 0 with purely collective decay leaves a degenerate steady
        # state, so every point fails but the table is still written.
        cfg = write_config(
            tmp_path, gamma=0.0, Gamma=1.0, N=2,
            sweep={"param": "Jy", "lo": 1.0, "hi": 1.2, "points": 2,
                   "Ns": [2], "observables": ["Mz"]},
        )
        out = tmp_path / "ss.csv"
        result = runner.invoke(
            main, ["ss-sweep", "--config", str(cfg), "--out", str(out)]
        )
        assert result.exit_code == 1
        assert "failed" in combined(result)
        columns, rows = read_rows(out)
        assert len(rows) == 2
        assert all(r["error"] for r in rows)

    def test_resume_reuses_checkpoints(self, runner, tmp_path):
        cfg = write_config(
            tmp_path,
            sweep={"param": "Jy", "lo": 1.0, "hi": 1.2, "points": 2,
                   "Ns": [2], "observables": ["Mz"]},
        )
        out = tmp_path / "ss.csv"
        args = ["ss-sweep", "--config", str(cfg), "--out", str(out), "--resume"]
        first = runner.invoke(main, args)
        assert first.exit_code == 0, combined(first)
        ckdir = tmp_path / "checkpoints"
        assert ckdir.is_dir() and len(list(ckdir.iterdir())) == 2
        _, rows_first = read_rows(out)
        second = runner.invoke(main, args)
        assert second.exit_code == 0
        _, rows_second = read_rows(out)
        assert rows_second == rows_first

    def test_verbose_progress(self, runner, tmp_path):
        cfg = write_config(
            tmp_path,
            sweep={"param": "Jy", "lo": 1.0, "hi": 1.2, "points": 2,
                   "Ns": [2], "observables": ["Mz"]},
        )
        out = tmp_path / "ss.csv"
        result = runner.invoke(
            main,
            ["ss-sweep", "--config", str(cfg), "--out", str(out), "-v",
             "--no-plot"],
        )
        assert result.exit_code == 0
        assert "[2/2]" in combined(result)


class TestGapSweep:
    def test_dense_gap_table(self, runner, tmp_path):
        cfg = write_config(
            tmp_path,
            sweep={"param": "Jy", "lo": 1.0, "hi": 1.4, "points": 3,
                   "Ns": [2, 3]},
        )
        out = tmp_path / "gap.csv"
        result = runner.invoke(
            main,
            ["gap-sweep", "--config", str(cfg), "--out", str(out),
             "--method", "dense"],
        )
        assert result.exit_code == 0, combined(result)
        columns, rows = read_rows(out)
        assert {"N", "Jy", "gap", "method", "eta", "pt_detected",
                "basis"} <= set(columns)
        assert len(rows) == 6
        for r in rows:
            assert r["gap"] > 0
            assert r["basis"] == "symmetric"
        assert out.with_suffix(".png").stat().st_size > 0

    def test_full_basis(self, runner, tmp_path):
        cfg = write_config(
            tmp_path,
            sweep={"param": "Jy", "lo": 1.1, "hi": 1.3, "points": 2,
                   "Ns": [2]},
        )
        out = tmp_path / "gap.csv"
        result = runner.invoke(
            main,
            ["gap-sweep", "--config", str(cfg), "--out", str(out),
             "--method", "dense", "--basis", "full", "--no-plot"],
        )
        assert result.exit_code == 0, combined(result)
        _, rows = read_rows(out)
        assert all(r["basis"] == "full" for r in rows)

    def test_antigap_requires_local_dissipation(self, runner, tmp_path):
        cfg = write_config(
            tmp_path, Gamma=0.5,
            sweep={"param": "Jy", "lo": 1.1, "hi": 1.3, "points": 2,
                   "Ns": [2]},
        )
        result = runner.invoke(
            main,
            ["gap-sweep", "--config", str(cfg), "--method", "antigap",
             "--no-plot"],
        )
        assert result.exit_code == 1
        assert "local" in combined(result)


class TestObservables:
    def test_full_report(self, runner, tmp_path):
        cfg = write_config(tmp_path, N=3, Jy=1.45)
        out = tmp_path / "obs.csv"
        result = runner.invoke(
            main, ["observables", "--config", str(cfg), "--out", str(out)]
        )
        assert result.exit_code == 0, combined(result)
        columns, rows = read_rows(out)
        assert columns == ["N", "Jy"] + list(OBSERVABLE_NAMES)
        assert len(rows) == 1
        row = rows[0]
        params = ModelParams(Jx=0.6, Jy=1.45, Jz=1.0, gamma=1.0, Gamma=0.0, N=3)
        expected = compute_report(params, OBSERVABLE_NAMES)
        for name in OBSERVABLE_NAMES:
            assert math.isclose(row[name], expected[name], rel_tol=1e-12), name

    def test_subset(self, runner, tmp_path):
        cfg = write_config(
            tmp_path, N=4, sweep={"observables": ["Mz", "purity"]}
        )
        out = tmp_path / "obs.csv"
        result = runner.invoke(
            main, ["observables", "--config", str(cfg), "--out", str(out)]
        )
        assert result.exit_code == 0, combined(result)
        columns, rows = read_rows(out)
        assert columns == ["N", "Jy", "Mz", "purity"]
        assert 0.0 < rows[0]["purity"] <= 1.0


class TestChiSweep:
    def test_linear_method(self, runner, tmp_path):
        cfg = write_config(
            tmp_path,
            sweep={"param": "Jy", "lo": 1.1, "hi": 1.3, "points": 2,
                   "Ns": [2]},
        )
        out = tmp_path / "chi.csv"
        result = runner.invoke(
            main,
            ["chi-sweep", "--config", str(cfg), "--out", str(out),
             "--n-theta", "8"],
        )
        assert result.exit_code == 0, combined(result)
        columns, rows = read_rows(out)
        assert columns == ["N", "Jy", "chi_av", "method", "error"]
        assert len(rows) == 2
        for r in rows:
            assert r["chi_av"] > 0
            assert r["method"] == "linear"
        assert out.with_suffix(".png").stat().st_size > 0

    def test_contract_matches_linear(self, runner, tmp_path):
        cfg = write_config(
            tmp_path,
            sweep={"param": "Jy", "lo": 1.1, "hi": 1.3, "points": 2,
                   "Ns": [2]},
        )
        lin = tmp_path / "lin.csv"
        con = tmp_path / "con.csv"
        r1 = runner.invoke(
            main,
            ["chi-sweep", "--config", str(cfg), "--out", str(lin),
             "--n-theta", "8", "--no-plot"],
        )
        r2 = runner.invoke(
            main,
            ["chi-sweep", "--config", str(cfg), "--out", str(con),
             "--method", "contract", "--h", "1e-3", "--n-theta", "8",
             "--no-plot"],
        )
        assert r1.exit_code == 0 and r2.exit_code == 0
        _, rows_lin = read_rows(lin)
        _, rows_con = read_rows(con)
        for a, b in zip(rows_lin, rows_con):
            assert math.isclose(a["chi_av"], b["chi_av"], rel_tol=1e-2)
            assert b["method"] == "contract"


class TestBcCross:
    def test_crossing_near_critical(self, runner, tmp_path):
        cfg = write_config(
            tmp_path,
            sweep={"param": "Jy", "lo": 1.08, "hi": 1.22, "points": 8,
                   "Ns": [10, 20]},
        )
        out = tmp_path / "bc.csv"
        result = runner.invoke(
            main, ["bc-cross", "--config", str(cfg), "--out", str(out)]
        )
        assert result.exit_code == 0, combined(result)
        columns, rows = read_rows(out)
        assert columns == ["N_a", "N_b", "crossing", "axis"]
        assert len(rows) == 1
        assert rows[0]["N_a"] == 10 and rows[0]["N_b"] == 20
        assert 1.10 <= rows[0]["crossing"] <= 1.20
        assert rows[0]["axis"] == "x"
        curves = tmp_path / "bc_curves.csv"
        _, curve_rows = read_rows(curves)
        assert len(curve_rows) == 16
        assert out.with_suffix(".png").stat().st_size > 0

    def test_bad_pairs_is_usage_error(self, runner, tmp_path):
        cfg = write_config(
            tmp_path,
            sweep={"param": "Jy", "lo": 1.1, "hi": 1.2, "points": 2,
                   "Ns": [4, 6]},
        )
        result = runner.invoke(
            main,
            ["bc-cross", "--config", str(cfg), "--pairs", "4-6", "--no-plot"],
        )
        assert result.exit_code == 2

    def test_single_size_is_usage_error(self, runner, tmp_path):
        cfg = write_config(
            tmp_path,
            sweep={"param": "Jy", "lo": 1.1, "hi": 1.2, "points": 2,
                   "Ns": [4]},
        )
        result = runner.invoke(
            main, ["bc-cross", "--config", str(cfg), "--no-plot"]
        )
        assert result.exit_code == 2
        assert "two Ns" in combined(result)


class TestPhaseDiagram:
    def test_boundary_table(self, runner, tmp_path):
        cfg = write_config(tmp_path, N=4)
        out = tmp_path / "pd.csv"
        result = runner.invoke(
            main,
            ["phase-diagram", "--config", str(cfg), "--out", str(out),
             "--jx-lo", "0.0", "--jx-hi", "0.6", "--points", "4"],
        )
        assert result.exit_code == 0, combined(result)
        columns, rows = read_rows(out)
        assert {"Jx", "Jy_c"} <= set(columns)
        assert len(rows) == 4
        at_cut = [r for r in rows if math.isclose(r["Jx"], 0.6)]
        assert at_cut and math.isclose(at_cut[0]["Jy_c"], 1.15625,
                                       rel_tol=0, abs_tol=1e-9)
        assert out.with_suffix(".png").stat().st_size > 0


class TestFit:
    def _power_table(self, tmp_path, exponent=-0.5, prefactor=3.0):
        path = tmp_path / "table.csv"
        rows = [{"N": float(n), "gap": prefactor * n**exponent}
                for n in (2, 3, 4, 5, 6, 8)]
        harness.write_table(path, ["N", "gap"], rows, fmt="csv")
        return path

    def test_recovers_exponent(self, runner, tmp_path):
        table = self._power_table(tmp_path)
        out = tmp_path / "fit.csv"
        result = runner.invoke(
            main,
            ["fit", "--table", str(table), "--x", "N", "--y", "gap",
             "--out", str(out)],
        )
        assert result.exit_code == 0, combined(result)
        assert "exponent = -0.500000" in result.output
        _, rows = read_rows(out)
        assert math.isclose(rows[0]["exponent"], -0.5, abs_tol=1e-9)
        assert math.isclose(rows[0]["prefactor"], 3.0, rel_tol=1e-9)
        assert rows[0]["n_points"] == 6
        assert out.with_suffix(".png").stat().st_size > 0

    def test_where_filter(self, runner, tmp_path):
        path = tmp_path / "table.csv"
        rows = []
        for n, expo in ((2, -1.0), (4, -2.0)):
            for jy in (1.0, 2.0, 4.0, 8.0):
                rows.append({"N": n, "Jy": jy, "val": jy**expo})
        harness.write_table(path, ["N", "Jy", "val"], rows, fmt="csv")
        out = tmp_path / "fit.csv"
        result = runner.invoke(
            main,
            ["fit", "--table", str(path), "--x", "Jy", "--y", "val",
             "--where", "N=2", "--out", str(out), "--no-plot"],
        )
        assert result.exit_code == 0, combined(result)
        _, fit_rows = read_rows(out)
        assert math.isclose(fit_rows[0]["exponent"], -1.0, abs_tol=1e-9)
        assert fit_rows[0]["n_points"] == 4

    def test_missing_column_is_usage_error(self, runner, tmp_path):
        table = self._power_table(tmp_path)
        result = runner.invoke(
            main, ["fit", "--table", str(table), "--x", "nope", "--y", "gap"]
        )
        assert result.exit_code == 2

    def test_bad_filter_is_usage_error(self, runner, tmp_path):
        table = self._power_table(tmp_path)
        result = runner.invoke(
            main,
            ["fit", "--table", str(table), "--x", "N", "--y", "gap",
             "--where", "oops"],
        )
        assert result.exit_code == 2

    def test_nonpositive_data_exit_one(self, runner, tmp_path):
        path = tmp_path / "table.csv"
        rows = [{"N": n, "gap": -1.0} for n in (2, 3, 4)]
        harness.write_table(path, ["N", "gap"], rows, fmt="csv")
        result = runner.invoke(
            main,
            ["fit", "--table", str(path), "--x", "N", "--y", "gap",
             "--no-plot"],
        )
        assert result.exit_code == 1
