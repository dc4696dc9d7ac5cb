import io
import click
import pandas as pd
import pytest
from click.testing import CliRunner
from app import cli, run
from commands.common import parse_values
from core.interval_engine import save_grid
from core.panel_core import load_panel
from core.spline_funcs import z_value
from models.manifest import RunManifest
from utils.csv_io import write_table


def invoke(*args):
    args = [str(a) for a in args]
    return CliRunner().invoke(cli, args, obj={"argv": args}, catch_exceptions=False)


def table(text: str) -> pd.DataFrame:
    return pd.read_csv(io.StringIO(text), float_precision="round_trip")


@pytest.fixture
def panel_path(tmp_path, make_panel):
    p = make_panel(N=40, T=4, gamma=1.0, delta=2.0)
    rows = [
        {"unit": u, "time": t, "x": p.x[i, j], "y": p.y[i, j]}
        for i, u in enumerate(p.unit_ids)
        for j, t in enumerate(p.times)
    ]
    path = tmp_path / "panel.csv"
    write_table(rows, str(path))
    return path


@pytest.fixture
def grid_path(tmp_path, panel_path, standard_grid):
    path = tmp_path / "panel.grid"
    save_grid(standard_grid(load_panel(str(panel_path))), str(path))
    return path


class TestParseValues:
    def test_range_includes_stop(self):
        assert parse_values("0:1:0.25") == (0.0, 0.25, 0.5, 0.75, 1.0)

    def test_list(self):
        assert parse_values("-10, 0,10") == (-10.0, 0.0, 10.0)

    @pytest.mark.parametrize("text", ["1:0:0.1", "0:1:0", "a,b", ""])
    def test_malformed(self, text):
        with pytest.raises(click.BadParameter):
            parse_values(text)


def test_fit(panel_path):
    result = invoke("fit", panel_path)
    assert result.exit_code == 0
    row = table(result.stdout).iloc[0]
    assert (row["N"], row["T"]) == (40, 4)
    assert row["delta_hat"] >= 0.0


def test_unbalanced_panel_exit_code(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text("unit,time,x,y\n1,1,1,1\n1,2,2,2\n2,1,3,3\n")
    assert run(["fit", str(path)]) == 10
    assert capsys.readouterr().err.startswith("error=UNBALANCED_PANEL")


def test_usage_error_exit_code(panel_path, grid_path):
    assert run(["ci", str(panel_path), "--grid", str(grid_path), "--delta", "1"]) == 2


def test_invalid_argument_exit_code(capsys):
    assert run(["grid", "phi-scan", "--rho", "0.5"]) == 2
    assert "error=INVALID_ARGUMENT" in capsys.readouterr().err


class TestCi:
    def test_standard_grid_gives_fixed_effects_interval(self, panel_path, grid_path):
        row = table(invoke("ci", panel_path, "--grid", grid_path).stdout).iloc[0]
        assert row["center_shift"] == pytest.approx(0.0, abs=1e-12)
        assert row["half_width"] == pytest.approx(z_value(0.05), rel=1e-12)
        assert row["lower"] < row["upper"]

    def test_known_variance_reverts(self, panel_path, grid_path):
        result = invoke("ci", panel_path, "--grid", grid_path, "--sigma-eps", "1e-6", "--delta", "2")
        row = table(result.stdout).iloc[0]
        assert bool(row["reverted"]) is True
        assert row["sigma_eps"] == 1e-6

    def test_grid_mismatch(self, tmp_path, make_panel, grid_path, capsys):
        p = make_panel(N=41)
        rows = [
            {"unit": u, "time": t, "x": p.x[i, j], "y": p.y[i, j]}
            for i, u in enumerate(p.unit_ids)
            for j, t in enumerate(p.times)
        ]
        other = tmp_path / "other.csv"
        write_table(rows, str(other))
        assert run(["ci", str(other), "--grid", str(grid_path)]) == 51
        assert "error=GRID_MISMATCH" in capsys.readouterr().err


def test_curves_cp_on_standard_grid(grid_path):
    result = invoke("curves", "cp", "--grid", grid_path, "--delta", "3", "--psi-range", "0:4:0.5")
    frame = table(result.stdout)
    assert list(frame.columns) == ["psi", "gamma", "delta", "cp"]
    assert len(frame) == 9
    assert frame["cp"].tolist() == pytest.approx([0.95] * 9, abs=1e-10)


def test_curves_pair(grid_path):
    frame = table(invoke("curves", "pair", "--grid", grid_path, "--delta", "0", "--step", "0.5").stdout)
    assert frame["x"].iloc[-1] == 7.0
    assert frame["f_o"].abs().max() == pytest.approx(0.0, abs=1e-12)


def test_phi_scan_weak_correlation():
    frame = table(invoke("grid", "phi-scan", "--rho", "-0.01").stdout)
    assert len(frame) == 25
    assert (frame["objective"] == 0.0).all()
    assert frame["converged"].astype(str).str.lower().eq("true").all()


class TestSimulation:
    def test_cp_table(self, panel_path, grid_path):
        result = invoke(
            "--seed", 3, "sim", "cp", panel_path, "--grid", grid_path,
            "--gamma-grid", "0,20", "--delta-grid", "1", "--M", 400,
        )
        frame = table(result.stdout)
        assert list(frame.columns) == ["gamma", "delta", "estimate", "std_error", "M", "seed"]
        assert frame["gamma"].tolist() == [0.0, 20.0]
        assert (frame["seed"] == 3).all()

    def test_seed_from_environment(self, panel_path, grid_path, monkeypatch):
        args = ["sim", "cp", panel_path, "--grid", grid_path, "--gamma-grid", "0", "--delta-grid", "1", "--M", 300]
        by_flag = invoke("--seed", 42, *args).stdout
        monkeypatch.setenv("EXOCI_SEED", "42")
        assert invoke(*args).stdout == by_flag

    def test_manifest_replay_reproduces_output(self, panel_path, grid_path, tmp_path):
        out = tmp_path / "cp.csv"
        args = [
            "--seed", "9", "--threads", "2", "sim", "cp", str(panel_path), "--grid", str(grid_path),
            "--gamma-grid", "-10,10", "--delta-grid", "0,4", "--M", "1200", "--out", str(out),
        ]
        assert run(args) == 0
        first = out.read_bytes()
        manifest = RunManifest.load(f"{out}.manifest")
        assert manifest.command == "sim cp"
        assert manifest.seed == 9 and manifest.threads == 2
        assert list(manifest.argv) == args
        out.unlink()
        assert run(["replay", f"{out}.manifest"]) == 0
        assert out.read_bytes() == first

    def test_replay_pins_environment_seed(self, panel_path, grid_path, tmp_path, monkeypatch):
        out = tmp_path / "cp.csv"
        args = [
            "sim", "cp", str(panel_path), "--grid", str(grid_path),
            "--gamma-grid", "0,15", "--delta-grid", "2", "--M", "900", "--out", str(out),
        ]
        monkeypatch.setenv("EXOCI_SEED", "42")
        assert run(args) == 0
        first = out.read_bytes()
        assert RunManifest.load(f"{out}.manifest").seed == 42
        out.unlink()
        monkeypatch.delenv("EXOCI_SEED")
        assert run(["replay", f"{out}.manifest"]) == 0
        assert out.read_bytes() == first

    def test_subcommand_seed_and_threads(self, panel_path, grid_path):
        args = ["sim", "cp", panel_path, "--grid", grid_path, "--gamma-grid", "0", "--delta-grid", "1", "--M", 300]
        local = invoke(*args, "--seed", 7, "--threads", 2)
        assert local.exit_code == 0
        assert (table(local.stdout)["seed"] == 7).all()
        assert local.stdout == invoke("--seed", 7, *args).stdout
        assert invoke("--seed", 3, *args, "--seed", 7).stdout == local.stdout

    def test_subcommand_seed_on_sel_and_confcoef(self, panel_path, grid_path):
        common = [panel_path, "--grid", grid_path, "--gamma-grid", "0,10", "--delta-grid", "1"]
        sel = invoke("sim", "sel", *common, "--M", 300, "--seed", 5)
        assert (table(sel.stdout)["seed"] == 5).all()
        cc = invoke("sim", "confcoef", *common, "--M1", 100, "--M2", 200, "--M3", 300, "--seed", 5, "--threads", 2)
        assert cc.exit_code == 0
        assert cc.stdout == invoke("--seed", 5, "sim", "confcoef", *common, "--M1", 100, "--M2", 200, "--M3", 300).stdout

    def test_replay_missing_manifest(self, tmp_path, capsys):
        assert run(["replay", str(tmp_path / "none.manifest")]) == 60
        assert "error=MANIFEST_ERROR" in capsys.readouterr().err
