"""Command-line interface: subcommands, wiring, and exit codes."""

import json
import subprocess
import sys

import pytest

from evsim.batch import SUMMARY_FIELDS, run_one
from evsim.cli import main
from evsim.surrogate import load_model


@pytest.fixture
def workdir(tmp_path):
    (tmp_path / "ramp.csv").write_text(
        "time_s,speed_mps\n0,0\n1,2\n2,2\n")
    (tmp_path / "scn.toml").write_text(
        '[scenario]\ncycle = "ramp.csv"\nduration = 0.5\n')
    return tmp_path


def cfg_path(workdir):
    return str(workdir / "scn.toml")


GRID_2D = """\
[[axis]]
name = "speed"
unit = "rad/s"
coords = [0.0, 200.0, 400.0]

[[axis]]
name = "torque"
unit = "N*m"
coords = [0.0, 50.0, 100.0]
"""


def test_simulate_writes_artifacts(workdir, capsys):
    trace = workdir / "trace.csv"
    report = workdir / "report.json"
    code = main(["simulate", "--config", cfg_path(workdir),
                 "--trace", str(trace), "--report", str(report)])
    assert code == 0
    out = capsys.readouterr().out
    assert f"wrote trace {trace} (51 rows)" in out
    assert f"wrote report {report}" in out
    doc = json.loads(report.read_text())
    assert doc["scenario"] == "scn" and doc["duration_s"] == 0.5
    assert trace.read_text().startswith("time_s,")


def test_simulate_prints_report_when_no_path(workdir, capsys):
    assert main(["simulate", "--config", cfg_path(workdir)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["scenario"] == "scn"


def test_simulate_uses_output_paths_from_config(workdir, capsys):
    (workdir / "scn2.toml").write_text(
        '[scenario]\ncycle = "ramp.csv"\nduration = 0.5\n'
        '[output]\ntrace = "t.csv"\nreport = "r.json"\n')
    assert main(["simulate", "--config", str(workdir / "scn2.toml")]) == 0
    assert (workdir / "t.csv").exists()
    assert json.loads((workdir / "r.json").read_text())["duration_s"] == 0.5


def test_config_errors_exit_1(workdir, capsys):
    assert main(["simulate", "--config", str(workdir / "nope.toml")]) == 1
    assert "cannot read scenario" in capsys.readouterr().err
    bad = workdir / "bad.toml"
    bad.write_text("[scenario]\ncycle = 'ramp.csv'\nwat = 1\n")
    assert main(["simulate", "--config", str(bad)]) == 1
    assert "unknown key" in capsys.readouterr().err


def test_runtime_step_error_exits_2(workdir, capsys):
    # the accessory draw bypasses the torque arbiter, so a starved
    # current limit trips the battery's runtime check mid-run
    hungry = workdir / "hungry.toml"
    hungry.write_text(
        '[scenario]\ncycle = "ramp.csv"\nduration = 0.5\n'
        '[inverter]\naccessory_power_w = 400.0\n'
        '[inverter.efficiency]\nspeed = [0.0, 800.0]\ntorque = [0.0, 250.0]\n'
        'eff = [[0.9, 0.9], [0.9, 0.9]]\n'
        '[battery]\ncapacity_ah = 50.0\nmax_discharge_a = 0.1\n'
        '[battery.ocv]\nsoc = [0.0, 1.0]\nvolts = [300.0, 400.0]\n'
        '[battery.r0]\nsoc = [0.0, 1.0]\ntemp_k = [280.0, 320.0]\n'
        'ohms = [[0.08, 0.08], [0.08, 0.08]]\n')
    assert main(["simulate", "--config", str(hungry)]) == 2
    err = capsys.readouterr().err
    assert "exceeds the configured discharge limit" in err
    assert "battery" in err


def test_sweep_and_fit_table_pipeline(workdir, capsys):
    grid = workdir / "grid.toml"
    grid.write_text(GRID_2D)
    data = workdir / "loss.csv"
    assert main(["sweep", "--config", cfg_path(workdir), "--component",
                 "motor", "--grid", str(grid), "--out", str(data)]) == 0
    assert "wrote" in capsys.readouterr().out
    model_path = workdir / "loss.json"
    assert main(["fit-table", "--data", str(data), "--axes", str(grid),
                 "--out", str(model_path), "--holdout", str(data)]) == 0
    out = capsys.readouterr().out
    assert "holdout loss_w: rmse=0 " in out
    assert "9 samples over 9 nodes (sparsest node has 1)" in out
    model = load_model(model_path)
    assert [p.name for p in model.inputs] == ["speed", "torque"]
    assert model.metadata["source"] == "fit-table loss.csv"
    assert model.metadata["validation"]["rmse"] == [0.0]
    # node samples reproduce exactly after the round trip
    assert model.predict((200.0, 50.0))[0] == pytest.approx(
        50.0 ** 2 * (0.35 + 0.007 * 200.0), rel=1e-12)


def test_sweep_rejects_unknown_component(workdir, capsys):
    grid = workdir / "grid.toml"
    grid.write_text(GRID_2D)
    assert main(["sweep", "--config", cfg_path(workdir), "--component",
                 "gearbox", "--grid", str(grid), "--out",
                 str(workdir / "x.csv")]) == 1
    assert "unknown sweep component" in capsys.readouterr().err


def test_fit_table_ambiguous_target_needs_output_flag(workdir, capsys):
    heat_grid = workdir / "heat.toml"
    heat_grid.write_text("\n".join(
        f'[[axis]]\nname = "q_{n}"\nunit = "W"\ncoords = [0.0, 500.0]\n'
        for n in ("battery", "inverter", "motor")))
    data = workdir / "thermal.csv"
    assert main(["sweep", "--config", cfg_path(workdir), "--component",
                 "thermal", "--grid", str(heat_grid), "--out", str(data)]) == 0
    capsys.readouterr()
    out_model = workdir / "t.json"
    assert main(["fit-table", "--data", str(data), "--axes", str(heat_grid),
                 "--out", str(out_model)]) == 1
    assert "pick one with --output" in capsys.readouterr().err
    assert main(["fit-table", "--data", str(data), "--axes", str(heat_grid),
                 "--out", str(out_model), "--output", "t_motor"]) == 0
    assert [p.name for p in load_model(out_model).outputs] == ["t_motor"]


def test_fit_table_unit_cross_check(workdir, capsys):
    grid = workdir / "grid.toml"
    grid.write_text(GRID_2D)
    data = workdir / "loss.csv"
    main(["sweep", "--config", cfg_path(workdir), "--component", "motor",
          "--grid", str(grid), "--out", str(data)])
    capsys.readouterr()
    wrong = workdir / "wrong_units.toml"
    wrong.write_text(GRID_2D.replace('unit = "N*m"', 'unit = "A"'))
    assert main(["fit-table", "--data", str(data), "--axes", str(wrong),
                 "--out", str(workdir / "m.json")]) == 1
    assert "axis torque is [A]" in capsys.readouterr().err


def test_fit_table_missing_column(workdir, capsys):
    grid = workdir / "grid.toml"
    grid.write_text(GRID_2D)
    data = workdir / "d.csv"
    data.write_text("# a [1], b [1]\na,b\n0.0,1.0\n")
    assert main(["fit-table", "--data", str(data), "--axes", str(grid),
                 "--out", str(workdir / "m.json")]) == 1
    assert "missing column(s) speed, torque" in capsys.readouterr().err


def test_validate_command(workdir, capsys):
    grid = workdir / "grid.toml"
    grid.write_text(GRID_2D)
    data = workdir / "loss.csv"
    model_path = workdir / "loss.json"
    main(["sweep", "--config", cfg_path(workdir), "--component", "motor",
          "--grid", str(grid), "--out", str(data)])
    main(["fit-table", "--data", str(data), "--axes", str(grid),
          "--out", str(model_path)])
    capsys.readouterr()
    assert main(["validate", "--model", str(model_path),
                 "--holdout", str(data)]) == 0
    line = capsys.readouterr().out.strip()
    assert line.startswith("loss_w: rmse=0 max_abs_err=0 r2=1")
    assert main(["validate", "--model", str(workdir / "ghost.json"),
                 "--holdout", str(data)]) == 1
    assert "cannot read model file" in capsys.readouterr().err


def test_batch_command(workdir, capsys):
    for k in range(2):
        (workdir / f"batch{k}.toml").write_text(
            f'[scenario]\nname = "b{k}"\ncycle = "ramp.csv"\nduration = 0.5\n')
    out = workdir / "summary.csv"
    assert main(["batch", "--configs", str(workdir / "batch*.toml"),
                 "--jobs", "2", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(SUMMARY_FIELDS)
    assert len(lines) == 3
    assert lines[1].split(",")[1] == "ok" and '"' not in lines[1]
    assert [ln.split(",")[2] for ln in lines[1:]] == ["b0", "b1"]


def test_batch_partial_failure_exits_3(workdir, capsys):
    (workdir / "ok.toml").write_text(
        '[scenario]\ncycle = "ramp.csv"\nduration = 0.5\n')
    (workdir / "sad.toml").write_text('[scenario]\n')  # no cycle
    out = workdir / "summary.csv"
    assert main(["batch", "--configs", str(workdir / "*.toml"),
                 "--jobs", "1", "--out", str(out)]) == 3
    assert "(1 failed)" in capsys.readouterr().out
    rows = out.read_text().splitlines()[1:]
    by_status = {r.split(",")[1] for r in rows}
    assert by_status == {"ok", "error"}
    sad_row = [r for r in rows if "sad.toml" in r][0]
    assert "missing cycle file" in sad_row


def test_batch_no_matches_and_bad_jobs(workdir, capsys):
    assert main(["batch", "--configs", str(workdir / "*.yaml"),
                 "--jobs", "1", "--out", str(workdir / "s.csv")]) == 1
    assert "no configs match" in capsys.readouterr().err
    assert main(["batch", "--configs", str(workdir / "*.toml"),
                 "--jobs", "0", "--out", str(workdir / "s.csv")]) == 1
    assert "jobs must be at least 1" in capsys.readouterr().err


def test_run_one_never_raises(workdir):
    row = run_one(str(workdir / "absent.toml"))
    assert row["status"] == "error" and "cannot read" in row["error"]
    row = run_one(cfg_path(workdir))
    assert row["status"] == "ok" and row["scenario"] == "scn"
    assert row["error"] == ""


def test_module_entry_point_runs_as_subprocess(workdir):
    proc = subprocess.run(
        [sys.executable, "-m", "evsim.cli", "simulate", "--config",
         cfg_path(workdir)],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["scenario"] == "scn"
