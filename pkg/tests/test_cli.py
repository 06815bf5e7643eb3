"""Config parsing, command dispatch, CSV determinism."""

import json
import subprocess
import sys

import pytest

import vacdrag as vd
from vacdrag.cli import main, parse_config, run


def base_config(**over):
    doc = {
        "bodies": [
            {"type": "slab", "n": 14, "h": 1.0, "v": -0.1},
            {"type": "slab", "n": 14, "h": 1.0, "v": 0.1},
        ],
        "gap": 1.0,
        "h_s_meters": 1e-6,
        "pol": ["p"],
        "command": "modes",
        "grid": {"n_ky": 25, "panel_points": 8},
        "output": "out.csv",
    }
    doc.update(over)
    return doc


def test_parse_minimal_defaults():
    cfg = parse_config(json.dumps(base_config()))
    assert cfg.scenario.is_slab
    assert cfg.units.h_s_meters == 1e-6
    assert cfg.command == "modes"
    assert cfg.grid.kx_max == 40.0
    assert cfg.polarizations == (vd.Polarization.P,)


def test_parse_sweep_missing_steps():
    doc = base_config(command="force-sweep",
                      sweep={"quantity": "dv_nd_over_2c", "start": 0.8,
                             "stop": 1.4})
    with pytest.raises(vd.ConfigError) as err:
        parse_config(json.dumps(doc))
    assert "sweep.steps" in str(err.value)


def test_parse_modes_requires_slabs():
    doc = base_config(bodies=[{"type": "sheet", "omega_sp": 1.0, "v": -0.1},
                              {"type": "sheet", "omega_sp": 1.0, "v": 0.1}])
    with pytest.raises(vd.ConfigError) as err:
        parse_config(json.dumps(doc))
    assert "slab media" in str(err.value)


def test_parse_rejects_bad_velocity():
    doc = base_config()
    doc["bodies"][0]["v"] = 1.5
    with pytest.raises(vd.ConfigError):
        parse_config(json.dumps(doc))


def test_parse_rejects_bad_json():
    with pytest.raises(vd.ConfigError):
        parse_config("{not json")


def test_modes_command_csv(tmp_path):
    out = tmp_path / "modes.csv"
    doc = base_config(output=str(out), n_branches=1,
                      grid={"kx_max": 8.0, "n_ky": 25, "panel_points": 8})
    assert run(parse_config(json.dumps(doc))) == 0
    lines = out.read_text().splitlines()
    meta = [ln for ln in lines if ln.startswith("#")]
    assert any("h_s_meters" in ln for ln in meta)
    assert any("F_hat" in ln for ln in meta)
    header = next(ln for ln in lines if not ln.startswith("#"))
    assert header.split(",") == ["pol", "branch", "k", "omega_co", "n_ph",
                                 "residue", "v_g_co"]
    rows = [ln for ln in lines if not ln.startswith("#")][1:]
    assert len(rows) > 100
    nph = [float(r.split(",")[4]) for r in rows]
    assert all(1.0 < x < 14.0 for x in nph)


def test_force_sweep_below_threshold_zero_column(tmp_path):
    out = tmp_path / "sweep.csv"
    doc = base_config(
        command="force-sweep", output=str(out), pol=["s"],
        methods=["weak_coupling", "pendry_c16"],
        sweep={"quantity": "dv_nd_over_2c", "start": 0.3, "stop": 0.9,
               "steps": 4})
    assert run(parse_config(json.dumps(doc))) == 0
    rows = [ln for ln in out.read_text().splitlines()
            if ln and not ln.startswith("#")][1:]
    assert len(rows) == 8
    assert all(float(r.split(",")[3]) == 0.0 for r in rows)


def test_hybrid_command_peaks_on_ridge(tmp_path):
    out = tmp_path / "hybrid.csv"
    doc = base_config(command="hybrid", output=str(out), pol=["p"])
    assert run(parse_config(json.dumps(doc))) == 0
    rows = [ln.split(",") for ln in out.read_text().splitlines()
            if ln and not ln.startswith("#")][1:]
    kx = [float(r[0]) for r in rows]
    lam = [float(r[4]) for r in rows]
    peak_kx = kx[lam.index(max(lam))]
    assert max(lam) > 0
    assert peak_kx == pytest.approx(1.598, rel=0.02)
    # away from the ridge the growth vanishes
    assert lam[0] == 0.0 and lam[-1] == 0.0


def test_evolve_command_starts_at_zero(tmp_path):
    out = tmp_path / "evolve.csv"
    doc = base_config(command="evolve", output=str(out), pol=["p"],
                      times={"t_max": 100.0, "steps": 5})
    assert run(parse_config(json.dumps(doc))) == 0
    rows = [ln.split(",") for ln in out.read_text().splitlines()
            if ln and not ln.startswith("#")][1:]
    assert float(rows[0][0]) == 0.0
    assert float(rows[0][1]) == 0.0
    assert float(rows[-1][1]) > 0.0


def test_determinism_byte_identical(tmp_path):
    out = tmp_path / "sweep.csv"
    doc = base_config(
        command="force-sweep", output=str(out), pol=["s"],
        methods=["weak_coupling"],
        sweep={"quantity": "dv_nd_over_2c", "start": 1.2, "stop": 1.4,
               "steps": 3})
    outs = []
    for _ in range(2):
        assert run(parse_config(json.dumps(doc))) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_main_error_record(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps(base_config(command="nope")))
    status = main([str(cfg)])
    assert status == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"]["kind"] == "config"
    assert err["error"]["field"] == "command"


def test_main_output_override(tmp_path):
    cfg = tmp_path / "ok.json"
    out = tmp_path / "override.csv"
    doc = base_config(n_branches=1,
                      grid={"kx_max": 6.0, "n_ky": 25, "panel_points": 8})
    cfg.write_text(json.dumps(doc))
    assert main([str(cfg), "--output", str(out)]) == 0
    assert out.exists()


def test_console_entry_point(tmp_path):
    cfg = tmp_path / "cfg.json"
    out = tmp_path / "cli.csv"
    doc = base_config(output=str(out), n_branches=1,
                      grid={"kx_max": 6.0, "n_ky": 25, "panel_points": 8})
    cfg.write_text(json.dumps(doc))
    proc = subprocess.run([sys.executable, "-m", "vacdrag.cli", str(cfg)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert out.exists()


def test_threads_reproduce_serial(tmp_path):
    out = tmp_path / "sweep.csv"
    doc = base_config(
        command="force-sweep", output=str(out), pol=["s"],
        methods=["weak_coupling"],
        sweep={"quantity": "dv_nd_over_2c", "start": 1.2, "stop": 1.4,
               "steps": 3})
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(doc))
    outs = []
    for threads in ("1", "2"):
        assert main([str(cfg), "--threads", threads]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
