import json
import math

import pytest

from critheat import ProblemParams, derive_constants, eternal_solution, parse_config
from critheat.cli import main
from critheat.config import ConfigError
from critheat.output import emit_csv, format_cell, read_csv

MINIMAL = {"N": 4, "p": 4.5, "sigma": 1.0}


def write_config(tmp_path, doc, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------

def test_defaults_are_materialized_and_digest_is_stable():
    a = parse_config(dict(MINIMAL))
    assert a.materialized["grid"] == {"z_min": -40.0, "z_max": 40.0, "n": 1601}
    assert a.materialized["dt_safety"] == 0.5
    assert a.materialized["initial_condition"] == {"kind": "zero"}
    b = parse_config(json.dumps(MINIMAL))
    assert a.digest == b.digest
    # key order in the source document does not matter
    c = parse_config(json.dumps({"sigma": 1.0, "p": 4.5, "N": 4}))
    assert c.digest == a.digest


def test_config_value_errors_carry_key_paths():
    with pytest.raises(ConfigError, match="p must exceed 1"):
        parse_config({"N": 4, "p": 0.5, "sigma": 1.0})
    with pytest.raises(ConfigError, match="sigma must be >= -2"):
        parse_config({"N": 4, "p": 2.0, "sigma": -3.0})
    with pytest.raises(ConfigError, match="grid.n"):
        parse_config({**MINIMAL, "grid": {"n": 2}})
    with pytest.raises(ConfigError, match="snapshot_times\\[0\\]"):
        parse_config({**MINIMAL, "t_max": 1.0, "snapshot_times": [2.0]})
    with pytest.raises(ConfigError, match="initial_condition.kind"):
        parse_config({**MINIMAL, "initial_condition": {"kind": "spline"}})
    with pytest.raises(ConfigError, match="bc.left.kind"):
        parse_config({**MINIMAL, "bc": {"left": {"kind": "robin"}}})


def test_unknown_keys_are_rejected():
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config({**MINIMAL, "gridd": {}})
    with pytest.raises(ConfigError, match="grid.z_mid: unknown key"):
        parse_config({**MINIMAL, "grid": {"z_mid": 0.0}})
    with pytest.raises(ConfigError, match="initial_condition.radius"):
        parse_config({**MINIMAL, "initial_condition": {"kind": "zero", "radius": 1.0}})


def test_radial_frame_grid_schema():
    cfg = parse_config({**MINIMAL, "frame": "radial",
                        "grid": {"r_lo": 0.1, "r_hi": 10.0, "n": 101}})
    rc = cfg.radial_config()
    assert rc.r_lo == 0.1 and rc.n == 101
    with pytest.raises(ConfigError, match="grid.z_min"):
        parse_config({**MINIMAL, "frame": "radial", "grid": {"z_min": -1.0}})
    with pytest.raises(ConfigError, match="ode_limit"):
        parse_config({**MINIMAL, "frame": "radial",
                      "bc": {"left": {"kind": "ode_limit", "value": 1.0}}})


# ---------------------------------------------------------------------------
# CSV formatting
# ---------------------------------------------------------------------------

def test_csv_cells_round_trip_doubles(tmp_path):
    x = 1.0 / 3.0
    assert format_cell(x) == "0.33333333333333331"
    assert float(format_cell(x)) == x
    assert format_cell(math.inf) == "inf"
    assert format_cell(7) == "7"
    path = emit_csv(tmp_path / "t.csv", ["a", "b"], [(x, 1), (2.0, math.nan)])
    raw = path.read_bytes()
    assert b"\r" not in raw
    header, rows = read_csv(path)
    assert header == ["a", "b"]
    assert float(rows[0][0]) == x


def test_empty_table_is_header_only(tmp_path):
    path = emit_csv(tmp_path / "e.csv", ["t", "sup"], [])
    assert path.read_text() == "t,sup\n"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def test_derive_prints_one_csv_row(tmp_path, capsys):
    code = main(["derive", "--config", write_config(tmp_path, MINIMAL)])
    assert code == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "N,p,sigma,alpha,K0,K,p_c,p_s,regime"
    cells = lines[1].split(",")
    assert cells[0] == "4" and cells[-1] == "FisherKPP"
    c = derive_constants(ProblemParams(N=4, p=4.5, sigma=1.0))
    assert float(cells[4]) == c.K0


def test_derive_formats_infinite_exponents(tmp_path, capsys):
    code = main(["derive", "--config", write_config(tmp_path, {"N": 2, "p": 5.0, "sigma": 0.0})])
    assert code == 0
    row = capsys.readouterr().out.strip().splitlines()[1].split(",")
    assert row[6] == "inf" and row[7] == "inf"
    assert row[8] == "FujitaBlowup"


def test_bad_config_exits_2(tmp_path, capsys):
    code = main(["derive", "--config", write_config(tmp_path, {"N": 4, "p": 0.5, "sigma": 1.0})])
    assert code == 2
    assert "p must exceed 1" in capsys.readouterr().err


def test_closed_form_emits_expected_values(tmp_path):
    cfgp = write_config(tmp_path, MINIMAL)
    out = tmp_path / "out"
    code = main(["closed-form", "--config", cfgp, "--out", str(out),
                 "--which", "U", "--grid", "0.5:2:5", "--times", "0,1", "--svg"])
    assert code == 0
    header, rows = read_csv(out / "closed_form.csv")
    assert header == ["r_or_z", "t", "value"]
    assert len(rows) == 10
    c = derive_constants(ProblemParams(**MINIMAL))
    r0, t0, v0 = (float(x) for x in rows[0])
    assert v0 == pytest.approx(float(eternal_solution(r0, t0, c)), rel=1e-15)
    assert (out / "closed_form.svg").exists()
    assert (out / "closed_form.svg").stat().st_size > 0


def test_simulate_fisher_writes_all_outputs(tmp_path):
    doc = {
        **MINIMAL,
        "grid": {"z_min": -10.0, "z_max": 10.0, "n": 101},
        "t_max": 0.2,
        "snapshot_times": [0.0, 0.1],
        "initial_condition": {"kind": "bump", "center": 1.0, "width": 0.5, "height": 0.3},
    }
    out = tmp_path / "out"
    code = main(["simulate", "--config", write_config(tmp_path, doc), "--out", str(out), "--svg"])
    assert code == 0
    header, rows = read_csv(out / "sup_trace.csv")
    assert header == ["t", "sup", "energy"]
    assert len(rows) > 10
    header, srows = read_csv(out / "snapshots.csv")
    assert header == ["t", "z", "psi"]
    assert {float(r[0]) for r in srows} == {0.0, 0.1}
    doc_out = json.loads((out / "outcome.json").read_text())
    assert doc_out["status"] == "Undetermined"
    assert doc_out["config"]["t_max"] == 0.2
    assert (out / "sup_trace.svg").exists() and (out / "snapshots.svg").exists()


def test_simulate_is_deterministic(tmp_path):
    doc = {
        **MINIMAL,
        "grid": {"z_min": -10.0, "z_max": 10.0, "n": 101},
        "t_max": 0.2,
        "initial_condition": {"kind": "bump", "center": 1.0, "width": 0.5, "height": 0.3},
    }
    cfgp = write_config(tmp_path, doc)
    outs = []
    for sub in ("a", "b"):
        out = tmp_path / sub
        assert main(["simulate", "--config", cfgp, "--out", str(out)]) == 0
        outs.append((out / "sup_trace.csv").read_bytes())
    assert outs[0] == outs[1]


def test_simulate_radial_uses_r_columns(tmp_path):
    doc = {
        **MINIMAL,
        "frame": "radial",
        "grid": {"r_lo": math.exp(-8.0), "r_hi": math.exp(8.0), "n": 101},
        "t_max": 0.2,
        "snapshot_times": [0.1],
        "initial_condition": {"kind": "bump", "center": 1.0, "width": 0.5, "height": 0.3},
    }
    out = tmp_path / "out"
    code = main(["simulate", "--config", write_config(tmp_path, doc), "--out", str(out)])
    assert code == 0
    header, _ = read_csv(out / "snapshots.csv")
    assert header == ["t", "r", "u"]


def test_frame_flag_must_match_config(tmp_path, capsys):
    code = main(["simulate", "--frame", "radial",
                 "--config", write_config(tmp_path, {**MINIMAL, "t_max": 0.1})])
    assert code == 2


def test_residual_command_reports_orders(tmp_path):
    out = tmp_path / "out"
    code = main(["residual", "--config", write_config(tmp_path, MINIMAL),
                 "--out", str(out), "--which", "S", "--refinements", "3", "--n0", "201"])
    assert code == 0
    header, rows = read_csv(out / "residual.csv")
    assert header == ["h", "sup_residual", "order"]
    assert len(rows) == 3
    assert rows[0][2] == "nan"
    assert 1.8 <= float(rows[1][2]) <= 2.2
    report = json.loads((out / "report.json").read_text())
    assert report["passed"] is True


def test_roundtrip_command(tmp_path):
    doc = {**MINIMAL,
           "grid": {"z_min": -8.0, "z_max": 8.0, "n": 201},
           "initial_condition": {"kind": "bump", "center": 1.0, "width": 0.5, "height": 2.0}}
    out = tmp_path / "out"
    code = main(["roundtrip", "--config", write_config(tmp_path, doc), "--out", str(out)])
    assert code == 0
    report = json.loads((out / "report.json").read_text())
    assert report["passed"] is True
    assert report["max_abs_error"] <= report["tolerance"]


def test_classify_command_respects_expected(tmp_path):
    doc = {**MINIMAL,
           "grid": {"z_min": -15.0, "z_max": 15.0, "n": 301},
           "initial_condition": {"kind": "zero"},
           "experiment": {"horizon": 0.5, "expected": "Blowup"}}
    out = tmp_path / "out"
    code = main(["classify", "--config", write_config(tmp_path, doc), "--out", str(out)])
    assert code == 1
    report = json.loads((out / "report.json").read_text())
    assert report["status"] == "Decay" and report["passed"] is False


def test_unknown_experiment_key_is_rejected(tmp_path, capsys):
    doc = {**MINIMAL, "experiment": {"horizonn": 1.0}}
    code = main(["classify", "--config", write_config(tmp_path, doc)])
    assert code == 2
    assert "horizonn" in capsys.readouterr().err


def test_sweep_command_empty_is_vacuously_green(tmp_path):
    out = tmp_path / "out"
    code = main(["sweep", "--config", write_config(tmp_path, MINIMAL), "--out", str(out)])
    assert code == 0
    header, rows = read_csv(out / "sweep.csv")
    assert header == ["N", "p", "sigma", "regime", "K0", "status"]
    assert rows == []


# ---------------------------------------------------------------------------
# experiment subcommand smoke runs (coarse grids; the acceptance suite
# exercises the full-resolution versions through the library API)
# ---------------------------------------------------------------------------

def test_gauss_check_command(tmp_path):
    doc = {
        "N": 4, "p": 3.5, "sigma": 1.0,
        "grid": {"z_min": -30.0, "z_max": 30.0, "n": 601},
        "dt_init": 5e-4, "decay_threshold": 1e-14,
        "initial_condition": {"kind": "bump", "center": 1.0, "width": 0.5, "height": 0.2},
        "experiment": {"snapshot_times": [2.0, 4.0, 8.0], "window": [-15.0, 15.0]},
    }
    out = tmp_path / "out"
    assert main(["gauss-check", "--config", write_config(tmp_path, doc),
                 "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["mass_match"] is True
    assert report["passed"] is True
    header, rows = read_csv(out / "deviations.csv")
    assert header == ["t", "D"] and len(rows) == 3


def test_decay_fit_command(tmp_path):
    doc = {
        "N": 4, "p": 3.5, "sigma": 1.0,
        "grid": {"z_min": -20.0, "z_max": 20.0, "n": 401},
        "t_max": 30.0, "decay_threshold": 1e-9,
        "initial_condition": {"kind": "capped_S", "cap": 0.5, "scale": 0.9},
    }
    out = tmp_path / "out"
    assert main(["decay-fit", "--config", write_config(tmp_path, doc),
                 "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["passed"] is True
    assert -1.05 * 0.96 <= report["slope"] <= -0.95 * 0.96


def test_separatrix_command(tmp_path):
    doc = {
        "N": 4, "p": 4.5, "sigma": 1.0,
        "grid": {"z_min": -15.0, "z_max": 15.0, "n": 301},
        "experiment": {"lam_lo": 0.7, "lam_hi": 1.3, "iterations": 4, "horizon": 30.0},
    }
    out = tmp_path / "out"
    assert main(["separatrix", "--config", write_config(tmp_path, doc),
                 "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert 0.9 <= report["lam_star"] <= 1.1
    header, rows = read_csv(out / "evaluations.csv")
    assert header == ["lambda", "status", "is_blowup"]
    assert len(rows) == 6   # two endpoints + four bisections


def test_sigma2_command(tmp_path):
    doc = {
        "N": 3, "p": 2.0, "sigma": -2.0,
        "grid": {"z_min": -20.0, "z_max": 20.0, "n": 401},
        "experiment": {"scenario": "PlateauA", "horizon": 5.0, "A": 1.0, "r_knee": 0.25},
    }
    out = tmp_path / "out"
    assert main(["sigma2", "--config", write_config(tmp_path, doc),
                 "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["passed"] is True
    assert report["measurements"]["status"] == "Blowup"


def test_pc_case_command(tmp_path):
    doc = {
        "N": 4, "p": 2.5, "sigma": 1.0,
        "grid": {"z_min": -20.0, "z_max": 20.0, "n": 401},
        "initial_condition": {"kind": "bump", "center": 1.0, "width": 0.5, "height": 2.0},
        "experiment": {"horizon": 50.0},
    }
    out = tmp_path / "out"
    assert main(["pc-case", "--config", write_config(tmp_path, doc),
                 "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["measurements"]["bump_status"] == "Blowup"


def test_sweep_command_with_entries(tmp_path):
    doc = {
        "N": 4, "p": 4.5, "sigma": 1.0,
        "grid": {"z_min": -20.0, "z_max": 20.0, "n": 401},
        "initial_condition": {"kind": "bump", "center": 1.0, "width": 0.5, "height": 0.01},
        "experiment": {"entries": [
            {"N": 4, "p": 2.0, "sigma": 1.0},
            {"N": 4, "p": 4.5, "sigma": 1.0,
             "initial_condition": {"kind": "capped_S", "cap": 0.5, "scale": 0.5}},
        ], "horizon": 60.0},
    }
    out = tmp_path / "out"
    assert main(["sweep", "--config", write_config(tmp_path, doc),
                 "--out", str(out)]) == 0
    header, rows = read_csv(out / "sweep.csv")
    assert [r[5] for r in rows] == ["Blowup", "Decay"]
