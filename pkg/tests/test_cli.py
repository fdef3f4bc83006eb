import json
import subprocess
import sys

import numpy as np
import pytest

from sandpiles.cli import main, parse_dims, parse_real, ConfigError


def run_cli(args):
    return main(list(args))


def test_parse_real_tokens():
    assert parse_real("0.25") == 0.25
    assert parse_real("sqrt2-1") == np.sqrt(2.0) - 1.0
    assert parse_real(0.5) == 0.5
    with pytest.raises(ConfigError):
        parse_real("half")
    with pytest.raises(ConfigError):
        parse_real(True)


def test_parse_dims_forms():
    assert parse_dims("2,3") == [2, 3]
    assert parse_dims("2x3") == [2, 3]
    assert parse_dims([2, 3]) == [2, 3]
    with pytest.raises(ConfigError):
        parse_dims("two")
    with pytest.raises(ConfigError):
        parse_dims("")


def test_enumerate_json_frozen(tmp_path):
    out = tmp_path / "enum.json"
    rc = run_cli(["enumerate", "--dims", "2", "--out", str(out)])
    assert rc == 0
    data = json.loads(out.read_text())
    assert data["n_sites"] == 2
    assert data["n_recurrent"] == 3
    assert data["det_integer"] == 3
    assert data["det_continuous"] == "3/4"
    assert data["addition_orders"] == [3, 3]
    assert data["identity_match"] is True


def test_enumerate_csv_rows(tmp_path):
    out = tmp_path / "enum.csv"
    rc = run_cli(["enumerate", "--dims", "2", "--format", "csv", "--out", str(out)])
    assert rc == 0
    lines = out.read_text().splitlines()
    meta = [l for l in lines if l.startswith("#")]
    rows = [l for l in lines if not l.startswith("#")]
    assert "# det_integer=3" in meta
    assert "# identity_match=True" in meta
    assert rows[0] == "q0,q1"
    assert rows[1:] == ["0,1", "1,0", "1,1"]


def test_enumerate_rerun_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run_cli(["enumerate", "--dims", "2,2", "--out", str(a)])
    run_cli(["enumerate", "--dims", "2,2", "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_enumerate_capacity_exit_code(tmp_path, capsys):
    rc = run_cli(["enumerate", "--dims", "4,4"])
    assert rc == 3
    assert "error" in capsys.readouterr().err


def test_simulate_trajectory_and_determinism(tmp_path):
    out1, out2 = tmp_path / "t1.csv", tmp_path / "t2.csv"
    args = ["simulate", "--dims", "2", "--a", "0.2", "--b", "0.8",
            "--steps", "25", "--seed", "9"]
    assert run_cli(args + ["--out", str(out1)]) == 0
    assert run_cli(args + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    lines = out1.read_text().splitlines()
    rows = [l for l in lines if not l.startswith("#")]
    assert rows[0] == "t,site_added,u,quanta_0,quanta_1,frac_0,frac_1"
    assert len(rows) == 26
    first = rows[1].split(",")
    assert first[0] == "1"
    assert int(first[1]) in (0, 1)
    assert 0.2 <= float(first[2]) <= 0.8
    for row in rows[1:]:
        parts = row.split(",")
        assert 0 <= int(parts[3]) < 2 and 0 <= int(parts[4]) < 2
        assert 0.0 <= float(parts[5]) < 0.5 and 0.0 <= float(parts[6]) < 0.5


def test_simulate_fixed_amount_token(tmp_path):
    out = tmp_path / "t.csv"
    rc = run_cli(["simulate", "--dims", "2", "--a", "sqrt2-1", "--steps", "5",
                  "--out", str(out)])
    assert rc == 0
    text = out.read_text()
    assert "# mode=fixed" in text
    rows = [l for l in text.splitlines() if not l.startswith("#")][1:]
    for row in rows:
        assert float(row.split(",")[2]) == np.sqrt(2.0) - 1.0


def test_simulate_json_format(tmp_path):
    out = tmp_path / "t.json"
    rc = run_cli(["simulate", "--dims", "2", "--a", "0.3", "--steps", "4",
                  "--format", "json", "--out", str(out)])
    assert rc == 0
    data = json.loads(out.read_text())
    assert data["metadata"]["mode"] == "fixed"
    assert len(data["trajectory"]) == 4
    assert data["trajectory"][0]["t"] == 1


def test_simulate_missing_amount_is_config_error(capsys):
    rc = run_cli(["simulate", "--dims", "2", "--steps", "5"])
    assert rc == 2
    assert "missing --a" in capsys.readouterr().err


def test_simulate_bad_interval_is_config_error(capsys):
    rc = run_cli(["simulate", "--dims", "2", "--a", "0.8", "--b", "0.2",
                  "--steps", "5"])
    assert rc == 2


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({
        "lattice": {"dims": [2]},
        "a": 0.3, "steps": 5, "seed": 4,
    }))
    out = tmp_path / "t.csv"
    rc = run_cli(["simulate", "--config", str(cfg), "--a", "0.4",
                  "--out", str(out)])
    assert rc == 0
    text = out.read_text()
    assert "# a=0.4" in text
    assert "# steps=5" in text


def test_config_file_bad_json_reports_position(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text('{\n  "lattice": {"dims": [2]},\n  oops\n}\n')
    rc = run_cli(["simulate", "--config", str(cfg), "--steps", "5"])
    assert rc == 2
    err = capsys.readouterr().err
    assert "bad.json:3" in err


def test_config_file_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text('{"lattice": {"dims": [2]}, "stepz": 5}')
    rc = run_cli(["simulate", "--config", str(cfg), "--a", "0.5", "--steps", "5"])
    assert rc == 2
    assert "stepz" in capsys.readouterr().err


def test_init_variants(tmp_path):
    inline = json.dumps({"quanta": [1, 0], "frac": [0.1, 0.2]})
    for spec in ("zero", "max", "mu", inline):
        rc = run_cli(["simulate", "--dims", "2", "--a", "0.5", "--steps", "3",
                      "--init", spec, "--out", str(tmp_path / "t.csv")])
        assert rc == 0
    init_file = tmp_path / "init.json"
    init_file.write_text(inline)
    rc = run_cli(["simulate", "--dims", "2", "--a", "0.5", "--steps", "3",
                  "--init", f"@{init_file}", "--out", str(tmp_path / "t.csv")])
    assert rc == 0


def test_init_rejected(tmp_path, capsys):
    unstable = json.dumps({"quanta": [2, 0], "frac": [0.0, 0.0]})
    rc = run_cli(["simulate", "--dims", "2", "--a", "0.5", "--steps", "3",
                  "--init", unstable])
    assert rc == 2
    wrong_len = json.dumps({"quanta": [1], "frac": [0.0]})
    rc = run_cli(["simulate", "--dims", "2", "--a", "0.5", "--steps", "3",
                  "--init", wrong_len])
    assert rc == 2
    rc = run_cli(["simulate", "--dims", "2", "--a", "0.5", "--steps", "3",
                  "--init", "garbage"])
    assert rc == 2


def test_couple_single_site(tmp_path):
    out = tmp_path / "log.csv"
    rc = run_cli(["couple", "--dims", "1", "--a", "0.0", "--b", "0.96",
                  "--seed", "5", "--out", str(out)])
    assert rc == 0
    lines = out.read_text().splitlines()
    meta = {l.split("=")[0][2:]: l.split("=", 1)[1] for l in lines if l.startswith("#")}
    assert meta["M"] == "5" and meta["L"] == "5"
    assert meta["p_success"] == "1/32"
    assert meta["coalesced"] == "True"
    rows = [l for l in lines if not l.startswith("#")]
    assert rows[0] == "epoch,O_occurred,coalesced"
    last = rows[-1].split(",")
    assert last[2] == "1"
    for row in rows[1:]:
        epoch, o, c = row.split(",")
        if o == "1":
            assert c == "1"


def test_couple_requires_interval(capsys):
    rc = run_cli(["couple", "--dims", "2", "--a", "0.5", "--b", "0.5"])
    assert rc == 2
    rc = run_cli(["couple", "--dims", "2", "--a", "0.8", "--b", "0.2"])
    assert rc == 2


def test_invariance_passes(tmp_path):
    out = tmp_path / "inv.json"
    rc = run_cli(["invariance", "--dims", "2", "--samples", "20000",
                  "--bins", "8", "--seed", "3", "--out", str(out)])
    data = json.loads(out.read_text())
    assert data["pass"] is (rc == 0)
    assert rc == 0
    assert data["tv"] <= data["noise_floor"] + data["tolerance"]


def test_limit_rational_passes(tmp_path):
    out = tmp_path / "lim.json"
    rc = run_cli(["limit-rational", "--dims", "2", "--a", "0.5",
                  "--steps", "400", "--samples", "4000", "--bins", "4",
                  "--seed", "2", "--out", str(out)])
    assert rc == 0
    data = json.loads(out.read_text())
    assert data["quantum_multiple"] == 1
    assert data["pass"] is True


def test_limit_rational_rejects_non_multiple(capsys):
    rc = run_cli(["limit-rational", "--dims", "2", "--a", "0.3"])
    assert rc == 2
    assert "quantum multiple" in capsys.readouterr().err


def test_fourier_report(tmp_path):
    out = tmp_path / "f.json"
    rc = run_cli(["fourier", "--a", "0.3", "--k", "1,-2", "--x", "0.2,0.7",
                  "--N", "25", "--samples", "40000", "--seed", "1",
                  "--out", str(out)])
    assert rc == 0
    data = json.loads(out.read_text())
    assert data["pass"] is True
    assert data["abs_difference"] <= 4.0 * data["stderr"]
    assert data["modulus_bound"] > 0.0


def test_fourier_dimension_mismatch(capsys):
    rc = run_cli(["fourier", "--a", "0.3", "--k", "1,2", "--x", "0.1"])
    assert rc == 2


def test_ergodic_report(tmp_path):
    out = tmp_path / "erg.json"
    rc = run_cli(["ergodic", "--dims", "2", "--a", "sqrt2-1",
                  "--steps", "60000", "--seed", "8", "--init", "mu",
                  "--out", str(out)])
    assert rc == 0
    data = json.loads(out.read_text())
    assert len(data["cells"]) == 3
    assert data["expected_frequency"] == pytest.approx(1 / 3)
    assert data["max_abs_deviation"] <= data["tolerance"]


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "sandpiles", "enumerate",
                           "--dims", "2"], capture_output=True, text=True)
    assert proc.returncode == 0
    data = json.loads(proc.stdout)
    assert data["n_recurrent"] == 3


def test_missing_dims_is_config_error(capsys):
    rc = run_cli(["invariance"])
    assert rc == 2
    assert "dims" in capsys.readouterr().err
