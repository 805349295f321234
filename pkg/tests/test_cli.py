"""End-to-end command-line checks: artifacts, determinism, exit codes."""

import hashlib
import json
import math

import pytest

from ioncoupler import cli, config, constants

GOLDEN_TAU_30UM_S = 69.141757001183377e-6


def write_config(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


def small_parity_doc():
    doc = config.default_document("parity")
    doc["run"]["sweep_start_rad"] = 0.0
    doc["run"]["sweep_stop_rad"] = math.pi * 4.0 / 5.0
    doc["run"]["sweep_points"] = 5
    doc["run"]["shots"] = 2
    return doc


def sha256(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def test_modes_table(capsys):
    assert cli.main(["modes"]) == 0
    out = capsys.readouterr().out
    assert "omega_ex" in out and "tau_ex" in out


def test_modes_json_reference_point(capsys):
    assert cli.main(["modes", "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["omega_ex_hz"] == pytest.approx(6500.0, rel=1e-9)
    assert data["tau_ex_s"] == pytest.approx(1.0 / 26000.0, rel=1e-9)
    assert data["splitting_hz"] == pytest.approx(13000.0, rel=1e-6)


def test_modes_json_30um_spacing(tmp_path, capsys):
    doc = config.default_document("parity")
    doc["wells"]["d0_um"] = 30.0
    path = write_config(tmp_path, doc)
    assert cli.main(["modes", "--json", "--config", path]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["tau_ex_s"] == pytest.approx(GOLDEN_TAU_30UM_S, rel=1e-9)


def test_modes_out_writes_csv(tmp_path, capsys):
    out = tmp_path / "artifacts"
    assert cli.main(["modes", "--out", str(out)]) == 0
    table = (out / "modes.csv").read_text().splitlines()
    assert len(table) == 2
    assert "omega_ex_hz" in table[0].split(",")
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["files"]["modes.csv"] == sha256(out / "modes.csv")


def test_run_writes_artifacts(tmp_path, capsys):
    path = write_config(tmp_path, small_parity_doc())
    out = tmp_path / "run"
    rc = cli.main(
        ["run", "parity", "--config", path, "--seed", "3", "--out", str(out), "--plot", "--json"]
    )
    assert rc == 0
    manifest = json.loads(capsys.readouterr().out)
    assert manifest["scenario"] == "parity"
    assert manifest["seed"] == 3
    for name in ("parity.csv", "parity.json", "parity.png"):
        assert manifest["files"][name] == sha256(out / name)
    derived = manifest["metrics"]["derived"]
    assert derived["maximally_entangling"] is True
    assert derived["fidelity"] > 0.99
    assert manifest["metrics"]["rows"] == 5
    header = (out / "parity.csv").read_text().splitlines()[0]
    assert header == "analysis_phase_rad,parity,parity_err"


def test_run_is_byte_deterministic(tmp_path, monkeypatch):
    path = write_config(tmp_path, small_parity_doc())
    argv = ["run", "parity", "--config", path, "--plot"]
    assert cli.main(argv + ["--out", str(tmp_path / "a")]) == 0
    assert cli.main(argv + ["--out", str(tmp_path / "b")]) == 0
    monkeypatch.setenv("IONCOUPLER_THREADS", "2")
    assert cli.main(argv + ["--out", str(tmp_path / "c")]) == 0
    for name in ("parity.csv", "parity.json", "parity.png", "manifest.json"):
        first = (tmp_path / "a" / name).read_bytes()
        assert first == (tmp_path / "b" / name).read_bytes()
        assert first == (tmp_path / "c" / name).read_bytes()


def test_sidecar_reproduces_run(tmp_path):
    path = write_config(tmp_path, small_parity_doc())
    assert cli.main(["run", "parity", "--config", path, "--out", str(tmp_path / "a")]) == 0
    sidecar = tmp_path / "a" / "parity.json"
    assert (
        cli.main(["run", "parity", "--config", str(sidecar), "--out", str(tmp_path / "b")]) == 0
    )
    assert (tmp_path / "a" / "parity.csv").read_bytes() == (
        tmp_path / "b" / "parity.csv"
    ).read_bytes()


def test_gate_alias_writes_canonical_name(tmp_path):
    doc = config.default_document("gate")
    doc["run"]["sweep_start_us"] = 0.0
    doc["run"]["sweep_stop_us"] = 300.0
    doc["run"]["sweep_points"] = 3
    doc["run"]["shots"] = 1
    path = write_config(tmp_path, doc)
    out = tmp_path / "gate"
    assert cli.main(["run", "gate", "--config", path, "--out", str(out)]) == 0
    assert (out / "gate_evolution.csv").exists()
    assert (out / "gate_evolution.json").exists()
    assert not (out / "gate.csv").exists()


def test_usage_errors_exit_2(tmp_path, capsys):
    assert cli.main(["run", "ramsey", "--out", str(tmp_path)]) == 2
    assert "ramsey" in capsys.readouterr().err
    doc = small_parity_doc()
    del doc["wells"]["mass_amu"]
    path = write_config(tmp_path, doc)
    assert cli.main(["run", "parity", "--config", path, "--out", str(tmp_path)]) == 2
    assert "mass_amu" in capsys.readouterr().err
    assert cli.main([]) == 2


def test_engine_errors_exit_3(tmp_path, capsys):
    doc = small_parity_doc()
    doc["drive"]["sideband_offset_hz"] = 1000.0
    path = write_config(tmp_path, doc)
    assert cli.main(["run", "parity", "--config", path, "--out", str(tmp_path)]) == 3
    err = capsys.readouterr().err
    assert err.startswith("engine error:")
    assert "close" in err


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["--version"])
    assert info.value.code == 0
    assert "ioncoupler" in capsys.readouterr().out


def test_selftest_quick_passes(capsys):
    assert cli.main(["selftest", "--quick"]) == 0
    out = capsys.readouterr().out
    assert "all" in out and "FAIL" not in out


def test_selftest_catches_corrupted_constant(monkeypatch, capsys):
    # negative control: a wrong ion mass must trip the frozen exchange-time
    # golden, proving the suite can actually fail
    monkeypatch.setattr(constants, "MASS_BE9", constants.MASS_BE9 * 1.2)
    assert cli.main(["selftest", "--quick"]) == 1
    out = capsys.readouterr().out
    failing = [line for line in out.splitlines() if line.startswith("FAIL")]
    assert failing and "tau_ex" in failing[0]
