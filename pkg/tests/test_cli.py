import json

import pytest

from muxjba import cli

SMALL = """\
seed: 11
n_shots: 100
cells:
  - id: 1
  - id: 2
readout:
  latch_duration: 1.5e-6
"""



def test_derive_prints_oracle_values(tmp_path, capsys):
    assert cli.main(["derive", "--out", str(tmp_path)]) == 0
    line = capsys.readouterr().out
    assert "2chi = 3.835 MHz" in line
    assert "kappa/2pi = 3.100 MHz" in line
    assert "T_P = 8.29 us" in line
    assert "(10.12, 28.59)" in line
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert "derive.json" in manifest["files"]


def test_missing_config_exit_2(tmp_path, capsys):
    code = cli.main(["scurve", "--config", str(tmp_path / "none.yaml"), "--out", str(tmp_path)])
    assert code == 2
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["error"] == "config"


def test_invalid_field_exit_2(tmp_path, capsys):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("cells:\n  - id: 1\n    quality_factor: -5\n")
    assert cli.main(["derive", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    err = json.loads(capsys.readouterr().err.strip())
    assert err["field"] == "quality_factor"


def test_runtime_error_exit_3(tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("crosstalk_cells: [1, 3]\n")
    assert cli.main(["crosstalk", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 3
    assert json.loads(capsys.readouterr().err.strip())["error"] == "runtime"


def test_env_overrides(tmp_path, monkeypatch):
    monkeypatch.setenv("MUXJBA_SEED", "42")
    monkeypatch.setenv("MUXJBA_OUT", str(tmp_path))
    assert cli.main(["derive"]) == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["master_seed"] == 42


def test_crosstalk_byte_identical_and_manifest(tmp_path):
    cfg = tmp_path / "run.yaml"
    cfg.write_text(SMALL + "unknown_thing: 1\n")
    outs = []
    for k, threads in enumerate(("1", "2")):
        out = tmp_path / f"o{k}"
        assert cli.main(["crosstalk", "--config", str(cfg), "--out", str(out), "--threads", threads]) == 0
        outs.append(out)
    a, b = (json.loads((o / "manifest.json").read_text()) for o in outs)
    assert a["files"] == b["files"]
    assert (outs[0] / "crosstalk.csv").read_bytes() == (outs[1] / "crosstalk.csv").read_bytes()
    assert any("unknown_thing" in w for w in a["warnings"])
    assert a["config_sha256"] == cli.sha256_file(outs[0] / "config.yaml")
    for name, digest in a["files"].items():
        assert cli.sha256_file(outs[0] / name) == digest


def test_rerun_from_stored_config(tmp_path):
    cfg = tmp_path / "run.yaml"
    cfg.write_text(SMALL)
    first = tmp_path / "first"
    assert cli.main(["crosstalk", "--config", str(cfg), "--out", str(first), "--seed", "5", "--shots", "120"]) == 0
    second = tmp_path / "second"
    assert cli.main(["crosstalk", "--config", str(first / "config.yaml"), "--out", str(second)]) == 0
    a, b = (json.loads((o / "manifest.json").read_text()) for o in (first, second))
    assert a["files"] == b["files"] and a["n_shots"] == 120 and b["master_seed"] == 5


def test_bad_threads(tmp_path):
    assert cli.main(["derive", "--threads", "0", "--out", str(tmp_path)]) == 2


@pytest.mark.parametrize("cmd", ["iqcloud"])
def test_readout_commands_write_tables(tmp_path, cmd):
    cfg = tmp_path / "run.yaml"
    cfg.write_text(SMALL)
    assert cli.main([cmd, "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    manifest = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert f"{cmd}_iq.csv" in manifest["files"]
