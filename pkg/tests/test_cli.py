import json

import pytest

from twophase import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def test_equilibrium(capsys):
    code, doc = run(capsys, "equilibrium")
    assert code == 0
    assert doc["schema"] == 1
    assert doc["result"]["R"] == pytest.approx(1.0)
    assert "timestamp" in doc["metadata"]
    assert doc["config"]["geometry"]["N"] == 24


def test_certify_s22(capsys):
    code, doc = run(capsys, "lopatinskii", "certify", "--variant", "s22", "--rmax", "1e3")
    assert code == 0
    assert doc["result"]["verdict"] == "zero-free"


def test_spectrum_block_model(capsys):
    code, doc = run(capsys, "spectrum", "compute", "--m", "2")
    assert code == 0
    assert doc["result"]["positive_count"] == 1
    assert doc["result"]["kernel_dim"] == 8


def test_spectrum_single_ball_and_csv(capsys, tmp_path):
    csv_path = tmp_path / "b.csv"
    code, doc = run(capsys, "spectrum", "compute", "--geometry.L_max", "3",
                    "--run.csv", str(csv_path))
    assert code == 0
    r = doc["result"]
    assert r["positive_count"] == 0 and r["kernel_dim"] == 5 and r["semisimple"]
    assert r["gates"]["grid_independent"]
    assert csv_path.read_text().splitlines()[0] == "l,lambda,re_b,im_b"


def test_symbols_scan_csv(capsys, tmp_path):
    p = tmp_path / "scan.csv"
    code, doc = run(capsys, "symbols", "scan", "--symbol.count", "5", f"--run.csv={p}")
    assert code == 0
    header = p.read_text().splitlines()[0].split(",")
    assert header == cli.SCAN_COLUMNS
    assert doc["result"]["max_factorization_residual"] < 1e-12


def test_entropy_probe(capsys):
    code, doc = run(capsys, "entropy", "probe")
    assert code == 0 and doc["result"]["is_local_max"]


def test_deterministic_output(capsys):
    _, a = run(capsys, "lopatinskii", "certify")
    _, b = run(capsys, "lopatinskii", "certify")
    a.pop("metadata"), b.pop("metadata")
    assert a == b


@pytest.mark.parametrize("argv", [["equilibrium", "--geometry.bogus", "1"],
                                  ["equilibrium", "--nosection", "1"],
                                  ["equilibrium", "--geometry.N", "abc"],
                                  ["equilibrium", "--geometry.N", "2.5"],
                                  ["frobnicate"]])
def test_config_errors(capsys, argv):
    code, _ = run(capsys, *argv)
    assert code == 1


def test_config_file(tmp_path, capsys):
    p = tmp_path / "c.toml"
    p.write_text("[geometry]\nR = 0.8\n")
    code, doc = run(capsys, "--config", str(p), "equilibrium")
    assert code == 0 and doc["result"]["R"] == pytest.approx(0.8)
    p.write_text("[geometry]\nRR = 0.8\n")
    assert run(capsys, "--config", str(p), "equilibrium")[0] == 1


def test_output_file(tmp_path, capsys):
    p = tmp_path / "o.json"
    code = cli.main(["equilibrium", "--run.output", str(p)])
    assert code == 0 and json.loads(p.read_text())["command"] == "equilibrium"


def test_selftest_exit_code_reflects_checks(capsys):
    code, doc = run(capsys, "selftest")
    checks = doc["result"]["checks"]
    assert len(checks) == 11
    assert code == (0 if all(c["passed"] for c in checks) else 2)
