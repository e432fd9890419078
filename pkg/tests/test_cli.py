import json
import subprocess
import sys

import pytest

from warpstab.cli import main, run


def write(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


@pytest.fixture
def cone9(tmp_path):
    return write(tmp_path, "# cone over a Kaehler-Einstein base\nmodel = cone\nn = 9\nkappa = -16\nlambda = 0, 9\nmu = 8\n")


def test_analyze_cone_nine(cone9):
    code, out = run(["analyze", cone9])
    assert code == 0
    assert "classification: Stable" in out.splitlines()
    assert "threshold: -16" in out


def test_analyze_unstable_has_certificate(tmp_path):
    cfg = write(tmp_path, "model = sinh\nn = 5\nkappa = -8\n")
    code, out = run(["analyze", cfg])
    assert code == 0
    assert "classification: Unstable" in out
    assert "certificate.rayleigh: -" in out


def test_blocks_report(tmp_path):
    cfg = write(tmp_path, "model = exp\nn = 4\nkappa = 0\nlambda = 0, 4\nmu = 3\ndomain = -8, 8\nmesh = 1024\n")
    code, out = run(["blocks", cfg])
    assert code == 0
    assert out.count("block: ") == 6
    assert "mesh: 1024" in out


def test_hardy_table():
    code, out = run(["hardy", "4"])
    assert code == 0
    expected = [line for line in out.splitlines() if line.startswith("expected: ")]
    assert sorted(expected) == ["expected: 0.0", "expected: 2.25", "expected: 2.25", "expected: 2.25", "expected: 4.0"]


def test_matrices_sweep():
    code, out = run(["matrices", "cone", "4", "0:20"])
    assert code == 0
    assert "sweep: positive semidefinite" in out
    assert "indefinite" not in out


def test_catalog_listing_and_entry():
    code, out = run(["catalog"])
    assert code == 0 and "name: kaehler-einstein-n9" in out
    code, out = run(["catalog", "--entry", "product-n5"])
    assert code == 0
    assert "cone: Unstable" in out and "sinh: Unstable" in out


def test_oracle_rayleigh_seeded():
    args = ["oracle", "rayleigh", "--seed", "2", "--count", "1", "--budget", "1000", "--json"]
    code, out = run(args)
    assert code == 0
    data = json.loads(out)
    assert data["pass"] is True and data["seed"] == 2
    assert run(args)[1] == out


@pytest.mark.parametrize(
    "argv",
    [["catalog", "--json"], ["--json", "matrices", "sinh", "5", "0:10", "--step", "2.5"], ["hardy", "5", "--json"]],
)
def test_json_round_trip(argv):
    code, out = run(argv)
    assert code == 0
    again = json.dumps(json.loads(out), sort_keys=True, indent=2, allow_nan=False)
    assert again == out


def test_analyze_json(cone9):
    code, out = run(["analyze", cone9, "--json"])
    data = json.loads(out)
    assert data["classification"] == "Stable"
    assert data["kappa_min"] == "-16"
    assert json.dumps(data, sort_keys=True, indent=2, allow_nan=False) == out


@pytest.mark.parametrize(
    "text",
    [
        "model = cone\n",                              # missing n
        "model = cone\nn = 4\nkappa = x\n",
        "model = cone\nn = 4\nkappa = 1\nkappa = 2\n",
        "model = cone\nn = 4\ncolour = red\n",
        "model = cone\nn = 4\nlambda = 0, 2\nkappa = 0\n",   # Obata gap
        "model = cone\nn = 4.5\n",
        "model = torus\nn = 4\n",
        "just words\n",
        "model = cone\nn = 4\nkappa = 0\ndomain = 1\n",
    ],
)
def test_validation_errors_exit_one_with_grammar(tmp_path, text):
    code, out = run(["analyze", write(tmp_path, text)])
    assert code == 1
    assert "config grammar" in out


def test_usage_errors_exit_one(tmp_path):
    for argv in (["bogus"], [], ["hardy"], ["matrices", "cone", "4", "a:b"], ["analyze", str(tmp_path / "none.cfg")],
                 ["matrices", "cone", "5", "0:10"], ["catalog", "--entry", "nope"]):
        code, out = run(argv)
        assert code == 1, argv
        assert "grammar" in out


def test_solver_failure_exits_two(tmp_path):
    cfg = write(tmp_path, "model = cone\nn = 4\nkappa = -2.2500001\nmesh = 256\n")
    code, out = run(["analyze", cfg])
    assert code == 2
    assert out.startswith("solver error")


def test_main_prints(capsys):
    assert main(["catalog", "--entry", "symmetric-compact-n4"]) == 0
    assert "sinh: StrictlyStable" in capsys.readouterr().out
    assert main(["hardy", "x"]) == 1
    assert "usage" in capsys.readouterr().err


def test_help_mentions_grammar(capsys):
    code, _ = run(["--help"])
    assert code == 0
    assert "kappa  = <list>" in capsys.readouterr().out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "warpstab", "catalog", "--entry", "product-n4"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert "cone: Unstable" in proc.stdout
