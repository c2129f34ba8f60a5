import csv

import pytest

from app.cli import main


def _run(tmp_path, *args):
    return main([*args, "--out-dir", str(tmp_path)])


def _rows(path):
    with open(path, newline="") as f:
        return list(csv.reader(f))


def test_generate_writes_instance(tmp_path, capsys):
    assert _run(tmp_path, "generate", "--bdf", "min(x1,x2)", "--n", "64", "--seed", "1") == 0
    for suffix in ("_edges.csv", "_positions.csv", "_weights.csv", "_params.json", "_config.json"):
        assert (tmp_path / f"girg_n64_s1{suffix}").exists()
    assert "generate: done" in capsys.readouterr().out


def test_generate_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["generate", "--n", "80", "--seed", "4", "--out-dir", str(out)]) == 0
    assert (a / "girg_n80_s4_edges.csv").read_bytes() == (b / "girg_n80_s4_edges.csv").read_bytes()


@pytest.mark.parametrize("args", [
    ("generate", "--beta", "3.5"),
    ("generate", "--bdf", "min(x1,x3)"),
    ("generate", "--bdf", "min(x1"),
    ("two-round", "--bdf", "max(x1,min(x2,x3))"),
])
def test_validation_errors_exit_2(tmp_path, capsys, args):
    assert _run(tmp_path, *args) == 2
    assert "error:" in capsys.readouterr().err


def test_missing_input_exits_3(tmp_path, capsys):
    assert _run(tmp_path, "analyze", "--input", str(tmp_path / "nope")) == 3
    assert "error:" in capsys.readouterr().err


def test_generate_then_analyze(tmp_path):
    assert _run(tmp_path, "generate", "--bdf", "max(x1,min(x2,x3))", "--n", "150", "--seed", "2") == 0
    prefix = str(tmp_path / "girg_n150_s2")
    assert _run(tmp_path, "analyze", "--input", prefix) == 0
    metrics = dict(_rows(tmp_path / "girg_n150_s2_report.csv")[1:])
    assert metrics["scom"] == "1"
    assert metrics["n"] == "150"


def test_volume_check(tmp_path):
    assert _run(tmp_path, "volume-check", "--bdf", "max(min(x1,x2),min(x3,x4))",
                "--radii", "0.1", "0.01", "--samples", "2000", "--epsilons", "0.1") == 0
    rows = _rows(tmp_path / "volume_check.csv")
    assert rows[0] == ["r", "exact", "mc_estimate", "sigma"]
    assert len(rows) == 3
    summary = dict(_rows(tmp_path / "volume_check_summary.csv")[1:])
    assert summary["depth"] == "2"
    assert float(summary["asymptotic_slope"]) == pytest.approx(2.0, abs=1e-6)
    assert (tmp_path / "triangle_check.csv").exists()


def test_scaling_study(tmp_path):
    assert _run(tmp_path, "scaling-study", "--bdf", "max(x1,min(x2,x3))",
                "--n-grid", "64", "128", "--seeds", "0", "1") == 0
    rows = _rows(tmp_path / "scaling_study.csv")
    assert rows[0] == ["n", "seed", "metric", "value"]
    assert {r[0] for r in rows[1:]} == {"64", "128"}
    summary = dict(_rows(tmp_path / "scaling_summary.csv")[1:])
    assert summary["scom"] == "1"
    assert "predicted_exponent" in summary


def test_two_round(tmp_path):
    assert _run(tmp_path, "two-round", "--bdf", "min(x1,x2)", "--n", "600", "--seeds", "3") == 0
    rows = _rows(tmp_path / "two_round_s3_phases.csv")
    assert rows[0] == ["phase", "edges", "giant_size"]
    assert [r[0] for r in rows[1:]] == ["1", "4", "5", "6"]
    assert (tmp_path / "two_round_summary.csv").exists()
    summary = {r[1]: r[2] for r in _rows(tmp_path / "two_round_summary.csv")[1:]}
    assert summary["cell_spread_ok"] in ("0", "1")
    assert 0.0 <= float(summary["step_frequency"]) <= 1.0
    assert int(summary["step_set_size"]) == 15
    assert int(summary["cells"]) >= 600


def test_generate_accepts_wide_min(tmp_path):
    bdf = "min(" + ",".join(f"x{i}" for i in range(1, 1201)) + ")"
    assert _run(tmp_path, "generate", "--bdf", bdf, "--n", "20", "--seed", "1") == 0
    assert len(_rows(tmp_path / "girg_n20_s1_positions.csv")[1]) == 1201


@pytest.mark.parametrize("flags", [
    ("--epsilons", "0.3"),
    ("--radii", "inf"),
    ("--offsets", "1.5"),
])
def test_bad_sweep_values_write_nothing(tmp_path, capsys, flags):
    assert _run(tmp_path, "volume-check", "--bdf", "min(x1,x2)", "--radii", "0.1",
                "--samples", "100", *flags) == 2
    assert "error:" in capsys.readouterr().err
    assert list(tmp_path.iterdir()) == []


def test_unknown_log_level_exits_2(tmp_path, capsys):
    assert _run(tmp_path, "generate", "--n", "8", "--log-level", "LOUD") == 2
    assert "log level" in capsys.readouterr().err


def test_second_run_does_not_overwrite(tmp_path, capsys):
    args = ("volume-check", "--bdf", "min(x1,x2)", "--radii", "0.1", "--samples", "500", "--epsilons", "0.1")
    assert _run(tmp_path, *args) == 0
    before = {p.name: p.read_bytes() for p in tmp_path.iterdir()}
    assert _run(tmp_path, *args, "--seed", "99") == 3
    assert "refusing to overwrite" in capsys.readouterr().err
    assert {p.name: p.read_bytes() for p in tmp_path.iterdir()} == before
