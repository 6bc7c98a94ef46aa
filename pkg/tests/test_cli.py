"""Tests for the ionsynth command line"""

import json

import pytest
from click.testing import CliRunner

from ionsynth.cli import cli
from ionsynth.targets import cat_state, save


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, *parts):
    """Strings are split on whitespace, paths and numbers are passed as one argument"""
    args = []
    for part in parts:
        args.extend(part.split() if isinstance(part, str) else [str(part)])
    return runner.invoke(cli, args)


def test_help(runner):
    result = invoke(runner, "--help")
    assert result.exit_code == 0
    for command in ("synthesize", "simulate", "check", "targets", "truncate"):
        assert command in result.output


def test_synthesize_cat(runner, tmp_path):
    result = invoke(runner, "synthesize --target cat --mmax 6 --nmax 6 --out-dir", tmp_path)
    assert result.exit_code == 0, result.output

    report = json.loads((tmp_path / "cat_report.json").read_text())
    assert report["slots"] == report["expected_slots"] == 313
    assert report["residual_vacuum_infidelity"] <= 1e-9
    assert report["op_count_gczs"] == 2 * 6 * 2**6
    assert report["provenance"]["command"] == "synthesize"

    prepare = json.loads((tmp_path / "cat_prepare.json").read_text())
    assert prepare["direction"] == "prepare"
    assert [p["seq"] for p in prepare["pulses"]] == list(range(report["emitted"]))
    assert (tmp_path / "cat_deevolve.json").exists()
    assert (tmp_path / "cat_prepare.json.provenance.json").exists()


def test_synthesize_vacuum_file(runner, tmp_path):
    target = tmp_path / "vacuum.json"
    result = invoke(runner, "targets --kind correlated --mmax 0 --out", target)
    assert result.exit_code == 0, result.output

    result = invoke(
        runner, "synthesize --target custom --name vac --file", target, "--out-dir", tmp_path
    )
    assert result.exit_code == 0, result.output
    prepare = json.loads((tmp_path / "vac_prepare.json").read_text())
    assert prepare["pulses"] == []
    assert prepare["skipped"] == 1


def test_synthesize_rejects_bad_input(runner, tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text(json.dumps({"m_max": 1, "n_max": 1, "coefficients": [{"m": 5}]}))
    result = invoke(runner, "synthesize --target custom --file", broken, "--out-dir", tmp_path)
    assert result.exit_code == 1

    result = invoke(runner, "synthesize --target squeezed --out-dir", tmp_path)
    assert result.exit_code == 1

    result = invoke(runner, "synthesize --target cat --regime nonlinear --out-dir", tmp_path)
    assert result.exit_code == 1


def test_alpha_parsing(runner, tmp_path):
    result = invoke(runner, "targets --kind cat --alpha two --out", tmp_path / "x.json")
    assert result.exit_code == 1

    result = invoke(runner, "targets --kind cat --alpha 1+0.5i --mmax 4 --out", tmp_path / "c.json")
    assert result.exit_code == 0, result.output


def test_simulate_end_to_end(runner, tmp_path):
    """Target file, compile, simulate; reruns with the same seed give identical tables"""
    target = tmp_path / "cat.json"
    assert invoke(runner, "targets --kind cat --alpha 2 --mmax 3 --out", target).exit_code == 0
    result = invoke(
        runner, "synthesize --target custom --name cat3 --file", target, "--out-dir", tmp_path
    )
    assert result.exit_code == 0, result.output
    sequence = tmp_path / "cat3_prepare.json"

    tables = []
    for name in ("first.csv", "second.csv"):
        result = invoke(
            runner,
            "simulate --deltas 0,0.001,0.01,0.1 --runs 100 --seed 7 --sequence",
            sequence,
            "--target-file",
            target,
            "--out",
            tmp_path / name,
        )
        assert result.exit_code == 0, result.output
        tables.append((tmp_path / name).read_bytes())

    assert tables[0] == tables[1]
    lines = tables[0].decode().splitlines()
    assert len(lines) == 5
    assert lines[0] == "delta,mean_fidelity,std_error,runs,seed"
    assert float(lines[1].split(",")[1]) >= 1 - 1e-9
    assert lines[4].endswith(",100,7")
    assert (tmp_path / "first.csv.provenance.json").exists()

    result = invoke(
        runner,
        "simulate --deltas 0,0.01 --runs 10 --format json --sequence",
        sequence,
        "--target-file",
        target,
        "--out",
        tmp_path / "sweep.json",
    )
    assert result.exit_code == 0, result.output
    payload = json.loads((tmp_path / "sweep.json").read_text())
    assert payload["provenance"]["command"] == "simulate"


def test_simulate_rejects_deevolution_sequence(runner, tmp_path):
    target = save(cat_state(2.0, 2, 2), tmp_path / "cat.json")
    invoke(runner, "synthesize --target custom --name c --file", target, "--out-dir", tmp_path)
    result = invoke(
        runner,
        "simulate --sequence",
        tmp_path / "c_deevolve.json",
        "--target-file",
        target,
        "--out",
        tmp_path / "s.csv",
    )
    assert result.exit_code == 2


def test_simulate_rejects_bad_input(runner, tmp_path):
    target = save(cat_state(2.0, 1, 1), tmp_path / "cat.json")
    missing = tmp_path / "missing.json"
    result = invoke(runner, "simulate --deltas 0,-0.1 --sequence", missing, "--target-file", target)
    assert result.exit_code == 1
    result = invoke(runner, "simulate --sequence", missing, "--target-file", target)
    assert result.exit_code == 1


CHECK = "check --eps-x 0.1 --eps-y 0.1 --nu-x 1 --mmax 6 --nmax 6"


def test_check_passes(runner, tmp_path):
    result = invoke(runner, CHECK, "--g 1 --nu-y 5 --out", tmp_path / "check.json")
    assert result.exit_code == 0, result.output
    assert "Infeasible" not in result.output
    report = json.loads((tmp_path / "check.json").read_text())
    assert report["passed"] is True
    assert report["provenance"]["command"] == "check"
    assert report["provenance"]["config"]["g"] == 1.0
    sidecar = json.loads((tmp_path / "check.json.provenance.json").read_text())
    assert sidecar["version"] == report["provenance"]["version"]
    assert "created" in sidecar


def test_check_isotropic_trap_fails(runner):
    result = invoke(runner, CHECK, "--g 1 --nu-y 1")
    assert result.exit_code == 3
    assert "Infeasible" in result.output


def test_check_strong_coupling_fails(runner):
    result = invoke(runner, CHECK, "--g 10 --nu-y 5")
    assert result.exit_code == 3
    assert "Infeasible" in result.output

    result = invoke(runner, CHECK, "--g 10 --nu-y 5 --margin 1")
    assert result.exit_code == 0


def test_targets_matches_library(runner, tmp_path):
    result = invoke(runner, "targets --kind cat --alpha 2 --mmax 6 --out", tmp_path / "cli.json")
    assert result.exit_code == 0, result.output
    save(cat_state(2.0, 6, 6), tmp_path / "lib.json")
    assert (tmp_path / "cli.json").read_bytes() == (tmp_path / "lib.json").read_bytes()


def test_targets_errors(runner, tmp_path):
    result = invoke(runner, "targets --kind squeezed --out", tmp_path / "x.json")
    assert result.exit_code == 1

    result = invoke(runner, "targets --kind cat --alpha 30 --mmax 1 --out", tmp_path / "far.json")
    assert result.exit_code == 2


def test_truncate(runner):
    result = invoke(runner, "truncate --kind correlated --alpha 2 --epsilon 1e-3")
    assert result.exit_code == 0, result.output
    assert "M_max=11, N_max=11" in result.output

    result = invoke(runner, "truncate --kind correlated --alpha 2 --epsilon 1e-3 --cap 3")
    assert result.exit_code == 2

    result = invoke(runner, "truncate --kind cat --alpha 0 --epsilon 1e-3")
    assert result.exit_code == 1


def test_truncate_report(runner, tmp_path):
    out = tmp_path / "cutoffs.json"
    result = invoke(runner, "truncate --kind correlated --alpha 2 --epsilon 1e-3 --out", out)
    assert result.exit_code == 0, result.output
    report = json.loads(out.read_text())
    assert (report["m_max"], report["n_max"]) == (11, 11)
    assert report["tail_mass"] <= 1e-3
    assert report["provenance"]["command"] == "truncate"
    assert report["provenance"]["config"]["epsilon"] == 1e-3
    assert (tmp_path / "cutoffs.json.provenance.json").exists()
