import json

import pandas as pd
import pytest

from app.main import main
from tests.conftest import hand_database

HAND_AUDIT_FLAGS = [
    "audit",
    "--k", "4",
    "--block-size", "3",
    "--beta", "0.3",
    "--items", "48",
    "--trials", "200",
    "--seed", "3",
    "--noise-mode", "disabled",
    "--initial-count", "1000",
    "--target", "4,4",
    "--target-value", "1",
    "--min-count", "50",
    "--workers", "1",
]


def thresholds_flag() -> list[str]:
    return ["--thresholds", ";".join(",".join(str(r) for r in row) for row in hand_database())]


def run_flags(out, *extra) -> list[str]:
    return [
        "run",
        "--mechanism", "deterministic",
        "--adversary", "stop_on_fire",
        "--k", "4",
        "--items", "500",
        "--trials", "3",
        "--workers", "1",
        "--out", str(out),
        *extra,
    ]


def test_zero_trials_is_a_config_error(tmp_path):
    assert main(["run", "--trials", "0", "--out", str(tmp_path)]) == 2


def test_unknown_flag_is_a_config_error():
    assert main(["run", "--bogus", "1"]) == 2


def test_run_writes_one_row_per_trial(tmp_path):
    assert main(run_flags(tmp_path)) == 0
    frame = pd.read_csv(tmp_path / "trials.csv")
    assert len(frame) == 3
    assert list(frame["trial"]) == [0, 1, 2]
    assert set(frame["mechanism"]) == {"deterministic"}
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["trials"] == 3
    assert summary["failures"] == 0


def test_reruns_are_byte_identical(tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    assert main(run_flags(first)) == 0
    assert main(run_flags(second)) == 0
    for name in ("trials.csv", "summary.json"):
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_config_file_values_are_used(tmp_path):
    config = tmp_path / "experiment.cfg"
    config.write_text("# small run\nmechanism=deterministic\nk=3\nitems=300\ntrials=2\n")
    out = tmp_path / "out"
    assert main(["run", "--config", str(config), "--trials", "1", "--workers", "1", "--out", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["k"] == 3
    assert summary["mechanism"] == "deterministic"
    # flags override file values
    assert summary["trials"] == 1


def test_unknown_config_key_is_rejected(tmp_path):
    config = tmp_path / "experiment.cfg"
    config.write_text("k=4\nbogus=1\n")
    assert main(["run", "--config", str(config), "--out", str(tmp_path)]) == 2


def test_missing_config_file_is_rejected(tmp_path):
    assert main(["run", "--config", str(tmp_path / "missing.cfg")]) == 2


def test_audit_refuses_large_k(tmp_path):
    assert main(["audit", "--k", "25", "--out", str(tmp_path)]) == 2


def test_audit_flags_noiseless_tracker(tmp_path):
    assert main(HAND_AUDIT_FLAGS + thresholds_flag() + ["--out", str(tmp_path)]) == 1
    assert "verdict: violation" in (tmp_path / "audit.txt").read_text()


def test_identical_audit_passes(tmp_path):
    assert main(HAND_AUDIT_FLAGS + thresholds_flag() + ["--identical", "--out", str(tmp_path)]) == 0


def test_audit_rejects_malformed_target(tmp_path):
    assert main(["audit", "--target", "4", "--out", str(tmp_path)]) == 2


@pytest.mark.parametrize("mechanisms", ["deterministic", "deterministic,oblivious"])
def test_sweep_writes_one_row_per_configuration(tmp_path, mechanisms):
    flags = ["sweep", "--ks", "2,4", "--mechanisms", mechanisms, "--items", "2000", "--trials", "2"]
    assert main(flags + ["--workers", "1", "--out", str(tmp_path)]) == 0
    frame = pd.read_csv(tmp_path / "sweep.csv")
    assert len(frame) == 2 * len(mechanisms.split(","))
    assert sorted(set(frame["k"])) == [2, 4]


def test_sweep_rejects_unknown_mechanism(tmp_path):
    assert main(["sweep", "--mechanisms", "magic", "--out", str(tmp_path)]) == 2


def test_noiseless_default_audit_exits_with_violation(tmp_path):
    flags = ["audit", "--noise-mode", "disabled", "--trials", "300", "--min-count", "50", "--workers", "1"]
    assert main(flags + ["--out", str(tmp_path)]) == 1
