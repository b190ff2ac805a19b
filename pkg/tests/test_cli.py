import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from l2f.cli import load_config, main
from l2f.errors import ConfigurationError
from l2f.leastsq import fit
from l2f.measures import restrict_to_window
from l2f.pipeline import L2FConfig, shift_and_weight
from l2f.simlab import NoiseSpec, SignalModel, SyntheticSource


def run(tmp_path, *args):
    return main([*args, "--out", str(tmp_path)])


def test_simulate_default(tmp_path):
    assert run(tmp_path, "simulate") == 0
    rows = list(csv.DictReader(open(tmp_path / "signal.csv")))
    assert len(rows) == 64
    assert float(rows[0]["noiseless"]) == 1.0
    assert all(r["noiseless"] == r["noisy"] for r in rows)
    side = json.load(open(tmp_path / "simulate.config.json"))
    assert side["config"]["model"] == [10.0, 50.0, 0.5, 0.5]


def test_simulate_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(a, "simulate", "--snr", "1e3", "--seed", "7") == 0
    assert run(b, "simulate", "--snr", "1e3", "--seed", "7") == 0
    assert (a / "signal.csv").read_bytes() == (b / "signal.csv").read_bytes()
    rows = list(csv.DictReader(open(a / "signal.csv")))
    assert any(r["noiseless"] != r["noisy"] for r in rows)


def test_expand_matches_library(tmp_path):
    assert run(tmp_path, "expand") == 0
    doc = json.load(open(tmp_path / "expansion.json"))
    cfg = L2FConfig()
    src = SyntheticSource(SignalModel.biexp(10, 50), NoiseSpec())
    L = cfg.schedule(320.0)[0]
    mu = restrict_to_window(cfg.measure(), L, 16 - L)
    e = fit(shift_and_weight(src, mu.nodes, L, cfg.tau, stream=1), mu, cfg.n)
    assert doc["coeffs"] == e.coeffs.tolist()
    summary = json.load(open(tmp_path / "expand.config.json"))["summary"]
    assert summary["max_abs_error_window"] < 1e-6
    assert (tmp_path / "fourier.csv").exists() and (tmp_path / "expansion_error.csv").exists()


def test_expand_rejects_zero_degree(tmp_path):
    assert run(tmp_path, "expand", "--n", "0") == 2


def test_spectrum_outputs_and_shift_override(tmp_path):
    assert run(tmp_path, "spectrum", "--shift", "8.0", "--trace") == 0
    peak = json.load(open(tmp_path / "peak.json"))
    assert peak["shift"] == 8.0
    assert abs(peak["t22"] - 50.0) < 1.0
    trace = json.load(open(tmp_path / "trace.json"))
    assert [s["L"] for s in trace["shifts"]] == [8.0]
    rows = list(csv.reader(open(tmp_path / "spectrum.csv")))
    assert rows[0] == ["x", "abs_sigma"]


def test_spectrum_zero_signal_exit_code(tmp_path, capsys):
    assert run(tmp_path, "spectrum", "--model", "10,50,0,0") == 3
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["error"] == "estimation"


def test_infeasible_shift_is_validation_error(tmp_path):
    assert run(tmp_path, "spectrum", "--shift", "2.0") == 2


def test_experiment_shape(tmp_path):
    assert run(tmp_path, "experiment", "--model", "40,60,0.5,0.5", "--realizations", "3") == 0
    rows = list(csv.DictReader(open(tmp_path / "summary.csv")))
    assert len(rows) == 8
    assert {r["method"] for r in rows} == {"l2f", "nlls"}
    noiseless = next(r for r in rows if r["method"] == "l2f" and r["snr"] == "inf")
    assert float(noiseless["T22_stdev"]) == 0.0
    assert len(list(tmp_path.glob("records_*.csv"))) == 8


def test_config_file(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"model": [40, 60, 0.5, 0.5], "snr": "1e4", "shift-schedule": [8.0], "seed": 3}))
    loaded = load_config(cfg)
    assert loaded["model"] == (40.0, 60.0, 0.5, 0.5)
    assert loaded["shift_schedule"] == (8.0,)
    assert run(tmp_path / "o", "simulate", "--config", str(cfg)) == 0
    side = json.load(open(tmp_path / "o" / "simulate.config.json"))
    assert side["config"]["seed"] == 3


def test_config_unknown_key(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"modle": [1, 2, 3, 4]}))
    with pytest.raises(ConfigurationError):
        load_config(cfg)
    assert run(tmp_path, "simulate", "--config", str(cfg)) == 2


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["simulate", "--out", str(blocker / "sub")]) == 4


def test_console_entry_point(tmp_path):
    out = subprocess.run(
        [sys.executable, "-m", "l2f.cli", "simulate", "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert out.returncode == 0
    assert json.loads(out.stdout)["rows"] == 64
