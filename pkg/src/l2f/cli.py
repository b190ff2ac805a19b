"""Batch command line: ``l2f {simulate,expand,spectrum,experiment}``.

Every command writes its resolved configuration next to its outputs as
``<command>.config.json``. Exit codes: 0 success, 2 invalid configuration,
3 estimation failure, 4 I/O error.
"""

import argparse
import csv
import dataclasses
import json
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, EstimationFailure, L2FError
from .leastsq import error_norms, fit, fourier_of_expansion
from .measures import restrict_to_window
from .pipeline import L2FConfig, estimate_t22, shift_and_weight, t2_to_rate
from .simlab import NoiseSpec, SignalModel, SyntheticSource, batch_to_dict, run_batch, write_records_csv

log = logging.getLogger("l2f")

EXIT_OK, EXIT_CONFIG, EXIT_ESTIMATION, EXIT_IO = 0, 2, 3, 4


@dataclasses.dataclass
class RunConfig:
    model: tuple = (10.0, 50.0, 0.5, 0.5)  # T21, T22, A1, A2
    snr: tuple = (math.inf,)
    realizations: int = 100
    seed: int = 0
    method: str = "both"
    n: int = 32
    m: int = 32
    tau: float = 20.0
    shift_schedule: tuple = None
    shift: float = None
    delta: float = None
    bandwidth: int = 64
    duration: float = 320.0
    samples: int = 64
    jobs: int = 1
    trace: bool = False
    out: str = "l2f_out"

    def signal_model(self):
        t21, t22, a1, a2 = self.model
        return SignalModel.biexp(t21, t22, a1, a2, duration_ms=self.duration, sample_count=self.samples)

    def l2f_config(self):
        schedule = (self.shift,) if self.shift is not None else self.shift_schedule
        return L2FConfig(
            n=self.n, m=self.m, tau=self.tau, shift_schedule=schedule, N=self.bandwidth, delta=self.delta
        )

    def noise(self, snr=None):
        return NoiseSpec(snr=self.snr[0] if snr is None else snr, seed=self.seed, realizations=self.realizations)

    def validate(self):
        if self.method not in ("l2f", "nlls", "both"):
            raise ConfigurationError(f"method must be l2f, nlls or both, got {self.method!r}")
        if len(self.model) != 4:
            raise ConfigurationError("model needs four values T21,T22,A1,A2")
        if self.jobs < 1:
            raise ConfigurationError("jobs must be >= 1")
        model = self.signal_model()
        cfg = self.l2f_config()
        for s in self.snr:
            self.noise(s)
        # shifts must admit the node span
        duration = model.duration_ms / cfg.tau
        for L in cfg.schedule(model.duration_ms):
            restrict_to_window(cfg.measure(), L, duration - L)
        return model, cfg

    def to_dict(self):
        doc = dataclasses.asdict(self)
        doc["snr"] = ["inf" if math.isinf(s) else s for s in self.snr]
        return doc


def _floats(text):
    return tuple(float(v) for v in str(text).split(",") if v.strip())


def _snr_list(value):
    if isinstance(value, (int, float)):
        return (float(value),)
    if isinstance(value, (list, tuple)):
        return tuple(float(v) for v in value)
    return tuple(float(v) for v in str(value).split(","))


COERCE = {
    "model": lambda v: tuple(float(x) for x in v) if isinstance(v, (list, tuple)) else _floats(v),
    "snr": _snr_list,
    "shift_schedule": lambda v: tuple(float(x) for x in v) if isinstance(v, (list, tuple)) else _floats(v),
}


def load_config(path):
    """Read a JSON config whose keys mirror the command-line flags."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config {path} is not valid JSON: {exc}") from None
    fields = {f.name for f in dataclasses.fields(RunConfig)}
    out = {}
    for key, value in doc.items():
        name = key.replace("-", "_")
        if name in fields:
            out[name] = COERCE.get(name, lambda v: v)(value)
        else:
            raise ConfigurationError(f"unknown config key {key!r}")
    return out


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with keys mirroring these flags")
    common.add_argument("--model", help="T21,T22,A1,A2 (ms, ms, -, -)")
    common.add_argument("--snr", help="SNR value(s), comma separated; 'inf' for noiseless")
    common.add_argument("--realizations", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--method", choices=("l2f", "nlls", "both"))
    common.add_argument("--n", type=int)
    common.add_argument("--m", type=int)
    common.add_argument("--tau", type=float, help="ms per dimensionless time unit")
    common.add_argument("--shift-schedule", dest="shift_schedule", help="comma-separated shifts L")
    common.add_argument("--shift", type=float, help="single shift L (overrides the schedule)")
    common.add_argument("--delta", type=float)
    common.add_argument("--bandwidth", type=int)
    common.add_argument("--duration", type=float, help="signal duration in ms")
    common.add_argument("--samples", type=int, help="number of time samples")
    common.add_argument("--jobs", type=int)
    common.add_argument("--trace", action="store_true", default=None)
    common.add_argument("--out")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="l2f", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="write a synthetic decay as CSV")
    sub.add_parser("expand", parents=[common], help="Hermite expansion and its errors")
    sub.add_parser("spectrum", parents=[common], help="filtered spectrum and T22 estimate")
    sub.add_parser("experiment", parents=[common], help="Monte Carlo tables over SNR and method")
    return parser


def resolve(args):
    values = {}
    if args.config:
        values.update(load_config(args.config))
    for f in dataclasses.fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = COERCE.get(f.name, lambda x: x)(v)
    if args.command == "experiment" and "snr" not in values:
        values["snr"] = (math.inf, 1e6, 1e5, 1e4)
    return RunConfig(**values)


def _sidecar(out, command, rc, extra=None):
    doc = {"command": command, "config": rc.to_dict(), "l2f_config": rc.l2f_config().to_dict()}
    if extra:
        doc.update(extra)
    with open(out / f"{command}.config.json", "w") as fh:
        json.dump(doc, fh, indent=2, default=_json_default)


def _json_default(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, float) and math.isinf(v):
        return "inf"
    raise TypeError(type(v))


def cmd_simulate(rc, out):
    model, _ = rc.validate()
    source = SyntheticSource(model, rc.noise(), realization=0)
    with open(out / "signal.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time_ms", "noiseless", "noisy"])
        for row in zip(source.times_ms, source.clean, source.values):
            w.writerow([repr(float(v)) for v in row])
    _sidecar(out, "simulate", rc)
    return {"rows": len(source.times_ms)}


def cmd_expand(rc, out):
    model, cfg = rc.validate()
    source = SyntheticSource(model, rc.noise(), realization=0)
    L = cfg.schedule(model.duration_ms)[0]
    duration = model.duration_ms / cfg.tau
    mu = restrict_to_window(cfg.measure(), L, duration - L)
    e = fit(shift_and_weight(source, mu.nodes, L, cfg.tau, stream=1), mu, cfg.n)
    with open(out / "expansion.json", "w") as fh:
        json.dump({**e.to_dict(), "shift": L, "tau": cfg.tau}, fh, indent=2)

    t = np.linspace(-8, 8, 1601)
    exact = model((t + L) * cfg.tau) * np.exp(-0.5 * t * t)
    approx = e.evaluate(t)
    with open(out / "expansion_error.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "f", "approx", "error"])
        for row in zip(t, exact, approx, exact - approx):
            w.writerow([repr(float(v)) for v in row])

    # Fourier side: F(f)(w) = sum_k a_k exp(lam_k^2/2) exp(i w lam_k) exp(-w^2/2)
    omega = np.linspace(-6, 6, 601)
    rates = t2_to_rate(model.t2_ms, cfg.tau)
    a = np.asarray(model.amplitudes) * np.exp(-L * rates)
    ft_exact = np.exp(-0.5 * omega ** 2) * (np.exp(1j * np.outer(omega, rates)) @ (a * np.exp(0.5 * rates ** 2)))
    ft_approx = fourier_of_expansion(e, omega)
    with open(out / "fourier.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["omega", "re_exact", "im_exact", "re_approx", "im_approx"])
        for row in zip(omega, ft_exact.real, ft_exact.imag, ft_approx.real, ft_approx.imag):
            w.writerow([repr(float(v)) for v in row])

    t_wide = np.linspace(-14, 14, 5601)
    norms = error_norms(model((t_wide + L) * cfg.tau) * np.exp(-0.5 * t_wide ** 2), e, t_wide)
    summary = {"shift": L, "max_abs_error_window": float(np.max(np.abs(exact - approx))), **norms}
    _sidecar(out, "expand", rc, {"summary": summary})
    return summary


def cmd_spectrum(rc, out):
    model, cfg = rc.validate()
    source = SyntheticSource(model, rc.noise(), realization=0)
    trace = estimate_t22(source, cfg)
    rec = trace.records[trace.chosen_shift]
    rec.spectrum.to_csv(out / "spectrum.csv")
    slow_rate = float(t2_to_rate(max(model.t2_ms), cfg.tau))
    annotation = {
        "shift": rec.L,
        "x_star": rec.x_star,
        "height": rec.height,
        "rate": rec.rate,
        "t22": rec.t22,
        "x_theory": slow_rate * cfg.step,
        "delta": cfg.step,
        "rule": trace.rule,
    }
    with open(out / "peak.json", "w") as fh:
        json.dump(annotation, fh, indent=2)
    if rc.trace:
        with open(out / "trace.json", "w") as fh:
            json.dump(trace.to_dict(), fh, indent=2, default=_json_default)
    _sidecar(out, "spectrum", rc, {"peak": annotation})
    return annotation


def cmd_experiment(rc, out):
    model, cfg = rc.validate()
    methods = ("l2f", "nlls") if rc.method == "both" else (rc.method,)
    rows, batches = [], []
    for method in methods:
        for snr in rc.snr:
            batch = run_batch(model, rc.noise(snr), method, cfg, jobs=rc.jobs)
            tag = f"{method}_snr{'inf' if math.isinf(snr) else f'{snr:g}'}"
            write_records_csv(out / f"records_{tag}.csv", batch)
            batches.append(batch_to_dict(batch))
            row = {"method": method, "snr": "inf" if math.isinf(snr) else snr}
            for r in batch.stats.rows():
                for stat in ("mean", "stdev", "rmse"):
                    row[f"{r['param']}_{stat}"] = r[stat]
            row.update(
                n_ok=batch.stats.n_ok,
                failures=batch.stats.failure_count,
                nonconverged=batch.stats.nonconverged,
                wall_time_s=round(batch.wall_time, 3),
            )
            rows.append(row)
            log.info("%s snr=%s done in %.1fs", method, snr, batch.wall_time)
    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
    with open(out / "summary.json", "w") as fh:
        json.dump(batches, fh, indent=2, default=_json_default)
    _sidecar(out, "experiment", rc)
    return {"cells": len(batches)}


COMMANDS = {
    "simulate": cmd_simulate,
    "expand": cmd_expand,
    "spectrum": cmd_spectrum,
    "experiment": cmd_experiment,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        rc = resolve(args)
    except (ConfigurationError, ValueError, TypeError) as exc:
        print(json.dumps({"error": "validation", "reason": str(exc)}), file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(json.dumps({"error": "io", "reason": str(exc)}), file=sys.stderr)
        return EXIT_IO
    out = Path(rc.out)
    t0 = time.perf_counter()
    try:
        out.mkdir(parents=True, exist_ok=True)
        summary = COMMANDS[args.command](rc, out)
    except EstimationFailure as exc:
        print(json.dumps({"error": "estimation", "reason": str(exc)}), file=sys.stderr)
        return EXIT_ESTIMATION
    except (ConfigurationError, L2FError, ValueError) as exc:
        print(json.dumps({"error": "validation", "reason": str(exc)}), file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(json.dumps({"error": "io", "reason": str(exc)}), file=sys.stderr)
        return EXIT_IO
    print(json.dumps({"command": args.command, "out": str(out), "seconds": round(time.perf_counter() - t0, 3), **summary}, default=_json_default))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
