"""Synthetic decays, calibrated noise and Monte Carlo batches."""

import csv
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, EstimationFailure
from .hermite import eval_psi_batch
from .leastsq import HermiteExpansion, fourier_of_expansion
from .measures import gauss_measure
from .nlls import model_values
from .pipeline import L2FConfig, run_l2f, run_nlls_baseline

log = logging.getLogger(__name__)

PARAMS = ("A1", "A2", "T21", "T22")


@dataclass(frozen=True)
class SignalModel:
    amplitudes: tuple
    t2_ms: tuple
    duration_ms: float = 320.0
    sample_count: int = 64

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=float)
        t2 = np.asarray(self.t2_ms, dtype=float)
        if amps.shape != t2.shape or amps.ndim != 1 or amps.size == 0:
            raise ConfigurationError("amplitudes and t2_ms must be equal-length, non-empty")
        if np.any(t2 <= 0):
            raise ConfigurationError("decay constants must be positive")
        if np.any(amps < 0):
            raise ConfigurationError("amplitudes must be non-negative")
        if self.duration_ms <= 0 or self.sample_count < 2:
            raise ConfigurationError("need positive duration and at least two samples")
        order = np.argsort(t2, kind="stable")
        object.__setattr__(self, "amplitudes", tuple(map(float, amps[order])))
        object.__setattr__(self, "t2_ms", tuple(map(float, t2[order])))

    @classmethod
    def biexp(cls, t21, t22, a1=0.5, a2=0.5, **kw):
        return cls(amplitudes=(a1, a2), t2_ms=(t21, t22), **kw)

    @property
    def K(self):
        return len(self.amplitudes)

    @property
    def times(self):
        return np.linspace(0.0, self.duration_ms, self.sample_count)

    def __call__(self, t_ms):
        return model_values(t_ms, self.amplitudes, self.t2_ms)

    def truth(self):
        """Ground truth in the reporting order ``(A1, A2, T21, T22)``."""
        if self.K != 2:
            raise ConfigurationError("truth() is defined for biexponential models")
        return dict(zip(PARAMS, self.amplitudes + self.t2_ms))


@dataclass(frozen=True)
class NoiseSpec:
    snr: float = np.inf
    seed: int = 0
    realizations: int = 100

    def __post_init__(self):
        if not self.snr > 0:
            raise ConfigurationError(f"snr must be positive, got {self.snr}")
        if self.realizations < 1:
            raise ConfigurationError("need at least one realization")

    @property
    def noiseless(self):
        return np.isinf(self.snr)


def synth(model):
    """Noiseless samples on the model's equispaced time grid."""
    return model(model.times)


def _rng(seed, index, stream):
    return np.random.default_rng(np.random.SeedSequence([seed, index, stream]))


def add_noise(samples, spec, realization_index, stream=0, peak=None):
    """Add i.i.d. Gaussian noise with std ``peak / snr``.

    ``peak`` defaults to the initial sample. Draws are fixed by
    ``(seed, realization_index, stream)``.
    """
    if not spec.snr > 0:
        raise ConfigurationError(f"snr must be positive, got {spec.snr}")
    samples = np.asarray(samples, dtype=float)
    if spec.noiseless:
        return samples.copy()
    peak = samples[0] if peak is None else peak
    sd = peak / spec.snr
    return samples + sd * _rng(spec.seed, realization_index, stream).standard_normal(samples.shape)


class SyntheticSource:
    """Exact model plus i.i.d. noise, evaluable anywhere in the window.

    The sample grid carries noise stream 0. Off-grid evaluations (the
    quadrature nodes of one shift) use their own stream, so each call sees
    independent noise of the same level.
    """

    def __init__(self, model, spec=NoiseSpec(), realization=0):
        self.model = model
        self.spec = spec
        self.realization = realization
        self.times_ms = model.times
        self.clean = synth(model)
        self.peak = float(self.clean[0])
        self.values = add_noise(self.clean, spec, realization, stream=0)

    @property
    def duration_ms(self):
        return self.model.duration_ms

    def samples(self):
        return self.times_ms, self.values

    def at_times(self, t_ms, stream=0):
        clean = self.model(t_ms)
        if stream == 0 or self.spec.noiseless:
            return clean
        return add_noise(clean, self.spec, self.realization, stream=stream, peak=self.peak)


@dataclass
class BatchStats:
    mean: dict
    stdev: dict
    rmse: dict
    bias: dict
    n_ok: int
    failure_count: int
    nonconverged: int = 0

    def rows(self):
        return [
            {"param": p, "mean": self.mean[p], "stdev": self.stdev[p], "rmse": self.rmse[p], "bias": self.bias[p]}
            for p in self.mean
        ]


@dataclass
class BatchResult:
    model: SignalModel
    spec: NoiseSpec
    method: str
    stats: BatchStats
    records: list = field(repr=False)
    wall_time: float = 0.0


def summarize(estimates, truth, failures=0, nonconverged=0):
    """Mean, sample StDev (ddof=1), bias and RMSE against ``truth``."""
    mean, sd, rmse, bias = {}, {}, {}, {}
    for p, true in truth.items():
        v = np.array([e[p] for e in estimates], dtype=float)
        if v.size == 0:
            mean[p] = sd[p] = rmse[p] = bias[p] = float("nan")
            continue
        # centre on the first value so identical estimates give StDev exactly 0
        dev = v - v[0]
        mean[p] = float(v[0] + dev.mean())
        sd[p] = float(np.sqrt(np.sum((dev - dev.mean()) ** 2) / (v.size - 1))) if v.size > 1 else 0.0
        bias[p] = mean[p] - true
        rmse[p] = float(np.sqrt(np.mean((v - true) ** 2)))
    return BatchStats(mean, sd, rmse, bias, n_ok=len(estimates), failure_count=failures, nonconverged=nonconverged)


def _one(args):
    model, spec, method, cfg, i = args
    source = SyntheticSource(model, spec, i)
    seed = spec.seed + i
    runner = run_l2f if method == "l2f" else run_nlls_baseline
    try:
        res = runner(source, cfg, seed=seed, realization=i)
    except EstimationFailure as exc:
        return {"realization": i, "seed": seed, "failed": True, "reason": str(exc)}
    return {
        "realization": i,
        "seed": seed,
        "failed": False,
        "converged": res.converged,
        "shift": res.shift,
        **res.params,
    }


def run_batch(model, spec, method="l2f", cfg=L2FConfig(), jobs=1):
    """``spec.realizations`` independent estimates and their summary.

    Realization ``i`` uses noise seeded by ``(spec.seed, i)`` and NLLS
    initial guesses seeded by ``spec.seed + i``, so the result does not
    depend on ``jobs``.
    """
    if method not in ("l2f", "nlls"):
        raise ConfigurationError(f"method must be l2f or nlls, got {method!r}")
    tasks = [(model, spec, method, cfg, i) for i in range(spec.realizations)]
    t0 = time.perf_counter()
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_one, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        records = [_one(t) for t in tasks]
    ok = [r for r in records if not r["failed"]]
    stats = summarize(
        ok,
        model.truth(),
        failures=len(records) - len(ok),
        nonconverged=sum(not r["converged"] for r in ok),
    )
    return BatchResult(model, spec, method, stats, records, wall_time=time.perf_counter() - t0)


def write_records_csv(path, batch):
    cols = ["realization", "seed", "failed", "converged", "shift", *PARAMS]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols, extrasaction="ignore")
        w.writeheader()
        for r in batch.records:
            w.writerow(r)


def batch_to_dict(batch):
    return {
        "method": batch.method,
        "snr": None if batch.spec.noiseless else batch.spec.snr,
        "realizations": batch.spec.realizations,
        "seed": batch.spec.seed,
        "truth": batch.model.truth(),
        "stats": {row["param"]: row for row in batch.stats.rows()},
        "n_ok": batch.stats.n_ok,
        "failure_count": batch.stats.failure_count,
        "nonconverged": batch.stats.nonconverged,
        "wall_time": batch.wall_time,
    }


def write_batch_json(path, batch):
    with open(path, "w") as fh:
        json.dump(batch_to_dict(batch), fh, indent=2)


def check_degree_condition(m, n, C=4.0, c=1.0):
    """``C sqrt(m) >= 2n >= c log m``; raises on violation."""
    if not (C * np.sqrt(m) >= 2 * n >= c * np.log(m)):
        raise ConfigurationError(
            f"degree condition violated: need {C}*sqrt({m}) >= 2*{n} >= {c}*log({m})"
        )


def averaged_noise_functional(m, n, S, M_values, repetitions=50, seed=0, omegas=None, C=4.0, c=1.0):
    """Median sup-norm of the Fourier transform of averaged pure-noise fits.

    For each ``M`` draws ``M`` vectors of uniform noise on ``[-S, S]`` at
    the Gauss nodes, fits each, averages the coefficient vectors and takes
    ``max |F(average)|`` over ``omegas`` (default 241 points on ``[-6, 6]``).
    Returns ``{M: median over repetitions}``.
    """
    check_degree_condition(m, n, C, c)
    mu = gauss_measure(m)
    omegas = np.linspace(-6, 6, 241) if omegas is None else np.asarray(omegas)
    psi = eval_psi_batch(n, mu.nodes)
    rng = np.random.default_rng(seed)
    table = {}
    for M in M_values:
        sups = np.empty(repetitions)
        for r in range(repetitions):
            noise = rng.uniform(-S, S, (M, len(mu.nodes)))
            coeffs = (psi @ (mu.weights * noise).T).mean(axis=1)
            e = HermiteExpansion(coeffs=coeffs, n=n, m=m)
            sups[r] = np.max(np.abs(fourier_of_expansion(e, omegas)))
        table[M] = float(np.median(sups))
    return table
