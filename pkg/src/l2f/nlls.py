"""Bound-constrained nonlinear least squares for multiexponential decays.

Parameters are ordered amplitudes first, then decay constants in ms:
``(A1, ..., AK, T21, ..., T2K)``. In the ``biexp_fixed_t22`` kind the last
decay constant is held at ``fixed_t22`` and dropped from the parameter
vector.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .errors import ConfigurationError

AMP_BOUNDS = (0.0, 1.0)
T2_BOUNDS = (1.0, 300.0)

MODEL_KINDS = {
    "biexp_full": ("A1", "A2", "T21", "T22"),
    "biexp_fixed_t22": ("A1", "A2", "T21"),
}


def param_names(kind):
    try:
        return MODEL_KINDS[kind]
    except KeyError:
        raise ConfigurationError(f"unknown model kind {kind!r}") from None


def default_bounds(kind):
    names = param_names(kind)
    lo = np.array([AMP_BOUNDS[0] if n.startswith("A") else T2_BOUNDS[0] for n in names])
    hi = np.array([AMP_BOUNDS[1] if n.startswith("A") else T2_BOUNDS[1] for n in names])
    return lo, hi


@dataclass
class FitProblem:
    times: np.ndarray
    values: np.ndarray
    model_kind: str = "biexp_full"
    fixed_t22: float = None
    bounds: tuple = None
    initial: np.ndarray = None
    seed: int = 0

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.shape != self.values.shape:
            raise ConfigurationError("times and values differ in shape")
        names = param_names(self.model_kind)
        if self.model_kind == "biexp_fixed_t22" and (self.fixed_t22 is None or self.fixed_t22 <= 0):
            raise ConfigurationError("biexp_fixed_t22 needs a positive fixed_t22")
        if self.bounds is None:
            self.bounds = default_bounds(self.model_kind)
        lo, hi = (np.asarray(b, dtype=float) for b in self.bounds)
        if lo.shape != (len(names),) or hi.shape != lo.shape or np.any(lo > hi):
            raise ConfigurationError(f"bounds must be two length-{len(names)} arrays with lo <= hi")
        self.bounds = (lo, hi)
        if self.initial is None:
            self.initial = random_initial(self.model_kind, self.seed)
        self.initial = np.asarray(self.initial, dtype=float)

    @property
    def names(self):
        return param_names(self.model_kind)


@dataclass
class FitResult:
    params: dict
    residual_norm: float
    iterations: int
    converged: bool
    active_bounds: list = field(default_factory=list)
    initial: dict = field(default_factory=dict)
    clamped_initial: bool = False

    def vector(self):
        return np.array(list(self.params.values()))


def _split(p, prob):
    p = np.asarray(p, dtype=float)
    if prob.model_kind == "biexp_fixed_t22":
        return p[:2], np.array([p[2], prob.fixed_t22])
    k = len(p) // 2
    return p[:k], p[k:]


def model_values(times, amplitudes, t2):
    """``sum_k A_k exp(-t / T2_k)``."""
    times = np.asarray(times, dtype=float)
    return np.exp(-np.outer(times, 1.0 / np.asarray(t2, dtype=float))) @ np.asarray(amplitudes, dtype=float)


def residual_jacobian(p, prob):
    """Residual ``model - data`` and its analytic Jacobian."""
    amps, t2 = _split(p, prob)
    t = prob.times[:, None]
    decay = np.exp(-t / t2)
    r = decay @ amps - prob.values
    d_t2 = amps * t / t2 ** 2 * decay
    if prob.model_kind == "biexp_fixed_t22":
        d_t2 = d_t2[:, :1]
    return r, np.hstack([decay, d_t2])


def random_initial(kind, seed):
    """Amplitudes ~ U(0, 1); decay constants ~ U(0, 300) ms clamped to [1, 300]."""
    names = param_names(kind)
    rng = np.random.default_rng(seed)
    n_amp = sum(n.startswith("A") for n in names)
    amps = rng.uniform(0.0, 1.0, n_amp)
    t2 = np.clip(rng.uniform(0.0, 300.0, len(names) - n_amp), *T2_BOUNDS)
    return np.concatenate([amps, t2])


def solve(prob, max_iter=400, xtol=1e-10, gtol=1e-8):
    """Trust-region-reflective solve on the box ``prob.bounds``.

    The initial point is clamped onto the box first. Accepted steps never
    increase the residual. Non-convergence (iteration budget exhausted) is
    reported through ``converged``, never raised.
    """
    lo, hi = prob.bounds
    x0 = np.clip(prob.initial, lo, hi)
    clamped = not np.array_equal(x0, prob.initial)
    # keep strictly feasible for the reflective scaling
    x0 = np.clip(x0, lo + 1e-10 * (hi - lo), hi - 1e-10 * (hi - lo))
    r0, J0 = residual_jacobian(x0, prob)
    if np.linalg.norm(J0.T @ r0) < gtol * 1e-3:
        x, cost, nfev, converged = x0, float(r0 @ r0), 0, True
    else:
        res = least_squares(
            lambda p: residual_jacobian(p, prob)[0],
            x0,
            jac=lambda p: residual_jacobian(p, prob)[1],
            bounds=(lo, hi),
            method="trf",
            xtol=xtol,
            gtol=gtol,
            ftol=1e-15,
            max_nfev=max_iter,
        )
        x, cost, nfev, converged = res.x, 2 * res.cost, res.nfev, res.status > 0
    names = prob.names
    active = [n for n, v, a, b in zip(names, x, lo, hi) if v <= a + 1e-9 * (b - a) or v >= b - 1e-9 * (b - a)]
    return FitResult(
        params=dict(zip(names, map(float, x))),
        residual_norm=float(np.sqrt(cost)),
        iterations=int(nfev),
        converged=bool(converged),
        active_bounds=active,
        initial=dict(zip(names, map(float, prob.initial))),
        clamped_initial=clamped,
    )
