"""Rate estimation from samples of a Fourier transform of point masses.

Sampling ``F(mu')(omega) = sum_k b_k exp(-i omega lambda_k)`` at
``omega = j * delta`` gives the Fourier coefficients of a periodic measure
with atoms at ``omega_k = lambda_k * delta``. A smoothly filtered partial
Fourier sum of those coefficients has sharply localised peaks near the
atoms, free of the sidelobes of the plain partial sum.
"""

import csv
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ConfigurationError, NoPeakError

TWO_PI = 2 * np.pi
DEFAULT_GRID_SIZE = 4096


def _smooth_step(u):
    # C-infinity transition from 0 (u <= 0) to 1 (u >= 1)
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(u > 0, np.exp(-1.0 / np.where(u > 0, u, 1.0)), 0.0)
        v = 1.0 - u
        b = np.where(v > 0, np.exp(-1.0 / np.where(v > 0, v, 1.0)), 0.0)
    return a / (a + b)


def bump(t, plateau=1.0):
    """Even C-infinity low-pass profile: ``plateau`` on ``|t| <= 1/2``, zero for ``|t| >= 1``."""
    t = np.abs(np.asarray(t, dtype=float))
    return plateau * _smooth_step((1.0 - t) / 0.5)


@dataclass(frozen=True)
class LowpassFilter:
    N: int
    plateau: float = 1.0

    def __post_init__(self):
        if self.N < 2:
            raise ConfigurationError(f"bandwidth N must be >= 2, got {self.N}")

    @property
    def orders(self):
        return np.arange(-self.N + 1, self.N)

    def weights(self):
        """``h(|l| / N)`` for ``l = -N+1 .. N-1``."""
        return bump(np.abs(self.orders) / self.N, self.plateau)

    def kernel(self, t):
        """``Phi_N(t) = sum_l h(|l|/N) exp(i l t)`` (real, even)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        ell = np.arange(1, self.N)
        h = bump(ell / self.N, self.plateau)
        return bump(0.0, self.plateau) + 2 * np.cos(np.outer(t, ell)) @ h


@dataclass
class SpectrumEstimate:
    mu_hat: np.ndarray
    delta: float
    N: int
    x_grid: np.ndarray = field(repr=False)
    abs_sigma: np.ndarray = field(repr=False)
    peaks: list = field(default_factory=list)

    def to_csv(self, path):
        write_spectrum_csv(path, self.x_grid, self.abs_sigma)


def default_grid(size=DEFAULT_GRID_SIZE):
    """``size`` equispaced points covering ``[0, 2 pi)``."""
    return TWO_PI * np.arange(size) / size


def demodulated_samples(e, delta, N, omega_max=6.0):
    """``mu_hat(j) = exp((j delta)^2 / 2) * F(S_n)(-j delta)`` for ``|j| < N``.

    The Gaussian factor undoes the ``exp(-t^2/2)`` weighting of the signal,
    turning the transform into a sum of pure phases carried by the rates.
    """
    if delta <= 0:
        raise ConfigurationError(f"delta must be positive, got {delta}")
    if delta * (N - 1) > omega_max * (1 + 1e-12):
        raise ConfigurationError(
            f"delta*(N-1) = {delta * (N - 1):.4g} exceeds the trusted frequency range {omega_max}"
        )
    omega = delta * np.arange(-N + 1, N)
    return np.exp(0.5 * omega ** 2) * e.fourier(-omega)


@lru_cache(maxsize=8)
def _phase_matrix(N, grid_key):
    x = np.frombuffer(grid_key)
    return np.exp(1j * np.outer(x, np.arange(-N + 1, N)))


def sigma_complex(mu_hat, N, x_grid, filt=None):
    """``sigma_N(x) = sum_{|l|<N} h(|l|/N) mu_hat(l) exp(i l x)``."""
    mu_hat = np.asarray(mu_hat)
    if mu_hat.shape != (2 * N - 1,):
        raise ConfigurationError(f"mu_hat must have length 2N-1 = {2 * N - 1}, got {mu_hat.size}")
    filt = LowpassFilter(N) if filt is None else filt
    x = np.ascontiguousarray(np.atleast_1d(x_grid), dtype=float)
    return _phase_matrix(N, x.tobytes()) @ (filt.weights() * mu_hat)


def sigma_sum(mu_hat, N, x_grid, filt=None):
    """Modulus of the filtered Fourier sum on ``x_grid``."""
    return np.abs(sigma_complex(mu_hat, N, x_grid, filt))


def _is_periodic(x):
    if x.size < 3:
        return False
    h = x[1] - x[0]
    return np.allclose(np.diff(x), h, rtol=1e-9, atol=1e-12) and abs(x[-1] + h - x[0] - TWO_PI) < 1e-9


def local_maxima(values, periodic=False):
    """Indices of strict-left/weak-right local maxima, highest first."""
    v = np.asarray(values)
    if periodic:
        left, right = np.roll(v, 1), np.roll(v, -1)
        idx = np.flatnonzero((v > left) & (v >= right))
    else:
        padded = np.concatenate(([-np.inf], v, [-np.inf]))
        idx = np.flatnonzero((v > padded[:-2]) & (v >= padded[2:]))
    return idx[np.argsort(-v[idx], kind="stable")]


def detect_peak(sigma, x_grid, refine=True, window=None):
    """Location and height of the largest value of ``|sigma_N|``.

    Ties go to the smaller ``x``. With ``refine`` a parabola through the grid
    maximum and its two neighbours gives a sub-grid location; a grid covering
    ``[0, 2 pi)`` uniformly is treated as periodic. ``window=(lo, hi)``
    restricts the search.
    """
    sigma = np.asarray(sigma, dtype=float)
    x = np.asarray(x_grid, dtype=float)
    if sigma.size == 0:
        raise ConfigurationError("empty grid")
    mask = np.ones(x.size, bool) if window is None else (x >= window[0]) & (x <= window[1])
    if not mask.any():
        raise ConfigurationError(f"no grid points inside window {window}")
    if not np.any(sigma[mask] > 0):
        raise NoPeakError("filtered spectrum is identically zero")
    cand = np.flatnonzero(mask)
    # argmax returns the first maximum: smallest x on an ascending grid
    i = int(cand[np.argmax(sigma[cand])])
    x_star, height = float(x[i]), float(sigma[i])
    if not refine:
        return x_star, height
    periodic = _is_periodic(x)
    if periodic:
        lo, hi = (i - 1) % x.size, (i + 1) % x.size
    elif 0 < i < x.size - 1:
        lo, hi = i - 1, i + 1
    else:
        return x_star, height
    y0, ym, yp = sigma[i], sigma[lo], sigma[hi]
    denom = ym - 2 * y0 + yp
    if denom >= 0:
        return x_star, height
    p = 0.5 * (ym - yp) / denom
    step = x[1] - x[0] if periodic else 0.5 * (x[hi] - x[lo])
    return x_star + p * step, float(y0 - 0.25 * (ym - yp) * p)


def rate_from_peak(x_star, delta):
    if delta <= 0:
        raise ConfigurationError(f"delta must be positive, got {delta}")
    return x_star / delta


def peak_contrast(sigma, x_grid, window=None):
    """Ratio of the highest to the second-highest local maximum (inf if unique)."""
    sigma = np.asarray(sigma)
    x = np.asarray(x_grid)
    idx = local_maxima(sigma, periodic=_is_periodic(x))
    if window is not None:
        idx = idx[(x[idx] >= window[0]) & (x[idx] <= window[1])]
    if idx.size == 0 or sigma[idx[0]] == 0:
        return 0.0
    if idx.size == 1 or sigma[idx[1]] == 0:
        return np.inf
    return float(sigma[idx[0]] / sigma[idx[1]])


def estimate_spectrum(e, delta, N, x_grid=None, omega_max=6.0, window=None, refine=True, filt=None):
    """Demodulate, filter and locate the dominant peak of one expansion."""
    x_grid = default_grid() if x_grid is None else np.asarray(x_grid, dtype=float)
    mu_hat = demodulated_samples(e, delta, N, omega_max)
    abs_sigma = sigma_sum(mu_hat, N, x_grid, filt)
    est = SpectrumEstimate(mu_hat=mu_hat, delta=delta, N=N, x_grid=x_grid, abs_sigma=abs_sigma)
    est.peaks.append(detect_peak(abs_sigma, x_grid, refine=refine, window=window))
    return est


def write_spectrum_csv(path, x_grid, abs_sigma):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "abs_sigma"])
        for xv, sv in zip(x_grid, abs_sigma):
            w.writerow([repr(float(xv)), repr(float(sv))])
