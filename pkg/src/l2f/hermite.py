"""Orthonormal Hermite functions and Gauss-Hermite quadrature.

The Hermite functions ``psi_k(x) = H_k(x) exp(-x^2/2) / sqrt(sqrt(pi) 2^k k!)``
form an orthonormal basis of L^2(R) and are eigenfunctions of the unitary
Fourier transform with eigenvalue ``(-i)^k``.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import gammaln

from .errors import ConfigurationError, DomainError, NumericError

PI_QUARTER = np.pi ** -0.25
MAX_GAUSS_ORDER = 512


@dataclass(frozen=True)
class HermiteBasis:
    """The span of ``psi_0, ..., psi_{max_degree-1}``."""

    max_degree: int

    def __post_init__(self):
        if self.max_degree < 1:
            raise ConfigurationError(f"max_degree must be >= 1, got {self.max_degree}")

    def __call__(self, xs):
        return eval_psi_batch(self.max_degree, xs)

    def evaluate(self, coeffs, xs):
        """Evaluate ``sum_k coeffs[k] psi_k`` at ``xs``."""
        coeffs = np.asarray(coeffs)
        return coeffs @ eval_psi_batch(len(coeffs), xs)


@dataclass(frozen=True)
class GaussRule:
    """Gauss quadrature for the Hermite functions.

    ``weights`` are the Christoffel numbers rescaled so that
    ``sum(w * P(x)**2) == integral(P**2)`` for every weighted polynomial
    ``P`` of degree < order.
    """

    order: int
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def total_variation(self):
        return float(np.sum(self.weights))


def eval_psi_batch(k_max, xs):
    """Rows ``psi_0 .. psi_{k_max-1}`` evaluated on ``xs``.

    Uses the three-term recurrence with the Gaussian factor already folded
    into the seed, so no factorials or large polynomial values appear.

    Returns an array of shape ``(k_max, len(xs))``.
    """
    if k_max < 1:
        raise DomainError(f"k_max must be >= 1, got {k_max}")
    x = np.atleast_1d(np.asarray(xs, dtype=float))
    out = np.empty((k_max, x.size))
    out[0] = PI_QUARTER * np.exp(-0.5 * x * x)
    if k_max > 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for k in range(1, k_max - 1):
        out[k + 1] = np.sqrt(2.0 / (k + 1)) * x * out[k] - np.sqrt(k / (k + 1)) * out[k - 1]
    return out


def eval_psi(k, x):
    """``psi_k(x)`` for a single degree; ``x`` may be scalar or array."""
    if k < 0:
        raise DomainError(f"Hermite degree must be non-negative, got {k}")
    vals = eval_psi_batch(k + 1, x)[k]
    return float(vals[0]) if np.ndim(x) == 0 else vals


def _psi_pair(m, x):
    # psi_{m-1}, psi_m at x, needed for Newton polishing
    rows = eval_psi_batch(m + 1, x)
    return rows[m - 1], rows[m]


def gauss_rule(m, polish_steps=3):
    """Nodes (zeros of ``psi_m``, descending) and weights of order ``m``.

    Nodes come from the symmetric Jacobi matrix of the physicists' Hermite
    recurrence (Golub-Welsch) followed by a few Newton steps on ``psi_m``.
    """
    if not 1 <= m <= MAX_GAUSS_ORDER:
        raise ConfigurationError(f"Gauss order must lie in [1, {MAX_GAUSS_ORDER}], got {m}")
    if m == 1:
        nodes = np.zeros(1)
    else:
        off = np.sqrt(np.arange(1, m) / 2.0)
        nodes = eigh_tridiagonal(np.zeros(m), off, eigvals_only=True)
        for _ in range(polish_steps):
            prev, cur = _psi_pair(m, nodes)
            # psi_m'(x) = sqrt(2m) psi_{m-1}(x) - x psi_m(x)
            deriv = np.sqrt(2.0 * m) * prev - nodes * cur
            nodes = nodes - cur / deriv
        nodes = np.sort(nodes)[::-1]
        nodes = 0.5 * (nodes - nodes[::-1])
        prev, cur = _psi_pair(m, nodes)
        scale = np.abs(prev) * np.sqrt(2.0 * m)
        bad = np.flatnonzero(~np.isfinite(nodes) | (np.abs(cur) > 1e-10 * np.maximum(scale, 1e-300)))
        if bad.size:
            raise NumericError(f"Gauss node {bad[0]} of order {m} failed to converge", index=int(bad[0]))
        if np.any(np.diff(nodes) >= 0):
            raise NumericError(f"Gauss nodes of order {m} are not strictly decreasing")
    # Christoffel function of the orthonormal system; w = lambda * exp(x^2)
    weights = 1.0 / np.sum(eval_psi_batch(m, nodes) ** 2, axis=0)
    return GaussRule(order=m, nodes=nodes, weights=weights)


def glambda_coefficients(lam, n):
    """Exact Hermite coefficients of ``g(x) = exp(-lam x - x^2/2)``.

    From the Hermite generating function,
    ``c_k = pi^(1/4) exp(lam^2/4) (-lam)^k / (2^(k/2) sqrt(k!))``,
    evaluated in log space.
    """
    if lam < 0:
        raise DomainError(f"rate must be non-negative, got {lam}")
    k = np.arange(n)
    if lam == 0:
        out = np.zeros(n)
        if n:
            out[0] = np.pi ** 0.25
        return out
    log_mag = 0.25 * np.log(np.pi) + lam * lam / 4 + k * np.log(lam) - 0.5 * k * np.log(2.0) - 0.5 * gammaln(k + 1)
    return np.where(k % 2 == 0, 1.0, -1.0) * np.exp(log_mag)
