"""Discrete least-squares projection onto weighted polynomials.

Given samples of ``f`` on the support of a positive measure ``nu``, the
projection ``S_n(nu; f) = sum_k d_k psi_k`` minimises
``sum_j w_j |f(x_j) - P(x_j)|^2`` over ``P`` in ``Pi_n``. Its Fourier
transform is available in closed form because ``F(psi_k) = (-i)^k psi_k``.
"""

import json
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve, cholesky

from .errors import ConfigurationError, NumericError, ShapeError
from .hermite import eval_psi_batch

log = logging.getLogger(__name__)

COND_WARN = 1e6


@dataclass(frozen=True)
class GramSystem:
    gram: np.ndarray
    chol: np.ndarray  # lower-triangular factor of gram itself
    cond_estimate: float

    def solve(self, rhs):
        return cho_solve((self.chol, True), rhs)


@dataclass(frozen=True)
class HermiteExpansion:
    coeffs: np.ndarray
    n: int
    m: int = 0
    measure_kind: str = "gauss"
    window: tuple = field(default=None, compare=False)

    def evaluate(self, x):
        return np.asarray(self.coeffs) @ eval_psi_batch(self.n, x)

    def fourier(self, omegas):
        return fourier_of_expansion(self, omegas)

    @property
    def l2_norm(self):
        return float(np.linalg.norm(self.coeffs))

    def to_dict(self):
        coeffs = np.asarray(self.coeffs)
        doc = {"n": self.n, "m": self.m, "measure_kind": self.measure_kind}
        if np.iscomplexobj(coeffs):
            doc["coeffs"] = coeffs.real.tolist()
            doc["coeffs_imag"] = coeffs.imag.tolist()
        else:
            doc["coeffs"] = coeffs.tolist()
        if self.window is not None:
            doc["window"] = list(self.window)
        return doc

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, doc):
        coeffs = np.asarray(doc["coeffs"], dtype=float)
        if "coeffs_imag" in doc:
            coeffs = coeffs + 1j * np.asarray(doc["coeffs_imag"], dtype=float)
        window = tuple(doc["window"]) if doc.get("window") is not None else None
        return cls(coeffs=coeffs, n=int(doc["n"]), m=int(doc["m"]), measure_kind=doc["measure_kind"], window=window)


def _check_degree(mu, n):
    if n < 1:
        raise ConfigurationError(f"degree n must be >= 1, got {n}")
    if n > mu.order:
        raise ConfigurationError(f"degree n={n} exceeds measure order m={mu.order}")


def build_gram(mu, n):
    """Gram matrix ``G[l, k] = sum_j w_j psi_l(x_j) psi_k(x_j)`` and its Cholesky factor."""
    _check_degree(mu, n)
    psi = eval_psi_batch(n, mu.nodes)
    gram = (psi * mu.weights) @ psi.T
    gram = 0.5 * (gram + gram.T)
    try:
        chol = cholesky(gram, lower=True)
    except np.linalg.LinAlgError:
        eig = np.linalg.eigvalsh(gram)
        cond = float(eig[-1] / eig[0]) if eig[0] > 0 else np.inf
        raise NumericError(f"Gram matrix of order {n} is not positive definite", cond_estimate=cond) from None
    diag = np.diag(chol)
    cond = float((diag.max() / diag.min()) ** 2)
    if cond > COND_WARN:
        log.warning("Gram matrix poorly conditioned: cond ~ %.3g", cond)
    return GramSystem(gram=gram, chol=chol, cond_estimate=cond)


def raw_coefficients(f_samples, mu, n):
    """``f_hat(nu; l) = sum_j w_j f(x_j) psi_l(x_j)`` for ``l < n``."""
    f_samples = np.asarray(f_samples)
    if f_samples.shape != np.shape(mu.nodes):
        raise ShapeError(f"{f_samples.size} samples for {len(mu.nodes)} nodes")
    _check_degree(mu, n)
    return eval_psi_batch(n, mu.nodes) @ (mu.weights * f_samples)


def fit(f_samples, mu, n, gram=None):
    """Least-squares projection of the samples onto ``Pi_n``.

    For the Gauss measure the Gram matrix is the identity and the raw
    coefficients are returned directly; otherwise ``G d = f_hat`` is solved
    through the Cholesky factor of ``G``. Pass a prebuilt ``gram`` to share
    one factorisation across many fits.
    """
    rhs = raw_coefficients(f_samples, mu, n)
    if mu.kind == "gauss":
        coeffs = rhs
    else:
        gram = build_gram(mu, n) if gram is None else gram
        coeffs = gram.solve(rhs)
    return HermiteExpansion(coeffs=coeffs, n=n, m=mu.order, measure_kind=mu.kind, window=mu.window)


def fourier_of_expansion(e, omegas):
    """``F(S_n)(omega) = sum_k d_k (-i)^k psi_k(omega)``."""
    phases = np.array([1, -1j, -1, 1j])[np.arange(e.n) % 4]
    return (np.asarray(e.coeffs) * phases) @ eval_psi_batch(e.n, omegas)


def error_norms(f_fine, e, grid):
    """Trapezoid L1 norm and max norm of ``f - S_n`` on a uniform grid."""
    grid = np.asarray(grid, dtype=float)
    if grid.size < 2:
        raise ConfigurationError("error grid needs at least two points")
    need = 2 * np.sqrt(e.n) + 2
    if grid[0] > -need or grid[-1] < need:
        raise ConfigurationError(f"grid [{grid[0]:.4g}, {grid[-1]:.4g}] must span [-{need:.4g}, {need:.4g}]")
    steps = np.diff(grid)
    if not np.allclose(steps, steps[0], rtol=1e-8, atol=0):
        raise ConfigurationError("error grid must be uniform")
    diff = np.abs(np.asarray(f_fine) - e.evaluate(grid))
    return {"l1": float(np.trapezoid(diff, grid)), "linf": float(diff.max())}
