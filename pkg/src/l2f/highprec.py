"""Extended-precision reference versions of the Hermite projection.

Same recurrence, nodes and weights as the double-precision code, carried
out with mpmath. Used to measure approximation errors that sit below
double-precision roundoff (about 1e-17 for the signals here).
"""

import mpmath as mp
import numpy as np

from .hermite import gauss_rule


def psi_rows(n, x):
    """``[psi_0(x), ..., psi_{n-1}(x)]`` as mpf values."""
    x = mp.mpf(x)
    rows = [mp.power(mp.pi, -0.25) * mp.exp(-x * x / 2)]
    if n > 1:
        rows.append(mp.sqrt(2) * x * rows[0])
    for k in range(1, n - 1):
        rows.append(mp.sqrt(mp.mpf(2) / (k + 1)) * x * rows[k] - mp.sqrt(mp.mpf(k) / (k + 1)) * rows[k - 1])
    return rows[:n]


def gauss_rule_mp(m, dps=40, newton_steps=6):
    """Nodes and weights of order ``m`` polished to ``dps`` digits."""
    with mp.workdps(dps):
        nodes = []
        for x0 in gauss_rule(m).nodes:
            x = mp.mpf(float(x0))
            for _ in range(newton_steps):
                rows = psi_rows(m + 1, x)
                x -= rows[m] / (mp.sqrt(2 * m) * rows[m - 1] - x * rows[m])
            nodes.append(x)
        weights = [1 / mp.fsum(r * r for r in psi_rows(m, x)) for x in nodes]
    return nodes, weights


def project(f, m, n, dps=40):
    """Coefficients of the Gauss least-squares projection of callable ``f``."""
    nodes, weights = gauss_rule_mp(m, dps)
    with mp.workdps(dps):
        coeffs = [mp.mpf(0)] * n
        for x, w in zip(nodes, weights):
            fx = w * f(x)
            for k, p in enumerate(psi_rows(n, x)):
                coeffs[k] += fx * p
    return coeffs


def l1_error(f, coeffs, grid, dps=40):
    """Trapezoid L1 norm of ``f - sum_k coeffs[k] psi_k`` on a uniform grid."""
    n = len(coeffs)
    with mp.workdps(dps):
        diffs = [abs(f(mp.mpf(float(x))) - mp.fsum(c * p for c, p in zip(coeffs, psi_rows(n, float(x))))) for x in grid]
        h = mp.mpf(float(grid[1] - grid[0]))
        total = h * (mp.fsum(diffs) - (diffs[0] + diffs[-1]) / 2)
    return float(total)


def shifted_weighted_signal(amplitudes, t2_ms, L, tau):
    """Callable ``t -> sum_k A_k exp(-(t + L) tau / T2_k) exp(-t^2/2)`` in mpmath."""
    amps = [mp.mpf(a) for a in amplitudes]
    rates = [mp.mpf(tau) / mp.mpf(t) for t in t2_ms]
    L = mp.mpf(L)

    def f(t):
        return mp.fsum(a * mp.exp(-r * (t + L)) for a, r in zip(amps, rates)) * mp.exp(-t * t / 2)

    return f


def projection_errors(amplitudes, t2_ms, L, tau, m, degrees, grid=None, dps=40):
    """``{n: ||f - S_n||_1}`` in extended precision."""
    grid = np.linspace(-14, 14, 2801) if grid is None else grid
    f = shifted_weighted_signal(amplitudes, t2_ms, L, tau)
    out = {}
    for n in degrees:
        out[n] = l1_error(f, project(f, m, n, dps), grid, dps)
    return out
