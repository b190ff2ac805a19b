import mpmath as mp
import numpy as np
import pytest


def psi_rodrigues(k, x, dps=40):
    """psi_k(x) from the derivative formula, in extended precision."""
    with mp.workdps(dps):
        x = mp.mpf(x)
        d = mp.diff(lambda t: mp.exp(-t * t), x, k)
        norm = mp.sqrt(mp.power(2, k) * mp.factorial(k) * mp.sqrt(mp.pi))
        return float((-1) ** k * mp.exp(x * x / 2) * d / norm)


def trapezoid_ft(values, t, omegas):
    """(2 pi)^(-1/2) integral f(t) exp(-i w t) dt by the trapezoid rule."""
    h = t[1] - t[0]
    w = np.full(t.size, h)
    w[0] = w[-1] = h / 2
    return np.exp(-1j * np.outer(omegas, t)) @ (w * values) / np.sqrt(2 * np.pi)


def g_lambda(lam, x):
    return np.exp(-lam * x - 0.5 * x * x)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
