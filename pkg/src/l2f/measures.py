"""Discrete Marcinkiewicz-Zygmund measures on the real line.

A measure of order ``m`` is a set of positive point masses whose weighted
sums of ``|P|^2`` are comparable to ``integral |P|^2`` for every weighted
polynomial ``P`` of degree < m, with total mass of order ``sqrt(m)``.
"""

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigurationError, SupportError
from .hermite import eval_psi_batch, gauss_rule

KINDS = ("gauss", "equispaced", "truncated_lebesgue")


@dataclass(frozen=True)
class SMZMeasure:
    nodes: np.ndarray
    weights: np.ndarray
    order: int
    kind: str
    window: tuple = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown measure kind {self.kind!r}")
        if len(self.nodes) != len(self.weights):
            raise ConfigurationError("nodes and weights differ in length")
        if np.any(np.asarray(self.weights) <= 0):
            raise ConfigurationError("measure weights must be strictly positive")

    @property
    def total_variation(self):
        return float(np.sum(self.weights))

    @property
    def span(self):
        """Largest absolute node, or 0 for an empty measure."""
        return float(np.max(np.abs(self.nodes))) if len(self.nodes) else 0.0

    def integrate(self, values):
        return float(np.dot(self.weights, values))

    def to_dict(self):
        return {
            "kind": self.kind,
            "m": self.order,
            "nodes": np.asarray(self.nodes).tolist(),
            "weights": np.asarray(self.weights).tolist(),
        }

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, doc):
        return cls(
            nodes=np.asarray(doc["nodes"], dtype=float),
            weights=np.asarray(doc["weights"], dtype=float),
            order=int(doc["m"]),
            kind=doc["kind"],
        )


@dataclass(frozen=True)
class SMZReport:
    ratio_lo: float
    ratio_hi: float
    tv_over_sqrt_m: float


# kind-specific acceptance band for the MZ ratio
RATIO_BOUNDS = {
    "gauss": (1 - 1e-10, 1 + 1e-10),
    "equispaced": (0.75, 1.25),
    "truncated_lebesgue": (0.75, 1.25),
}


def gauss_measure(m, strict=False):
    rule = gauss_rule(m)
    mu = SMZMeasure(nodes=rule.nodes, weights=rule.weights, order=m, kind="gauss")
    if strict:
        _check(mu)
    return mu


def equispaced_measure(m, lo=None, hi=None, spacing=None, c1=0.25, strict=False):
    """Equispaced nodes on ``[lo, hi]``, each carrying the spacing as mass.

    Nodes run from ``hi`` down to ``lo + spacing``; the mass at a node is the
    gap to its lower neighbour, so the weights sum to ``hi - lo``. The
    interval must cover ``[-sqrt(2m), sqrt(2m)]`` and the spacing may not
    exceed ``c1 / sqrt(m)``.
    """
    if m < 1:
        raise ConfigurationError(f"order must be >= 1, got {m}")
    edge = np.sqrt(2.0 * m)
    lo = -edge if lo is None else float(lo)
    hi = edge if hi is None else float(hi)
    if lo > -edge or hi < edge:
        raise ConfigurationError(
            f"interval [{lo}, {hi}] does not cover [-sqrt(2m), sqrt(2m)] = [{-edge:.4g}, {edge:.4g}]"
        )
    max_spacing = c1 / np.sqrt(m)
    if spacing is None:
        count = int(np.ceil((hi - lo) / max_spacing - 1e-9))
    else:
        if spacing > max_spacing * (1 + 1e-12):
            raise ConfigurationError(f"spacing {spacing} exceeds c1/sqrt(m) = {max_spacing:.4g}")
        count = int(round((hi - lo) / spacing))
    h = (hi - lo) / count
    nodes = hi - h * np.arange(count)
    mu = SMZMeasure(nodes=nodes, weights=np.full(count, h), order=m, kind="equispaced")
    if strict:
        _check(mu)
    return mu


def truncated_lebesgue_measure(m, points_per_unit=64):
    """Lebesgue measure on ``[-2 sqrt(m), 2 sqrt(m)]``, discretised by the
    midpoint rule at a resolution far finer than the polynomial scale."""
    half = 2.0 * np.sqrt(m)
    count = int(np.ceil(2 * half * points_per_unit))
    h = 2 * half / count
    nodes = half - h * (np.arange(count) + 0.5)
    return SMZMeasure(nodes=nodes, weights=np.full(count, h), order=m, kind="truncated_lebesgue")


def restrict_to_window(mu, L, R):
    """Certify that every node lies in ``[-L, R]`` and record the window."""
    nodes = np.asarray(mu.nodes)
    bad = nodes[(nodes < -L) | (nodes > R)]
    if bad.size:
        raise SupportError(
            f"{bad.size} node(s) outside [-{L:.6g}, {R:.6g}], e.g. {bad[0]:.6g}; "
            f"node span {mu.span:.6g} does not fit the window",
            offending=bad,
        )
    return replace(mu, window=(float(L), float(R)))


def validate_smz(mu, trials=200, seed=0):
    """Monte Carlo check of the MZ sandwich over random ``P`` in ``Pi_m``."""
    if trials < 1:
        raise ConfigurationError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    coeffs = rng.standard_normal((trials, mu.order))
    vals = coeffs @ eval_psi_batch(mu.order, mu.nodes)
    ratios = (vals ** 2 @ mu.weights) / np.sum(coeffs ** 2, axis=1)
    return SMZReport(
        ratio_lo=float(ratios.min()),
        ratio_hi=float(ratios.max()),
        tv_over_sqrt_m=mu.total_variation / np.sqrt(mu.order),
    )


def _check(mu, trials=200):
    report = validate_smz(mu, trials)
    lo, hi = RATIO_BOUNDS[mu.kind]
    if report.ratio_lo < lo or report.ratio_hi > hi:
        raise ConfigurationError(
            f"{mu.kind} measure of order {mu.order} fails the MZ check: "
            f"ratios [{report.ratio_lo:.6g}, {report.ratio_hi:.6g}] not within [{lo}, {hi}]"
        )
    return report
