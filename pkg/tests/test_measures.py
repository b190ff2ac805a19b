import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from l2f.errors import ConfigurationError, SupportError
from l2f.measures import (
    RATIO_BOUNDS,
    SMZMeasure,
    equispaced_measure,
    gauss_measure,
    restrict_to_window,
    truncated_lebesgue_measure,
    validate_smz,
)


def test_gauss_32_nodes_span():
    mu = gauss_measure(32)
    assert len(mu.nodes) == 32
    assert mu.span < np.sqrt(64) * 1.1
    assert mu.span > 0.8 * np.sqrt(64)


def test_gauss_single_node():
    assert gauss_measure(1).nodes.tolist() == [0.0]


def test_gauss_ratio_is_exact():
    r = validate_smz(gauss_measure(32), trials=200)
    assert abs(r.ratio_lo - 1) < 1e-10 and abs(r.ratio_hi - 1) < 1e-10


def test_equispaced_example():
    mu = equispaced_measure(16, lo=-8, hi=8, spacing=1 / 16)
    assert mu.total_variation == pytest.approx(16.0, rel=1e-12)
    r = validate_smz(mu, trials=100)
    assert 0.75 <= r.ratio_lo <= r.ratio_hi <= 1.25


def test_equispaced_defaults_within_band():
    r = validate_smz(equispaced_measure(32), trials=200)
    assert RATIO_BOUNDS["equispaced"][0] <= r.ratio_lo <= r.ratio_hi <= RATIO_BOUNDS["equispaced"][1]


def test_equispaced_interval_too_small():
    with pytest.raises(ConfigurationError, match="cover"):
        equispaced_measure(4, lo=-1, hi=1)


def test_equispaced_spacing_too_coarse():
    with pytest.raises(ConfigurationError, match="spacing"):
        equispaced_measure(16, spacing=2)


def test_truncated_lebesgue_within_band():
    mu = truncated_lebesgue_measure(32)
    assert mu.total_variation == pytest.approx(4 * np.sqrt(32))
    r = validate_smz(mu)
    assert 0.75 <= r.ratio_lo <= r.ratio_hi <= 1.25


def test_window_pass_and_fail():
    mu = gauss_measure(32)
    assert restrict_to_window(mu, 8.1, 8.1).window == (8.1, 8.1)
    with pytest.raises(SupportError) as info:
        restrict_to_window(mu, 4, 4)
    assert np.all(np.abs(info.value.offending) > 4)


def test_window_asymmetric():
    mu = gauss_measure(32)
    with pytest.raises(SupportError):
        restrict_to_window(mu, 8.0, 7.0)


def test_empty_measure_passes_vacuously():
    mu = SMZMeasure(nodes=np.array([]), weights=np.array([]), order=1, kind="equispaced")
    assert restrict_to_window(mu, 0.1, 0.1).window == (0.1, 0.1)
    assert mu.span == 0.0


def test_single_trial_degenerate():
    r = validate_smz(equispaced_measure(16), trials=1)
    assert r.ratio_lo == r.ratio_hi


def test_strict_construction_checks():
    assert gauss_measure(16, strict=True).order == 16
    assert equispaced_measure(16, strict=True).order == 16


@pytest.mark.parametrize("kind", ["gauss", "equispaced", "truncated_lebesgue"])
def test_total_variation_scaling_stable(kind):
    build = {"gauss": gauss_measure, "equispaced": equispaced_measure, "truncated_lebesgue": truncated_lebesgue_measure}[kind]
    consts = [validate_smz(build(m), trials=20).tv_over_sqrt_m for m in (16, 32, 64)]
    assert max(consts) / min(consts) < 1.2


def test_json_round_trip():
    mu = gauss_measure(8)
    doc = json.loads(mu.to_json())
    assert set(doc) == {"kind", "m", "nodes", "weights"}
    back = SMZMeasure.from_dict(doc)
    np.testing.assert_array_equal(back.nodes, mu.nodes)
    np.testing.assert_array_equal(back.weights, mu.weights)
    assert back.kind == "gauss" and back.order == 8


def test_rejects_bad_construction():
    with pytest.raises(ConfigurationError):
        SMZMeasure(nodes=np.zeros(2), weights=np.ones(3), order=2, kind="gauss")
    with pytest.raises(ConfigurationError):
        SMZMeasure(nodes=np.zeros(2), weights=np.array([1.0, -1.0]), order=2, kind="gauss")
    with pytest.raises(ConfigurationError):
        SMZMeasure(nodes=np.zeros(1), weights=np.ones(1), order=1, kind="chebyshev")


@settings(max_examples=25, deadline=None)
@given(m=st.integers(4, 64), seed=st.integers(0, 2**31))
def test_mz_ratio_band_for_every_kind(m, seed):
    for mu in (gauss_measure(m), equispaced_measure(m), truncated_lebesgue_measure(m)):
        r = validate_smz(mu, trials=50, seed=seed)
        lo, hi = RATIO_BOUNDS[mu.kind]
        assert lo <= r.ratio_lo <= r.ratio_hi <= hi
