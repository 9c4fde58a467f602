import json
import math

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import DERIV_ZEROS, ONE_POINTS, ZEROS
from zeta_apoints.counting import (
    CountingCurve,
    GeneralCountingModel,
    general_main_term,
    main_term,
    n_ak,
    residual_curve,
)
from zeta_apoints.errors import CacheIncomplete, InvalidInput
from zeta_apoints.zeta_kernel import TargetSpec


@pytest.mark.parametrize("a,k,expected", [
    (1, 0, 2), (0, 3, 2), (0.5, 0, 1), (0, 0, 1), (1j, 2, 1), (1, 1, 1), (1 + 1e-15, 0, 1),
])
def test_n_ak_cases(a, k, expected):
    assert n_ak(TargetSpec(a, k)) == expected


def test_main_term_vanishes_at_its_root():
    for t in (ZEROS, ONE_POINTS):
        T = 2 * math.pi * n_ak(t) * math.e
        assert main_term(T, t) == pytest.approx(0, abs=1e-12)


def test_main_term_at_hundred():
    with mpmath.workdps(30):
        ref = float(100 / (2 * mpmath.pi) * mpmath.log(100 / (2 * mpmath.pi * mpmath.e)))
    assert main_term(100, ZEROS) == pytest.approx(ref, rel=1e-14)


@given(st.floats(2 * math.pi * 2 * math.e + 1e-3, 1e6))
def test_main_term_increases_past_its_root(T):
    assert main_term(T * 1.001, ONE_POINTS) > main_term(T, ONE_POINTS)


@given(st.floats(1.5, 1e6))
def test_general_form_reproduces_main_term(T):
    for t in (ZEROS, ONE_POINTS, DERIV_ZEROS):
        model = GeneralCountingModel.for_target(t)
        assert general_main_term(T, model) == pytest.approx(main_term(T, t), rel=1e-12, abs=1e-9)


def test_general_form_trivial_values():
    assert general_main_term(math.e, GeneralCountingModel(1, 1)) == pytest.approx(math.e)
    assert general_main_term(7.0, GeneralCountingModel(0.3, 7.0)) == 0


def test_general_model_validation():
    with pytest.raises(InvalidInput):
        GeneralCountingModel(0, 1)
    with pytest.raises(InvalidInput):
        GeneralCountingModel(1, 0)
    with pytest.raises(InvalidInput):
        main_term(1.0, ZEROS)


def test_curve_before_first_zero_is_empty(tall_cache):
    curve = residual_curve(ZEROS, tall_cache, [14.0])
    assert curve.observed == [0]


@pytest.mark.parametrize("target,bound", [(ZEROS, 2), (ONE_POINTS, 3), (DERIV_ZEROS, 3)])
def test_residual_stays_within_log_envelope(tall_cache, target, bound):
    grid = [50, 100, 200, 400]
    curve = residual_curve(target, tall_cache, grid)
    for T, r in zip(grid, curve.residual):
        assert abs(r) <= bound * math.log(T)
    assert curve.max_ratio() < 10


def test_zero_counts_match_hardy_z(tall_cache):
    curve = residual_curve(ZEROS, tall_cache, [50, 100, 200, 400, 1000])
    assert curve.observed == [10, 29, 79, 202, 649]


def test_residual_is_observed_minus_main(tall_cache):
    curve = residual_curve(DERIV_ZEROS, tall_cache, [30, 300, 1500])
    for o, m, r in zip(curve.observed, curve.main_term, curve.residual):
        assert r == o - m


def test_curve_json_shape(tall_cache):
    data = residual_curve(ZEROS, tall_cache, [100, 200]).to_json()
    assert set(data) >= {"target", "t_grid", "main_term", "observed", "residual", "envelopes"}
    assert set(data["envelopes"]) == {"logT", "logT_over_loglogT", "logT_over_sqrt_loglogT"}
    json.dumps(data)


def test_curve_requires_coverage(tall_cache):
    with pytest.raises(CacheIncomplete):
        residual_curve(ONE_POINTS, tall_cache, [500])
    with pytest.raises(InvalidInput):
        residual_curve(ZEROS, tall_cache, [])


def test_curve_lengths_must_match():
    with pytest.raises(InvalidInput):
        CountingCurve(ZEROS, [1, 2], [0.0], [0, 0], [0.0, 0.0])
