import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zeta_apoints.equidist import (
    ModOneSequence,
    WeylReport,
    erdos_turan_bound,
    geometric_prefixes,
    star_discrepancy,
    trend_report,
    weyl_sum,
)
from zeta_apoints.errors import EmptyPrefix, InvalidInput


def brute_discrepancy(x):
    """sup over x in [0,1] of |#{x_j < x}/N - x|, checked at every breakpoint from both sides."""
    x = np.asarray(x)
    n = len(x)
    best = 0.0
    for p in np.concatenate([x, [1.0]]):
        below = np.count_nonzero(x < p)
        upto = np.count_nonzero(x <= p)
        best = max(best, abs(below / n - p), abs(upto / n - p))
    return best


def test_constant_sequence_has_unit_sums():
    seq = ModOneSequence(np.zeros(50))
    assert weyl_sum(seq, 3, 50) == 1 + 0j


def test_two_point_cancellation():
    assert abs(weyl_sum(ModOneSequence([0.0, 0.5]), 1, 2)) <= 1e-16


def test_grid_points_cancel_except_at_multiples():
    N = 64
    seq = ModOneSequence(np.arange(N) / N)
    assert abs(weyl_sum(seq, 1, N)) <= 1e-12
    assert abs(weyl_sum(seq, N, N) - 1) <= 1e-12


def test_midpoints_are_optimal():
    N = 37
    seq = ModOneSequence((2 * np.arange(1, N + 1) - 1) / (2 * N))
    assert star_discrepancy(seq, N) == pytest.approx(1 / (2 * N), abs=1e-15)


def test_single_half():
    assert star_discrepancy(ModOneSequence([0.5]), 1) == 0.5


def test_random_sets_match_brute_force():
    rng = np.random.default_rng(7)
    for _ in range(30):
        n = int(rng.integers(1, 201))
        x = rng.random(n)
        assert abs(star_discrepancy(ModOneSequence(x), n) - brute_discrepancy(x)) <= 1e-12


def test_golden_rotation_is_flat():
    phi = (1 + math.sqrt(5)) / 2
    seq = ModOneSequence(np.arange(1, 10001) * phi, "golden")
    rep = trend_report(seq, [1, 2, 3], [10000])
    assert max(row[0] for row in rep.magnitudes) < 0.01


def test_first_prefix_has_magnitude_one():
    seq = ModOneSequence(np.random.default_rng(1).random(20))
    rep = trend_report(seq, [1, 5, -2], [1, 10])
    assert all(row[0] == pytest.approx(1.0, abs=1e-15) for row in rep.magnitudes)
    assert rep.discrepancies[0] >= 0.5


values = st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=300)


@settings(max_examples=60, deadline=None)
@given(values, st.integers(1, 50))
def test_weyl_sum_properties(xs, h):
    seq = ModOneSequence(xs)
    n = len(seq)
    s = weyl_sum(seq, h, n)
    assert abs(s) <= 1 + 1e-12
    assert abs(abs(weyl_sum(seq, -h, n)) - abs(s)) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(values)
def test_discrepancy_range(xs):
    seq = ModOneSequence(xs)
    n = len(seq)
    d = star_discrepancy(seq, n)
    assert 1 / (2 * n) - 1e-15 <= d <= 1


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0, 1, exclude_max=True), min_size=1, max_size=200),
       st.lists(st.integers(-1000, 1000), min_size=200, max_size=200))
def test_shifting_by_integers_changes_nothing(xs, shifts):
    n = len(xs)
    k = np.array(shifts[:n], dtype=float)
    shifted = np.array(xs) + k
    # x + k can round; (x + k) - k is exact and is the fraction actually stored
    a, b = ModOneSequence(shifted - k), ModOneSequence(shifted)
    tol = 1e-12
    assert abs(star_discrepancy(a, n) - star_discrepancy(b, n)) <= tol
    for h in (1, 2, 7):
        assert abs(weyl_sum(a, h, n) - weyl_sum(b, h, n)) <= tol


@pytest.mark.parametrize("H", [10, 100])
def test_erdos_turan_bounds_discrepancy(H):
    rng = np.random.default_rng(H)
    phi = (1 + math.sqrt(5)) / 2
    seqs = [rng.random(500), np.sqrt(np.arange(1, 800)), np.arange(300) * phi, np.zeros(10)]
    for xs in seqs:
        seq = ModOneSequence(xs)
        n = len(seq)
        assert star_discrepancy(seq, n) <= erdos_turan_bound(seq, n, H)


def test_bad_prefixes():
    seq = ModOneSequence([0.1, 0.2])
    with pytest.raises(EmptyPrefix):
        weyl_sum(seq, 1, 0)
    with pytest.raises(EmptyPrefix):
        star_discrepancy(seq, 3)
    with pytest.raises(InvalidInput):
        weyl_sum(seq, 0, 2)
    with pytest.raises(InvalidInput):
        trend_report(seq, [1], [2, 1])
    with pytest.raises(InvalidInput):
        ModOneSequence([float("inf")])


def test_negative_values_wrap_into_unit_interval():
    seq = ModOneSequence([-1e-20, -0.25, 3.75])
    assert np.all((seq.values >= 0) & (seq.values < 1))
    assert list(seq.values) == [0.0, 0.75, 0.75]


def test_geometric_prefixes():
    assert geometric_prefixes(1488) == [100, 200, 400, 800, 1488]
    assert geometric_prefixes(50) == [50]
    assert geometric_prefixes(400) == [100, 200, 400]


def test_report_serialization():
    seq = ModOneSequence(np.sqrt(np.arange(1, 301)), "sqrt")
    rep = trend_report(seq, [1, 2], [100, 300])
    data = rep.to_json()
    assert data["source"] == "sqrt"
    assert rep.magnitude(2, 300) == data["magnitudes"][1][1]
    lines = rep.to_csv().splitlines()
    assert lines[0] == "h,N,magnitude,star_discrepancy"
    assert len(lines) == 5


def test_report_rejects_impossible_magnitudes():
    with pytest.raises(InvalidInput):
        WeylReport([1], [10], [[1.5]], [0.1])
