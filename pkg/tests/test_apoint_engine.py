import mpmath
import pytest

from zeta_apoints.apoint_engine import (
    APoint,
    EngineStats,
    StripWindow,
    count_in_window,
    locate_apoints,
    refine,
)
from zeta_apoints.errors import InvalidInput, NoConvergence, DerivativeVanishes
from zeta_apoints.zeta_kernel import TargetSpec, eval_shifted

# mpmath at 30 digits, frozen
FIRST_ZERO = complex(0.5, 14.1347251417346937904572519836)
LOWEST_ZETA2_ZERO = complex(-0.355084330210476373429763439372, 3.59083932439896742667859370057)
FIRST_ZETA1_ZERO = complex(2.46316186945432128587439505331, 23.2983204927628579020109616266)
FIRST_ONE_POINT = complex(1.40778804065288669385419974237, 23.3279877545591044950394126865)


def test_ten_zeros_up_to_fifty():
    assert count_in_window(TargetSpec(0, 0), StripWindow(-1, 2, 2, 50)) == 10


def test_no_zero_below_thirteen():
    assert count_in_window(TargetSpec(0, 0), StripWindow(-1, 2, 2, 13)) == 0


def test_degenerate_window_counts_nothing():
    assert count_in_window(TargetSpec(0, 0), StripWindow(-1, 2, 0.5, 1.0)) == 0
    assert count_in_window(TargetSpec(0, 0), StripWindow(-1, 2, 30, 30)) == 0


def test_window_count_agrees_with_hardy_z_oracle():
    # sign changes of Z(t) on the line, and nothing off it at this height
    assert count_in_window(TargetSpec(0, 0), StripWindow(-1, 2, 2, 100)) == int(mpmath.nzeros(100))


def test_first_zero_is_on_the_critical_line():
    pts = locate_apoints(TargetSpec(0, 0), 2, 20)
    assert len(pts) == 1
    assert abs(pts[0].rho - FIRST_ZERO) <= 1e-9
    assert pts[0].residual <= 1e-9
    assert pts[0].multiplicity == 1


def test_lowest_second_derivative_zero_matches_oracle():
    pts = locate_apoints(TargetSpec(0, 2), 2, 25)
    assert abs(pts[0].rho - LOWEST_ZETA2_ZERO) <= 1e-9


def test_first_derivative_and_one_points_match_oracle():
    z1 = locate_apoints(TargetSpec(0, 1), 2, 25)
    assert abs(z1[0].rho - FIRST_ZETA1_ZERO) <= 1e-9
    ones = locate_apoints(TargetSpec(1, 0), 2, 25)
    assert abs(ones[0].rho - FIRST_ONE_POINT) <= 1e-9


@pytest.mark.parametrize("target", [TargetSpec(0, 1), TargetSpec(1, 0), TargetSpec(0.5j, 0), TargetSpec(0, 3)])
def test_enumeration_matches_winding_count(target):
    stats = EngineStats()
    pts = locate_apoints(target, 2, 120, stats=stats)
    window = StripWindow(-2, 6, 2, 120)
    assert sum(p.multiplicity for p in pts) == count_in_window(target, window) == stats.total_count
    gammas = [p.gamma for p in pts]
    assert gammas == sorted(gammas)
    for p in pts:
        assert abs(eval_shifted(p.rho, target, 1e-11).value) <= 1e-9


def test_zeros_sit_on_the_half_line_at_desk_scale():
    for p in locate_apoints(TargetSpec(0, 0), 2, 300):
        assert 0 < p.beta < 1
        assert abs(p.beta - 0.5) <= 1e-6


@pytest.mark.parametrize("t1", [27.5, 61.0, 88.8])
def test_counts_add_across_a_cut(t1):
    target = TargetSpec(1, 0)
    whole = count_in_window(target, StripWindow(-2, 6, 5, 120))
    parts = (count_in_window(target, StripWindow(-2, 6, 5, t1))
             + count_in_window(target, StripWindow(-2, 6, t1, 120)))
    assert whole == parts


def test_refine_from_rough_seed():
    p = refine(0.5 + 14j, TargetSpec(0, 0))
    assert abs(p.rho - FIRST_ZERO) <= 1e-9
    assert p.residual <= 1e-9


def test_refine_is_a_fixed_point_on_located_roots():
    target = TargetSpec(0, 1)
    for p in locate_apoints(target, 2, 60):
        again = refine(p.rho, target)
        assert abs(again.rho - p.rho) <= 1e-12


def test_rootless_seed_does_not_fake_a_root():
    # zeta - 10 has no roots here (|zeta| < 2 for sigma >= 2)
    with pytest.raises((NoConvergence, DerivativeVanishes)):
        refine(4 + 50j, TargetSpec(10, 0))


def test_enumeration_is_bitwise_deterministic():
    target = TargetSpec(0.5j, 0)
    assert locate_apoints(target, 2, 80) == locate_apoints(target, 2, 80)


def test_engine_rejects_bad_ranges():
    with pytest.raises(InvalidInput):
        locate_apoints(TargetSpec(0, 0), 1.0, 10)
    with pytest.raises(InvalidInput):
        StripWindow(2, 1, 2, 10)
    assert locate_apoints(TargetSpec(0, 0), 20, 20) == []


def test_apoint_invariants():
    t = TargetSpec(0, 0)
    with pytest.raises(InvalidInput):
        APoint(0.5, 0.9, t, 0.0)
    with pytest.raises(InvalidInput):
        APoint(0.5, 14.0, t, 1e-8)
    with pytest.raises(InvalidInput):
        APoint(0.5, 14.0, t, 0.0, multiplicity=0)
