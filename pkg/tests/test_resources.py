import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from ftbqc.channel import ChannelParams, DecoyParams
from ftbqc.resources import (
    CSV_HEADER,
    ResourceParams,
    ancilla_per_qubit,
    asymptotic_row,
    equal_success_efficiency,
    level_error,
    log_failure,
    optimal_level,
    repetitions,
    repetitions_ceil,
    resource_ratio,
    rows_to_csv,
    sweep_row,
    threshold_check,
    total_pulses,
)

P, CH, D = ResourceParams(), ChannelParams(), DecoyParams()
EXACT_FIXED_POINT = 0.0442131229


def exact_level(e0, n):
    e = Fraction(e0)
    for _ in range(n):
        e = sum(math.comb(7, k) * e**k for k in range(2, 8))
    return e


def test_e1_exact():
    assert level_error(0.01, 1) == pytest.approx(0.00213535210701, abs=1e-14)
    assert level_error(0.01, 1) == pytest.approx(float(exact_level(Fraction(1, 100), 1)), rel=1e-14)


def test_e2_exact_and_approximations():
    assert level_error(0.01, 2) == pytest.approx(float(exact_level(Fraction(1, 100), 2)), rel=1e-12)
    assert level_error(0.01, 2) == pytest.approx(9.6096e-5, rel=1e-4)
    assert level_error(0.01, 2, "closed-form") == pytest.approx(0.21**4 / 21, abs=1e-18)
    assert abs(level_error(0.01, 2, "closed-form") - level_error(0.01, 2, "approximate")) < 1e-15


@given(st.floats(1e-6, 0.04), st.integers(1, 4))
def test_closed_form_equals_iterated(e0, n):
    a = level_error(e0, n, "approximate")
    assert level_error(e0, n, "closed-form") == pytest.approx(a, rel=1e-12)
    assert level_error(e0, n) >= a


@given(st.floats(1e-6, EXACT_FIXED_POINT * 0.999))
def test_exact_suppression_below_fixed_point(e0):
    es = [level_error(e0, n) for n in range(5)]
    assert all(b < a for a, b in zip(es, es[1:]))


def test_exact_recursion_grows_between_fixed_point_and_threshold():
    assert level_error(0.046, 1) > 0.046
    assert level_error(0.046, 1, "approximate") < 0.046


def test_threshold_flag():
    assert threshold_check(1 / 21 - 1e-12)
    assert not threshold_check(1 / 21)


@pytest.mark.parametrize("e0", [0.01, 0.001])
@pytest.mark.parametrize("S", [100, 1000])
@pytest.mark.parametrize("n", [1, 2])
def test_success_identity(e0, S, n):
    e_n = level_error(e0, n)
    k = repetitions(e0, e_n, S)
    lhs = 1 - (1 - (1 - e0) ** S) ** k
    assert lhs == pytest.approx((1 - e_n) ** S, abs=1e-9)


def test_repetition_properties():
    assert repetitions(0.01, 0.01, 1000) == pytest.approx(1.0)
    assert repetitions(0.01, level_error(0.01, 2), 1000) > 1
    assert repetitions_ceil(0.01, 0.01, 1000) == 1
    with pytest.raises(OverflowError):
        repetitions(0.01, 0.0, 1000)


def test_log_domain_robustness():
    assert math.isfinite(log_failure(1e-12, 1e6))
    assert log_failure(1e-12, 1e6) == pytest.approx(math.log(1e-6), rel=1e-6)


def test_ancilla_sum():
    assert ancilla_per_qubit(0, 1774) == 0
    assert ancilla_per_qubit(2, 1774) == 8 * 1774
    assert ancilla_per_qubit(3, 1) == 1 + 7 + 49


FROZEN_R_AT_0KM = [1.0, 0.008564, 0.003471, 0.006883, 0.019689]


def test_frozen_ratios_at_zero_km():
    for n, r in enumerate(FROZEN_R_AT_0KM):
        assert resource_ratio(n, P, CH, D) == pytest.approx(r, rel=1e-3)


@pytest.mark.parametrize("L", [0, 10, 25, 50, 100])
def test_optimal_level_is_two(L):
    assert optimal_level(P, CH.at(L), D) == 2


def test_degenerate_level_range():
    assert optimal_level(ResourceParams(levels=(0,)), CH, D) == 0


def test_frozen_row_at_25km():
    r = sweep_row(25, 2, P, CH, D)
    assert r["N_lower"] == pytest.approx(5.254466e6, rel=1e-6)
    assert r["p1_lower"] == pytest.approx(0.5250382, rel=1e-6)
    assert r["k"] == pytest.approx(55360.35, rel=1e-6)


def test_asymptotic_row_at_25km():
    r = asymptotic_row(25, P, CH, D)
    assert r["N_n"] == pytest.approx(4.883e6, rel=1e-3)
    assert r["p1_lower"] == pytest.approx(0.5512, abs=1e-4)
    assert r["k"] == 1.0


def test_linear_gain_approximation_close_at_long_distance():
    t = total_pulses(2, P, CH.at(100), D)
    assert abs(t.N_n_approx - t.N_n) / t.N_n < 1e-5


def test_equal_success_efficiency_prefers_level_two():
    for L in (10, 50, 100):
        e = {n: equal_success_efficiency(n, P, CH.at(L), D) for n in range(5)}
        assert max(e, key=e.get) == 2


def test_csv_layout():
    text = rows_to_csv([sweep_row(0, 1, P, CH, D)])
    head, row = text.splitlines()
    assert head == ",".join(CSV_HEADER) == "L_km,n,T,Q_mu,p1_lower,N_lower,N_n,k,R,E"
    assert row.split(",")[1] == "1"


def test_parameter_validation():
    with pytest.raises(ValueError):
        ResourceParams(e0=0)
    with pytest.raises(ValueError):
        ResourceParams(levels=(5,))
    with pytest.raises(ValueError):
        level_error(0.01, -1)
    with pytest.raises(ValueError):
        level_error(0.01, 1, "bogus")


def test_level_one_ancilla_pulses():
    from ftbqc.resources import ancilla_pulses

    assert ancilla_pulses(1, 1774, 1000, 0.045) == pytest.approx(3.9422e7, rel=1e-4)
