from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from constructive_lp.numerics import (
    Crn,
    Interval,
    Ordering,
    Unknown,
    FuelExhausted,
    coarse_locate,
    crn_approx,
    crn_arith,
    crn_compare_fuel,
    crn_div_rational,
    crn_enclosure,
    crn_from_rational,
    crn_order_of_apart,
    crn_refute_leq,
    dyadic,
    locate_halves,
    precision_index,
    rat_arith,
)

rationals = st.fractions(min_value=-50, max_value=50, max_denominator=200)
tolerances = st.integers(min_value=1, max_value=16).map(dyadic)


def slow_crn(q):
    """q presented through a sequence that only settles slowly: q + 1/n."""
    q = F(q)
    return Crn(lambda n: q + F(1, n), lambda eps: int(1 / F(eps)) + 1, f"slow({q})")


def test_rat_arith_basic():
    assert rat_arith("add", F(1, 3), F(1, 6)) == F(1, 2)
    assert rat_arith("div", 1, 4) == F(1, 4)
    with pytest.raises(ZeroDivisionError):
        rat_arith("div", 1, 0)


def test_precision_index():
    assert precision_index(F(1)) == 0
    assert precision_index(F(1, 1000)) == 10
    assert precision_index(F(1, 1024)) == 10
    with pytest.raises(ValueError):
        precision_index(F(0))


def test_interval_ops():
    a = Interval(F(1), F(2))
    assert (a + Interval.point(1)) == Interval(F(2), F(3))
    assert -a == Interval(F(-2), F(-1))
    assert a.scale(F(-2)) == Interval(F(-4), F(-2))
    assert F(3, 2) in a and F(3) not in a
    with pytest.raises(ValueError):
        Interval(F(2), F(1))


def test_embedded_rational_is_exact():
    x = crn_from_rational(F(2, 7))
    assert crn_approx(x, F(1, 10**9)) == F(2, 7)


def test_reg_rejects_nonpositive():
    with pytest.raises(ValueError):
        crn_from_rational(1).reg(0)


@given(rationals, rationals, tolerances)
def test_slow_operands_stay_within_tolerance(p, q, eps):
    x, y = slow_crn(p), slow_crn(q)
    for op, exact in [("add", p + q), ("mul", p * q), ("max", max(p, q)), ("min", min(p, q))]:
        assert abs(crn_approx(crn_arith(op, x, y), eps) - exact) <= eps
    assert abs(crn_approx(crn_arith("neg", x), eps) + p) <= eps
    assert abs(crn_approx(crn_arith("abs", x), eps) - abs(p)) <= eps


@given(rationals, st.fractions(min_value=F(1, 10), max_value=10, max_denominator=50), tolerances)
def test_div_rational(p, q, eps):
    for d in (q, -q):
        assert abs(crn_approx(crn_div_rational(slow_crn(p), d), eps) - p / d) <= eps


def test_div_by_zero_rejected():
    with pytest.raises(ZeroDivisionError):
        crn_div_rational(crn_from_rational(1), 0)


@given(rationals, tolerances)
def test_enclosure_contains_value(p, eps):
    assert p in crn_enclosure(slow_crn(p), eps)


def test_compare_separates_distinct_rationals():
    assert crn_compare_fuel(crn_from_rational(F(2, 7)), crn_from_rational(F(3, 7)), 4) is Ordering.LESS
    assert crn_order_of_apart(crn_from_rational(1), crn_from_rational(0)) is Ordering.GREATER


def test_compare_equal_values_stays_unknown():
    v = crn_compare_fuel(slow_crn(1), crn_from_rational(1), 30)
    assert v == Unknown(30)
    with pytest.raises(FuelExhausted):
        crn_order_of_apart(crn_from_rational(0), slow_crn(0), max_fuel=10)


def test_refute_leq_is_one_sided():
    assert crn_refute_leq(crn_from_rational(1), crn_from_rational(0), 3)
    assert not crn_refute_leq(crn_from_rational(0), crn_from_rational(1), 50)
    assert not crn_refute_leq(crn_from_rational(1), crn_from_rational(1), 50)


@given(st.fractions(min_value=0, max_value=1), st.booleans())
def test_locate_membership(q, slow):
    e = Interval(F(0), F(1))
    x = slow_crn(q) if slow else crn_from_rational(q)
    b = coarse_locate(x, e)
    assert q in locate_halves(e)[b]


def test_locate_halves_overlap():
    e0, e1 = locate_halves(Interval(F(0), F(3)))
    assert e0 == Interval(F(0), F(2)) and e1 == Interval(F(1), F(3))
    with pytest.raises(ValueError):
        coarse_locate(crn_from_rational(0), Interval(F(0), F(0)))
