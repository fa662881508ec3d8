from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from proxmeta import rates
from proxmeta.rates import (
    RateFn, ScanThresholdError, ValueTooLarge, add, as_fraction, cdiv, ceil, compose, const, isqrt_ceil,
    max_, max_prefix, monus, mul, nat_str, power, rate, table, var,
)


def test_monus_truncates():
    f = rate(monus(var(), 1))
    assert [f(n) for n in range(4)] == [0, 0, 1, 2]


def test_max_prefix_of_monotone_is_identity():
    f = rate(add(mul(3, var()), 2))
    assert max_prefix(f) is f
    assert all(max_prefix(f)(n) == f(n) for n in range(100))


def test_max_prefix_of_decreasing():
    f = rate(monus(5, var()))
    assert not f.monotone
    assert max_prefix(f)(3) == 5


def test_max_prefix_of_table():
    f = rate(table([2, 0, 7]))
    fm = max_prefix(f)
    assert (fm(1), fm(2)) == (2, 7)
    assert fm(50) == 7


def test_scan_threshold_refuses():
    f = max_prefix(rate(monus(5, var())))
    with pytest.raises(ScanThresholdError):
        f(rates.SCAN_THRESHOLD + 1)


def test_big_arguments_stay_exact():
    f = rate(power(2, ceil(mul(Fraction(1, 3), var()))))
    n = 3 * 10**4
    assert f(n) == 2 ** (10**4)


def test_power_guard():
    with pytest.raises(ValueTooLarge):
        rate(power(2, var()))(rates.MAX_BITS * 4)


def test_isqrt_ceil_and_cdiv():
    f = rate(isqrt_ceil(var()))
    assert [f(n) for n in (0, 1, 2, 4, 5, 9, 10)] == [0, 1, 2, 2, 3, 3, 4]
    g = rate(cdiv(var(), 3))
    assert [g(n) for n in (0, 1, 3, 4)] == [0, 1, 1, 2]


def test_compose():
    f = rate(compose(mul(2, var()), add(var(), 1)))
    assert f(4) == 10
    assert f.monotone


def test_rational_valued():
    m = rate(mul(Fraction(1, 4), add(var(), 1)), integral=False)
    assert m(2) == Fraction(3, 4)
    with pytest.raises(rates.RateError):
        rate(mul(Fraction(1, 4), var()))(1)


def test_as_fraction_rejects_floats_and_zero_denominator():
    assert as_fraction("9/4") == Fraction(9, 4)
    with pytest.raises(TypeError):
        as_fraction(0.5)
    with pytest.raises(ZeroDivisionError):
        as_fraction("1/0")


def test_nat_str_huge():
    import sys

    n = 7**30000 + 12345
    old = sys.get_int_max_str_digits()
    sys.set_int_max_str_digits(0)
    try:
        assert nat_str(n) == str(n)
    finally:
        sys.set_int_max_str_digits(old)


def test_json_round_trip_rejects_unknown():
    f = rate(max_(monus(var(), 1), table([1, 3]), power(2, cdiv(var(), 2))))
    assert RateFn.from_json(f.to_json()) == f
    with pytest.raises(ValueError):
        RateFn.from_json({"op": "var", "extra": 1})
    with pytest.raises(ValueError):
        RateFn.from_json({"op": "frobnicate", "args": []})


# strategy for random expression trees
leaves = st.one_of(st.just(var()), st.integers(0, 5).map(const))


def _extend(children):
    return st.one_of(
        st.tuples(children, children).map(lambda t: add(*t)),
        st.tuples(children, children).map(lambda t: mul(*t)),
        st.tuples(children, children).map(lambda t: max_(*t)),
        st.tuples(children, children).map(lambda t: monus(*t)),
        st.tuples(children, st.integers(1, 4)).map(lambda t: cdiv(t[0], t[1])),
        children.map(isqrt_ceil),
        st.tuples(children, st.integers(0, 3)).map(lambda t: power(t[0], t[1])),
        st.lists(st.integers(0, 20), min_size=1, max_size=5).map(table),
    )


exprs = st.recursive(leaves, _extend, max_leaves=8)


@settings(max_examples=300, deadline=None)
@given(exprs)
def test_monotone_flag_is_sound(e):
    f = RateFn(e)
    if f.monotone:
        vals = [f(n) for n in range(40)]
        assert all(a <= b for a, b in zip(vals, vals[1:]))


@settings(max_examples=200, deadline=None)
@given(exprs, st.integers(0, 60))
def test_max_prefix_dominates_and_is_monotone(e, n):
    f = RateFn(e)
    fm = max_prefix(f)
    assert fm(n) >= f(n)
    assert fm(n + 1) >= fm(n)
    assert fm(n) == max(f(i) for i in range(n + 1))
