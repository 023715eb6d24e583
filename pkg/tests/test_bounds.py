from __future__ import annotations

import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corramp.bounds import (
    DimQuery,
    ceil_log2,
    existence_dim,
    explicit_dim,
    hoeffding_tail,
    lower_dim,
    min_output_exponent,
    sqrt_bracket,
    to_fraction,
)
from corramp.errors import ParameterError
from support import dimension_grid


def test_existence_worked_value():
    # ceil(300 * (1/9) * 256) with exact rationals
    assert existence_dim(DimQuery(100, 0.5, 2, p=2)) == 8534
    assert math.ceil(Fraction(300 * 256, 9)) == 8534


def test_explicit_worked_value():
    ex = explicit_dim(DimQuery(2, 0.5, 4, ell=1))
    assert ex.K == 592
    # big-integer recomputation: 2 * (2^11)^21 * 8^120
    rhs = 2 * (2**11) ** 21 * 8**120
    assert rhs == 2**592


def test_lower_worked_value():
    lb = lower_dim(DimQuery(20000, 0.05, 2, p=2))
    assert lb.applicable and lb.value == 20
    assert lb.p_cap == pytest.approx(2.714, abs=1e-3)


def test_lower_guard_named():
    # (gamma tau)^2 = 0.1414^2 ~ 0.02 > 1/100
    lb = lower_dim(DimQuery(20000, 0.0707, 2, p=2))
    assert not lb.applicable
    assert "1/100" in lb.violated


def test_lower_p_cap_guard():
    lb = lower_dim(DimQuery(10, 0.05, 2, p=2))
    assert not lb.applicable and "p <=" in lb.violated


def test_hoeffding_worked_value():
    assert hoeffding_tail(100, 20, 2) == pytest.approx(math.exp(-2), rel=1e-12)


def test_hoeffding_limits():
    assert hoeffding_tail(100, 1e-9, 2) == pytest.approx(1.0)
    a, b = hoeffding_tail(1000, 5, 2), hoeffding_tail(1000, 10, 2)
    assert math.log(b) == pytest.approx(4 * math.log(a))
    with pytest.raises(ParameterError):
        hoeffding_tail(10, 0, 2)


def test_ell_zero_rejected():
    with pytest.raises(ParameterError):
        explicit_dim(DimQuery(2, 0.5, 4, ell=0))


def test_query_ranges():
    for bad in ({"tau": 0}, {"tau": 1}, {"gamma": 1}):
        kw = {"d": 5, "tau": 0.5, "gamma": 2, "p": 2, **bad}
        with pytest.raises(ParameterError):
            DimQuery(**kw)


def test_p_doubling_exponent_algebra():
    q1, q2 = DimQuery(10, 0.5, 2, p=2), DimQuery(10, 0.5, 2, p=4)
    # (gamma/tau)^(2p) doubles its exponent; compare the exact rationals
    r1 = 3 * 10 * (Fraction(2) ** 2 - 1) ** -2 * Fraction(4) ** 4
    r2 = 3 * 10 * (Fraction(2) ** 4 - 1) ** -2 * Fraction(4) ** 8
    assert existence_dim(q1) == math.ceil(r1)
    assert existence_dim(q2) == math.ceil(r2)


def _mp_min_K(d, tau, gamma, ell):
    with mpmath.workdps(200):
        g, t = mpmath.mpf(gamma.numerator) / gamma.denominator, mpmath.mpf(tau.numerator) / tau.denominator
        rhs = d * (1024 / (1 - 1 / mpmath.sqrt(g))) ** (20 * ell + 1) * (g / t) ** (60 * 2**ell)
        return int(mpmath.ceil(mpmath.log(rhs, 2)))


@pytest.mark.parametrize("d,tau,gamma,ell", dimension_grid()[::7])
def test_min_exponent_matches_high_precision(d, tau, gamma, ell):
    assert min_output_exponent(d, tau, gamma, ell) == _mp_min_K(d, tau, gamma, ell)


def test_dominance_on_grid():
    for d, tau, gamma, ell in dimension_grid():
        q = DimQuery(d, tau, gamma, ell=ell)
        ex = explicit_dim(q)
        e = existence_dim(q)
        assert ex.dim >= e
        lb = lower_dim(q)
        if lb.applicable:
            assert e >= lb.value


@settings(max_examples=100, deadline=None)
@given(st.fractions(min_value=Fraction(1, 1000), max_value=1000), st.integers(4, 80))
def test_sqrt_bracket(x, bits):
    lo, hi = sqrt_bracket(x, bits)
    assert lo * lo <= x <= hi * hi
    assert hi - lo <= Fraction(1, 2**bits)


def test_to_fraction_uses_decimal_repr():
    assert to_fraction(0.05) == Fraction(1, 20)
    assert to_fraction("0.9") == Fraction(9, 10)
    assert ceil_log2(Fraction(64)) == 6 and ceil_log2(Fraction(65)) == 7
