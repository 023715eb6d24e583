from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corramp.errors import ParameterError
from corramp.gf2k import find_irreducible, gf_inv, gf_mul, gf_mul_array, gf_pow, is_irreducible


def clmul(a: int, c: int) -> int:
    r = 0
    while c:
        if c & 1:
            r ^= a
        a <<= 1
        c >>= 1
    return r


def pmod(a: int, m: int) -> int:
    dm = m.bit_length() - 1
    while a and a.bit_length() - 1 >= dm:
        a ^= m << (a.bit_length() - 1 - dm)
    return a


def irreducible_by_trial(m: int) -> bool:
    deg = m.bit_length() - 1
    for g in range(2, 1 << (deg // 2 + 1)):
        if pmod(m, g) == 0:
            return False
    return True


def test_smallest_irreducibles_match_trial_division():
    for b in range(1, 13):
        f = find_irreducible(b)
        expected = next(m for m in range(1 << b, 1 << (b + 1)) if irreducible_by_trial(m))
        assert f.modulus == expected


def test_known_moduli():
    assert find_irreducible(2).modulus == 0b111
    assert find_irreducible(3).modulus == 0b1011
    assert find_irreducible(8).modulus == 0x11B


def test_rabin_agrees_with_trial_division():
    for m in range(2, 1 << 11):
        assert is_irreducible(m) == irreducible_by_trial(m), m


def test_degree_range():
    with pytest.raises(ParameterError):
        find_irreducible(0)
    with pytest.raises(ParameterError):
        find_irreducible(65)
    assert find_irreducible(64).b == 64


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 64), st.data())
def test_mul_matches_reference(b, data):
    f = find_irreducible(b)
    a = data.draw(st.integers(0, f.order - 1))
    c = data.draw(st.integers(0, f.order - 1))
    assert gf_mul(a, c, f) == pmod(clmul(a, c), f.modulus)


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 16), st.data())
def test_field_axioms(b, data):
    f = find_irreducible(b)
    a, c, e = (data.draw(st.integers(0, f.order - 1)) for _ in range(3))
    assert gf_mul(a, c, f) == gf_mul(c, a, f)
    assert gf_mul(a, c ^ e, f) == gf_mul(a, c, f) ^ gf_mul(a, e, f)
    assert gf_mul(gf_mul(a, c, f), e, f) == gf_mul(a, gf_mul(c, e, f), f)
    if a:
        assert gf_mul(a, gf_inv(a, f), f) == 1
        assert gf_pow(a, f.order - 1, f) == 1


def test_inverse_of_zero():
    with pytest.raises(ZeroDivisionError):
        gf_inv(0, find_irreducible(4))


def test_vectorized_matches_scalar():
    f = find_irreducible(13)
    rng = np.random.default_rng(3)
    a = rng.integers(0, f.order, 500, dtype=np.uint64)
    c = rng.integers(0, f.order, 500, dtype=np.uint64)
    got = gf_mul_array(a, c, f)
    assert [int(v) for v in got] == [gf_mul(int(x), int(y), f) for x, y in zip(a, c)]
