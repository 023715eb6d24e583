"""Arithmetic in GF(2^b) for 1 <= b <= 64.

Elements are b-bit integers with the coefficient of x^i at bit i; addition is
XOR. The modulus is chosen deterministically: the smallest (as an integer)
monic degree-b polynomial that passes Rabin's irreducibility test.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from .errors import ParameterError


@dataclass(frozen=True)
class FieldSpec:
    b: int
    modulus: int

    @property
    def order(self) -> int:
        return 1 << self.b

    @property
    def low(self) -> int:
        """The modulus without its leading x^b term."""
        return self.modulus ^ (1 << self.b)


def _mulmod(a: int, c: int, modulus: int, b: int) -> int:
    return int(kernels.gf_mul_raw(a, c, modulus ^ (1 << b), b))


def _pmod(a: int, m: int) -> int:
    dm = m.bit_length() - 1
    while a.bit_length() - 1 >= dm:
        a ^= m << (a.bit_length() - 1 - dm)
    return a


def _pgcd(a: int, c: int) -> int:
    while c:
        a, c = c, _pmod(a, c)
    return a


def _prime_factors(n: int) -> list[int]:
    out, p = [], 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


def _x_pow_2_pow(e: int, modulus: int, b: int) -> int:
    """x^(2^e) mod modulus by e squarings."""
    h = _pmod(0b10, modulus)
    for _ in range(e):
        h = _mulmod(h, h, modulus, b)
    return h


def is_irreducible(modulus: int) -> bool:
    """Rabin's test for a polynomial over GF(2) of degree >= 1."""
    b = modulus.bit_length() - 1
    if b < 1:
        return False
    x = _pmod(0b10, modulus)
    if _x_pow_2_pow(b, modulus, b) != x:
        return False
    for r in _prime_factors(b):
        h = _x_pow_2_pow(b // r, modulus, b)
        if _pgcd(h ^ x, modulus) != 1:
            return False
    return True


@lru_cache(maxsize=None)
def find_irreducible(b: int) -> FieldSpec:
    if not 1 <= b <= 64:
        raise ParameterError(f"extension degree must be in [1, 64], got {b}")
    for modulus in range(1 << b, 1 << (b + 1)):
        if is_irreducible(modulus):
            return FieldSpec(b, modulus)
    raise AssertionError("unreachable: irreducibles exist in every degree")


def gf_mul(a: int, c: int, f: FieldSpec) -> int:
    return int(kernels.gf_mul_raw(a, c, f.low, f.b))


def gf_pow(a: int, e: int, f: FieldSpec) -> int:
    result, base = 1, a
    while e:
        if e & 1:
            result = gf_mul(result, base, f)
        base = gf_mul(base, base, f)
        e >>= 1
    return result


def gf_inv(a: int, f: FieldSpec) -> int:
    if a == 0:
        raise ZeroDivisionError("0 has no inverse")
    return gf_pow(a, f.order - 2, f)


def gf_mul_array(a, c, f: FieldSpec) -> np.ndarray:
    """Elementwise product of two broadcastable uint64 arrays."""
    a, c = np.broadcast_arrays(np.asarray(a, dtype=np.uint64), np.asarray(c, dtype=np.uint64))
    shape = a.shape
    a = np.ascontiguousarray(a.ravel())
    c = np.ascontiguousarray(c.ravel())
    out = np.empty_like(a)
    kernels.gf_mul_vec(a, c, f.low, f.b, out)
    return out.reshape(shape)
