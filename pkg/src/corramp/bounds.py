"""Output-dimension calculators for correlation amplifiers.

Every returned dimension is exact: real parameters are converted to
``Fraction`` through their decimal representation (``0.05`` is 1/20), and
irrational quantities such as ``gamma ** 0.5`` are bracketed by rationals and
refined until the integer answer is determined. Floats appear only in
logarithmic diagnostics. ``log`` is base 2 throughout, ``ln`` is natural.

The lower bound rests on two facts from the rank method: a symmetric N x N
matrix with unit diagonal and off-diagonal entries at most 1/sqrt(N) in
absolute value has rank at least N/2, and entrywise k-th powers of a rank-D'
matrix have rank at most C(D'+k-1, k). Only their composite consequence,
:func:`lower_dim`, is exposed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import mpmath

from .errors import ParameterError


def to_fraction(x) -> Fraction:
    """Exact rational for ints, Fractions, decimal strings and floats (via repr)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, Rational):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(repr(float(x)))


def ceil_fraction(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


def ceil_log2(x: Fraction) -> int:
    """Smallest K >= 0 with 2^K >= x."""
    c = ceil_fraction(x)
    return max(0, (c - 1).bit_length())


def sqrt_bracket(x: Fraction, bits: int) -> tuple[Fraction, Fraction]:
    """Rationals lo <= sqrt(x) <= hi with hi - lo <= 2^-bits (equal when exact)."""
    if x < 0:
        raise ParameterError("square root of a negative number")
    num, den = x.numerator, x.denominator
    scale = 1 << bits
    prod = num * den * scale * scale
    r = math.isqrt(prod)
    lo = Fraction(r, den * scale)
    hi = lo if r * r == prod else Fraction(r + 1, den * scale)
    return lo, hi


@dataclass(frozen=True)
class DimQuery:
    d: int
    tau: Fraction | float
    gamma: Fraction | float
    p: int | None = None
    ell: int | None = None

    def __post_init__(self):
        tau, gamma = to_fraction(self.tau), to_fraction(self.gamma)
        if not 0 < tau < 1:
            raise ParameterError(f"need 0 < tau < 1, got {self.tau}")
        if gamma <= 1:
            raise ParameterError(f"need gamma > 1, got {self.gamma}")
        if self.d < 1:
            raise ParameterError("need d >= 1")
        p = self.p
        if p is None and self.ell is not None:
            p = 1 << self.ell if self.ell >= 0 else None
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "p", p)

    @property
    def strength(self) -> int:
        if self.p is None or self.p < 1:
            raise ParameterError("query needs a positive strength p (or ell)")
        return self.p


def existence_dim(q: DimQuery) -> int:
    """ceil(3d (gamma^p - 1)^-2 (gamma/tau)^(2p)): random tensor sampling succeeds."""
    p = q.strength
    g, t = q.gamma, q.tau
    value = 3 * q.d * (g**p - 1) ** -2 * (g / t) ** (2 * p)
    return ceil_fraction(value)


@dataclass(frozen=True)
class ExplicitDim:
    K: int
    log2_sharp: float

    @property
    def dim(self) -> int:
        return 1 << self.K


def _explicit_rhs(d: int, tau: Fraction, gamma: Fraction, ell: int, sqrt_g: Fraction) -> Fraction:
    inv = 1 / (1 - 1 / sqrt_g)
    return d * (1024 * inv) ** (20 * ell + 1) * (gamma / tau) ** (60 * 2**ell)


def explicit_rhs_log2(d: int, tau, gamma, ell: int) -> float:
    """log2 of the explicit-construction output-dimension requirement."""
    tau, gamma = to_fraction(tau), to_fraction(gamma)
    with mpmath.workdps(50):
        g = mpmath.mpf(gamma.numerator) / gamma.denominator
        t = mpmath.mpf(tau.numerator) / tau.denominator
        inv = 1 / (1 - 1 / mpmath.sqrt(g))
        val = (
            mpmath.log(d, 2)
            + (20 * ell + 1) * mpmath.log(1024 * inv, 2)
            + 60 * 2**ell * mpmath.log(g / t, 2)
        )
        return float(val)


def min_output_exponent(d: int, tau, gamma, ell: int) -> int:
    """Smallest K with 2^K >= d (2^10 (1 - gamma^-1/2)^-1)^(20 ell + 1) (gamma/tau)^(60 2^ell)."""
    tau, gamma = to_fraction(tau), to_fraction(gamma)
    bits = 64
    while True:
        lo, hi = sqrt_bracket(gamma, bits)
        # the requirement decreases as sqrt(gamma) grows
        k_small = ceil_log2(_explicit_rhs(d, tau, gamma, ell, hi))
        k_large = ceil_log2(_explicit_rhs(d, tau, gamma, ell, lo))
        if k_small == k_large:
            return k_small
        bits *= 2
        if bits > 1 << 16:
            # the requirement is a power of two to within 2^-65536; take the safe side
            return k_large


def sharp_output_log2(d: int, tau, gamma, ell: int) -> float:
    """log2 of the tighter requirement obtained with the minimal padded input size."""
    tau, gamma = to_fraction(tau), to_fraction(gamma)
    with mpmath.workdps(50):
        g = mpmath.mpf(gamma.numerator) / gamma.denominator
        t = mpmath.mpf(tau.numerator) / tau.denominator
        inv = 1 / (1 - 1 / mpmath.sqrt(g))
        val = (
            -8
            + mpmath.log(d, 2)
            + (20 * ell + 1) * mpmath.log(1024 * inv, 2)
            + mpmath.log(g / t, 2)
            + 2**ell * mpmath.log(g**60 / t**40, 2)
            + mpmath.log(t**20 / g**30, 2)
        )
        return float(val)


def explicit_dim(q: DimQuery) -> ExplicitDim:
    """Smallest power of two meeting the explicit construction's requirement."""
    if q.ell is None:
        raise ParameterError("explicit_dim needs ell")
    if q.ell < 1:
        raise ParameterError("ell must be >= 1 so that p = 2^ell is even")
    K = min_output_exponent(q.d, q.tau, q.gamma, q.ell)
    return ExplicitDim(K, sharp_output_log2(q.d, q.tau, q.gamma, q.ell))


@dataclass(frozen=True)
class LowerBound:
    applicable: bool
    value: int | None = None
    violated: str | None = None
    p_cap: float | None = None


def lower_dim(q: DimQuery) -> LowerBound:
    """ceil((1/5)(gamma tau)^-p) when (gamma tau)^p <= 1/100 and p is below the cap."""
    p = q.strength
    gt = q.gamma * q.tau
    eps = gt**p
    if eps > Fraction(1, 100):
        return LowerBound(False, violated="(gamma*tau)^p <= 1/100")
    if gt >= 1:
        return LowerBound(False, violated="gamma*tau < 1")
    tau = float(q.tau)
    p_cap = math.log2(math.e) * tau * tau * q.d / (8 * -math.log2(float(gt)))
    if p > p_cap:
        return LowerBound(
            False, violated="p <= (log e) tau^2 d / (8 log(1/(gamma*tau)))", p_cap=p_cap
        )
    return LowerBound(True, value=ceil_fraction(1 / (5 * eps)), p_cap=p_cap)


def hoeffding_tail(D: int, c: float, range_width: float) -> float:
    """exp(-2 c^2 / (D w^2)) for D independent variables of range width w."""
    if c <= 0 or range_width <= 0 or D < 1:
        raise ParameterError("need c > 0, range_width > 0 and D >= 1")
    return math.exp(-2.0 * c * c / (D * range_width * range_width))
