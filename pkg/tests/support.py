"""Shared grids and instance builders for the tests."""

from __future__ import annotations

from fractions import Fraction
from itertools import product


def dimension_grid():
    """100 points: 5 gammas x 5 taus x (4 (d, ell) combos), gamma in [1.1, 4], tau in [0.05, 0.9]."""
    gammas = [Fraction(11, 10), Fraction(3, 2), Fraction(2), Fraction(3), Fraction(4)]
    taus = [Fraction(1, 20), Fraction(1, 5), Fraction(2, 5), Fraction(7, 10), Fraction(9, 10)]
    combos = [(20000, 1), (20000, 2), (100, 3), (5000, 1)]
    return [(d, tau, g, ell) for g, tau, (d, ell) in product(gammas, taus, combos)]


def planted_collections(seed: int, n: int, d: int, flips: int, pairs: int = 2):
    """Two uniform collections with ``pairs`` planted correlated (possibly negated) rows."""
    from corramp.rng import SplitMix64

    rng = SplitMix64(seed)
    X = rng.sign_rows(n, d)
    Y = rng.sign_rows(n, d)
    xs = rng.sample_distinct(n, pairs)
    ys = rng.sample_distinct(n, pairs)
    for a, b in zip(xs, ys):
        row = X[a].copy()
        if flips:
            row[rng.sample_distinct(d, flips)] *= -1
        Y[b] = row if rng.below(2) else -row
    return X, Y
