from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corramp.amplifier import (
    AmplifierParams,
    CoordStats,
    amplified_inner,
    amplify,
    amplify_coord,
    amplify_many,
    complete_schedule,
    copy_truncate,
    definition_bounds,
    derive_schedule,
    phi_interval,
)
from corramp.errors import CapacityError, ParameterError
from corramp.gf2k import find_irreducible
from corramp.rotgraph import CompleteGraph, base_graph
from corramp.rng import SplitMix64


def naive_amplify(x, sched):
    """Reference evaluator using scalar rotation-map calls only."""
    d = len(x)
    y = [int(x[j % d]) for j in range(1 << sched.k)]
    for lv in sched.levels:
        nxt = []
        for u in range(lv.D):
            for i in range(lv.Delta):
                v, _ = lv.graph.rot(u, i)
                nxt.append(y[u % lv.d_in] * y[v % lv.d_in])
        y = nxt
    return np.array([y[j % len(y)] for j in range(1 << sched.K)], dtype=np.int8)


def toy_two_level():
    g = base_graph(find_irreducible(2), 1)
    return derive_schedule(AmplifierParams(3, 0.9, 2.25, 2, mode="toy", level_graphs=(CompleteGraph(4), g), k=2))


def test_theoretical_schedule_example():
    s = derive_schedule(AmplifierParams(2, 0.5, 4, 1))
    assert (s.k, s.K) == (6, 592)
    lv = s.levels[0]
    assert (lv.b, lv.t) == (12, 1)
    assert lv.D == 2**192 and lv.Delta == 2**48


def test_theoretical_rejects_small_K():
    with pytest.raises(ParameterError, match="violated"):
        derive_schedule(AmplifierParams(2, 0.5, 4, 1, K=591))


def test_toy_needs_graphs():
    with pytest.raises(ParameterError):
        derive_schedule(AmplifierParams(2, 0.5, 4, 1, mode="toy"))


def test_copy_truncate():
    x = np.array([1, -1, 1], dtype=np.int8)
    assert copy_truncate(x, 3).tolist() == [1, -1, 1, 1, -1, 1, 1, -1]


def test_matches_naive_reference():
    sched = toy_two_level()
    rng = SplitMix64(5)
    for _ in range(5):
        x = rng.sign_rows(1, 3)[0]
        assert np.array_equal(amplify(x, sched), naive_amplify(x, sched))


def test_coordinate_evaluation_and_touches():
    sched = toy_two_level()
    x = SplitMix64(1).sign_rows(1, 3)[0]
    full = amplify(x, sched)
    for j in range(sched.output_dim):
        st_ = CoordStats([0, 0])
        assert amplify_coord(x, sched, j, st_) == full[j]
        assert st_.input_touches <= sched.p


def test_coordinate_on_theoretical_schedule():
    sched = derive_schedule(AmplifierParams(2, 0.5, 4, 1))
    x = np.array([1, -1], dtype=np.int8)
    st_ = CoordStats([0])
    v = amplify_coord(x, sched, 2**591 + 12345, st_)
    assert v in (1, -1) and st_.input_touches == 2 and st_.rot_evals == [1]


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32))
def test_multiplicative_identity(seed):
    sched = complete_schedule(12, 0.5, 2, ell=2)
    X = SplitMix64(seed).sign_rows(2, 12)
    fx, fy = amplify(X[0], sched), amplify(X[1], sched)
    assert np.array_equal(fx * fy, amplify(X[0] * X[1], sched))
    assert amplified_inner(X[0], X[1], sched) == int(fx.astype(np.int64) @ fy)


def test_complete_graphs_square_exactly():
    # with lambda = 0 every level squares the padded inner product exactly
    sched = complete_schedule(16, 0.5, 2, ell=2)
    X = SplitMix64(9).sign_rows(20, 16)
    F = amplify_many(X, sched)
    for a in range(0, 20, 2):
        ip = int(X[a].astype(np.int64) @ X[a + 1])
        assert Fraction(int(F[a].astype(np.int64) @ F[a + 1]), sched.output_dim) == Fraction(ip, 16) ** 4


def test_phi_interval_contains_measured_values():
    g = base_graph(find_irreducible(5), 1)
    sched = derive_schedule(AmplifierParams(60, 0.9, 1.69, 1, mode="toy", level_graphs=(g,)))
    assert sched.certified
    X = SplitMix64(2).sign_rows(60, 60)
    F = amplify_many(X, sched)
    for a in range(0, 60, 2):
        ip = int(X[a].astype(np.int64) @ X[a + 1])
        lo, hi = phi_interval(sched, ip)
        phi = Fraction(int(F[a].astype(np.int64) @ F[a + 1]), sched.output_dim)
        assert lo <= phi <= hi


def test_phi_interval_rejects_impossible_ip():
    sched = complete_schedule(4, 0.5, 2)
    with pytest.raises(ParameterError):
        phi_interval(sched, 3)


def test_definition_bounds_shape():
    sched = complete_schedule(10, Fraction(1, 2), Fraction(2))
    lo, hi = definition_bounds(sched, 2)  # |nu| = 1/5 < tau, cap (tau gamma)^2 = 1
    assert (lo, hi) == (Fraction(-1), Fraction(1))
    lo, hi = definition_bounds(sched, 10)
    assert (lo, hi) == (Fraction(1, 4), Fraction(4))


def test_capacity_guard():
    sched = derive_schedule(AmplifierParams(2, 0.5, 4, 1))
    with pytest.raises(CapacityError):
        amplify(np.array([1, 1], dtype=np.int8), sched)


def test_ledger_lists_levels():
    led = toy_two_level().ledger()
    assert [lv["i"] for lv in led["levels"]] == [0, 1]
    assert led["p"] == 4
