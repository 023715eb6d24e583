from __future__ import annotations

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corramp.detector import (
    DetectorConstants,
    brute_force_pairs,
    bucket_aggregate,
    derive_params,
    detect_outliers,
    gemm,
    identity_params,
    overflow_guard,
    toy_params,
)
from corramp.errors import CapacityError, ParameterError
from support import planted_collections

CONSTS = DetectorConstants(0.5, 0.9, 0.1, 61, 1.0)


def test_sigma_matches_extended_precision():
    p = derive_params(10**6, 100, 0.2, 0.05, CONSTS, strict=False)
    with mpmath.workdps(50):
        sigma = mpmath.mpf("0.99") * mpmath.mpf("0.5") * mpmath.mpf("0.9") / 245
    assert p.sigma == pytest.approx(float(sigma), rel=1e-14)
    assert abs(p.sigma - 0.00181836) < 1e-8


def test_violations_are_named_not_clamped():
    p = derive_params(10**6, 100, 0.2, 0.05, CONSTS, strict=False)
    names = " ".join(p.violations)
    assert all(f"{a} assumption" in names for a in ("dimension", "tau-range", "separation"))
    with pytest.raises(ParameterError, match="dimension assumption"):
        derive_params(10**6, 100, 0.2, 0.05, CONSTS)


def test_threshold_never_rounds_up():
    # a regime where all assumptions hold: huge n, tau close to tau_max
    consts = DetectorConstants(0.5, 0.9, 0.1, 61, 1.0)
    p = derive_params(10**400, 100, 0.85, 0.8, consts, strict=False)
    assert p.p >= 1
    with mpmath.workdps(80):
        exact = (
            mpmath.mpf(10) ** (400 * 2 * mpmath.mpf(p.sigma))
            * (mpmath.mpf("0.8") * mpmath.power(2, mpmath.mpf(p.log2_gamma))) ** p.p
            * p.D
        )
    assert p.threshold <= exact * (1 + mpmath.mpf(10) ** -12)


def test_constant_ranges():
    bad = DetectorConstants(1.5, 0.9, 0.1, 10, 1.0)
    v = bad.violations()
    assert any("epsilon" in x for x in v) and any("C > 60" in x for x in v)
    assert not DetectorConstants(0.5, 0.9, 0.1, 10, 1.0, toy=True).violations()


def test_gemm_small():
    out = gemm(np.array([[1, 2], [3, 4]]), np.array([[5, 6], [7, 8]]))
    assert out.tolist() == [[19, 22], [43, 50]]


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 40), st.integers(1, 300), st.integers(1, 40), st.integers(1, 3000), st.integers(0, 2**31))
def test_gemm_matches_int64_matmul(m, k, n, bound, seed):
    rng = np.random.default_rng(seed)
    A = rng.integers(-bound, bound + 1, (m, k))
    B = rng.integers(-bound, bound + 1, (k, n))
    ref = A.astype(np.int64) @ B.astype(np.int64)
    assert np.array_equal(gemm(A, B), ref)
    assert np.array_equal(gemm(A, B, backend="naive"), ref)


def test_gemm_int8_path_accumulates_exactly():
    A = np.full((3, 70000), 127, dtype=np.int8)
    B = np.full((70000, 2), -127, dtype=np.int8)
    assert np.all(gemm(A, B) == -127 * 127 * 70000)


def test_overflow_guard():
    overflow_guard(2**20, 2**20, 2**21)
    with pytest.raises(CapacityError):
        overflow_guard(2**30, 2**30, 4)


def test_bucket_aggregate():
    V = np.arange(10).reshape(5, 2)
    assert bucket_aggregate(V, 2).tolist() == [[2, 4], [10, 12], [8, 9]]


def test_brute_force_matches_matmul():
    X, Y = planted_collections(3, 30, 100, 10)
    ips = X.astype(np.int64) @ Y.T.astype(np.int64)
    expect = sorted((int(i), int(j), int(ips[i, j])) for i, j in zip(*np.nonzero(np.abs(ips) >= 60)))
    assert brute_force_pairs(X, Y, 60) == expect


@pytest.mark.parametrize("mode", ["identity", "toy"])
@pytest.mark.parametrize("seed", range(6))
def test_detector_equals_brute_force(mode, seed):
    X, Y = planted_collections(seed, 48, 128, 16)
    rep = detect_outliers(X, Y, 0.5, 0.25, amplifier_mode=mode)
    assert rep.outliers == brute_force_pairs(X, Y, 64)
    assert len(rep.outliers) >= 2


def test_threads_give_identical_results():
    X, Y = planted_collections(11, 64, 256, 40)
    a = detect_outliers(X, Y, 0.5, 0.25, threads=1)
    b = detect_outliers(X, Y, 0.5, 0.25, threads=3)
    assert a.to_dict() == b.to_dict()


def test_tensor_sample_baseline_finds_planted_pairs():
    X, Y = planted_collections(4, 12, 64, 0)
    rep = detect_outliers(X, Y, 0.9, 0.3, amplifier_mode="tensor-sample", seed=1)
    assert rep.outliers == brute_force_pairs(X, Y, 58)
    assert not rep.params.certified


def test_explicit_mode_raises_at_desk_scale():
    X, Y = planted_collections(0, 8, 32, 0)
    with pytest.raises(ParameterError):
        detect_outliers(X, Y, 0.5, 0.25, consts=CONSTS, amplifier_mode="explicit")


def test_unknown_mode():
    X, Y = planted_collections(0, 4, 8, 0)
    with pytest.raises(ParameterError):
        detect_outliers(X, Y, 0.5, 0.25, amplifier_mode="magic")


def test_identity_threshold():
    p = identity_params(10, 100, 0.5, 0.255)
    assert p.threshold == 25 and p.abs_compare and p.s == 1


def test_toy_params_certified_bucket():
    p, sched = toy_params(64, 128, 0.5, 0.25)
    assert p.certified and p.s >= 1
    assert p.D == sched.output_dim
    with pytest.raises(ParameterError):
        toy_params(64, 128, 0.5, 0.25, s=p.s + 1)


def test_uncorrelated_instance_flags_nothing():
    from corramp.rng import SplitMix64

    rng = SplitMix64(77)
    X, Y = rng.sign_rows(64, 256), rng.sign_rows(64, 256)
    rep = detect_outliers(X, Y, 0.6, 0.3)
    assert rep.outliers == [] and rep.flagged_tiles == 0
