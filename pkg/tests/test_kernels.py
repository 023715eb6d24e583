from __future__ import annotations

import numpy as np
import pytest

from corramp import _kernels_py as py
from corramp import kernels
from corramp.gf2k import find_irreducible
from corramp.signs import pack, unpack

BACKENDS = [py]
try:
    from corramp import _ckernels

    BACKENDS.append(_ckernels)
except ImportError:  # pragma: no cover - depends on the build
    pass


@pytest.mark.parametrize("impl", BACKENDS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
def test_gemm_kernels(impl):
    rng = np.random.default_rng(0)
    A = rng.integers(-3, 4, (17, 301)).astype(np.int8)
    B = rng.integers(-3, 4, (13, 301)).astype(np.int8)
    ref = A.astype(np.int64) @ B.T.astype(np.int64)
    out = np.zeros((17, 13), dtype=np.int64)
    impl.gemm_nt_i8(A, B, out, 64)
    assert np.array_equal(out, ref)
    out = np.zeros((17, 13), dtype=np.int64)
    impl.gemm_nt_i64(A.astype(np.int64) * 1000, B.astype(np.int64), out, 50)
    assert np.array_equal(out, ref * 1000)


@pytest.mark.parametrize("impl", BACKENDS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
def test_popcount_kernel(impl):
    rng = np.random.default_rng(1)
    X = rng.choice(np.array([-1, 1], dtype=np.int8), (9, 131))
    Y = rng.choice(np.array([-1, 1], dtype=np.int8), (7, 131))
    out = np.zeros((9, 7), dtype=np.int64)
    impl.popcount_ip(pack(X), pack(Y), 131, out)
    assert np.array_equal(out, X.astype(np.int64) @ Y.T)


@pytest.mark.parametrize("impl", BACKENDS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
def test_gf_kernels_agree(impl):
    f = find_irreducible(61)
    rng = np.random.default_rng(2)
    a = rng.integers(0, f.order, 300, dtype=np.uint64)
    c = rng.integers(0, f.order, 300, dtype=np.uint64)
    out = np.empty_like(a)
    impl.gf_mul_vec(a, c, f.low, f.b, out)
    scalar = [py.gf_mul(int(x), int(y), f.low, f.b) for x, y in zip(a, c)]
    assert [int(v) for v in out] == scalar
    assert all(int(impl.gf_mul(int(x), int(y), f.low, f.b)) == s for x, y, s in zip(a, c, scalar))


def test_pack_unpack():
    rng = np.random.default_rng(3)
    X = rng.choice(np.array([-1, 1], dtype=np.int8), (5, 130))
    P = pack(X)
    assert P.shape == (5, 3) and P.dtype == np.uint64
    assert np.array_equal(unpack(P, 130), X)
    assert int(P[0, 2]) >> 2 == 0  # pad bits are zero


def test_backend_name():
    assert kernels.BACKEND in ("compiled", "python")


def test_forced_fallback_subprocess():
    import subprocess
    import sys

    code = "import corramp.kernels as k; print(k.BACKEND)"
    out = subprocess.run(
        [sys.executable, "-c", code], env={**__import__("os").environ, "CORRAMP_PURE_PYTHON": "1"},
        capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"
