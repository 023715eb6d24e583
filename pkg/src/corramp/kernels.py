"""Kernel dispatch: the compiled extension when importable, else numpy.

Set ``CORRAMP_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("CORRAMP_PURE_PYTHON"):
    impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _ckernels as impl
        BACKEND = "compiled"
    except ImportError:
        impl = _kernels_py
        BACKEND = "python"

gemm_nt_i8 = impl.gemm_nt_i8
gemm_nt_i64 = impl.gemm_nt_i64
popcount_ip = impl.popcount_ip
gf_mul_raw = impl.gf_mul
gf_mul_vec = impl.gf_mul_vec
