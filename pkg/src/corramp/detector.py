"""Outlier-pair detection by amplification, bucketing and one matrix product.

The four steps: amplify every vector; sum the amplified vectors in
contiguous buckets of ``s``; multiply the bucket-sum matrices; brute-force
the pairs inside each bucket pair whose product entry exceeds the detection
threshold. Reported pairs are always re-verified in the original dimension.

Amplifier modes:

``identity``
    no amplification (p = 1, s = 1, absolute comparison against tau*d).
``toy``
    complete-graph or caller-supplied toy schedule; the bucket size and
    threshold are certified from the exact range of the amplified inner
    product over every possible input inner product.
``tensor-sample``
    seeded random sampling of p-fold coordinate products, sized by the
    existence bound; a probabilistic baseline only.
``explicit``
    the zigzag-family schedule; the output dimension is astronomically large,
    so materialization fails with a capacity error at desk scale.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable

import mpmath
import numpy as np

from . import bounds, kernels
from .amplifier import (
    AmplifierParams,
    AmplifierSchedule,
    amplify_many,
    complete_schedule,
    derive_schedule,
    phi_interval,
)
from .bounds import to_fraction
from .errors import CapacityError, ParameterError
from .rng import SplitMix64
from .signs import as_signs, pack

MODES = ("explicit", "toy", "identity", "tensor-sample")
TOY_MAX_K = 20  # largest log2 output dimension tried by the default toy schedule
OVERFLOW_LIMIT = 1 << 62


@dataclass(frozen=True)
class DetectorConstants:
    epsilon: float
    tau_max: float
    delta: float
    C: float
    alpha: float = 1.0
    toy: bool = False

    def violations(self) -> list[str]:
        out = []
        if not 0 < self.epsilon < 1:
            out.append("constant range: 0 < epsilon < 1")
        if not 0 < self.tau_max < 1:
            out.append("constant range: 0 < tau_max < 1")
        if not 0 < self.alpha <= 1:
            out.append("constant range: 0 < alpha <= 1")
        if not 0 < self.delta < self.alpha:
            out.append("constant range: 0 < delta < alpha")
        if not self.C > 60 and not self.toy:
            out.append("constant range: C > 60")
        return out


@dataclass
class DetectorParams:
    n: int
    d: int
    rho: Fraction
    tau: Fraction
    mode: str
    s: int
    p: int
    D: int
    threshold: int
    abs_compare: bool = False
    sigma: float | None = None
    gamma: float | None = None
    log2_gamma: float | None = None
    c1: float | None = None
    c2: float | None = None
    certified: bool = False
    violations: list[str] = field(default_factory=list)
    checks: dict = field(default_factory=dict)
    consts: DetectorConstants | None = None

    def ledger(self) -> dict:
        out = {
            "n": self.n,
            "d": self.d,
            "rho": str(self.rho),
            "tau": str(self.tau),
            "mode": self.mode,
            "s": self.s,
            "p": self.p,
            "D": _big(self.D),
            "threshold": _big(self.threshold),
            "abs_compare": self.abs_compare,
            "certified": self.certified,
        }
        for key in ("sigma", "gamma", "log2_gamma", "c1", "c2"):
            val = getattr(self, key)
            if val is not None:
                out[key] = val
        if self.consts is not None:
            out["constants"] = asdict(self.consts)
        out["violations"] = list(self.violations)
        out["checks"] = dict(self.checks)
        return out


def _big(v):
    if isinstance(v, int) and v.bit_length() > 53:
        return str(v)
    return v


def _mp(x: Fraction) -> mpmath.mpf:
    return mpmath.mpf(x.numerator) / x.denominator


def derive_params(n: int, d: int, rho, tau, consts: DetectorConstants, strict: bool = True) -> DetectorParams:
    """Bucket size, strength, output dimension and threshold for the theoretical algorithm.

    With ``strict=False`` violations are collected instead of raised and every
    quantity that can still be computed is filled in.
    """
    rho, tau = to_fraction(rho), to_fraction(tau)
    violations = list(consts.violations())
    if n < 2 or d < 1:
        violations.append("instance: n >= 2 and d >= 1")
    if not 0 < tau < rho <= 1:
        violations.append("instance: 0 < tau < rho <= 1")
    if violations and strict:
        raise ParameterError(violations[0])

    checks: dict = {}
    with mpmath.workdps(60):
        eps, tmax = mpmath.mpf(repr(consts.epsilon)), mpmath.mpf(repr(consts.tau_max))
        delta, C, alpha = (mpmath.mpf(repr(v)) for v in (consts.delta, consts.C, consts.alpha))
        N = mpmath.mpf(n)
        sigma = 0.99 * eps * (alpha - delta) / (4 * C + 1)
        s = max(1, int(mpmath.floor(N**sigma)))
        log2_gamma = -eps * mpmath.log(tmax, 2) / 100000
        gamma = mpmath.power(2, log2_gamma)
        c1 = tmax ** (-eps / 100000)
        c2 = (1 - 0.99 * eps / (4 * C + 1)) * (alpha - delta) / C
        t, r = _mp(tau), _mp(rho)

        if not d <= N**delta:
            violations.append("dimension assumption: d <= n^delta")
        if not (c1 * N ** (-c2) <= t <= tmax):
            violations.append("tau-range assumption: c1 n^-c2 <= tau <= tau_max")
        if 0 < tau < 1 and 0 < rho < 1:
            if not mpmath.log(r) / mpmath.log(t) <= 1 - eps:
                violations.append("separation assumption: log_tau(rho) <= 1 - epsilon")
        elif rho == 1:
            checks["separation assumption"] = "rho = 1 (log_tau(rho) = 0)"

        p = D = threshold = None
        if 0 < tau < 1:
            window = ((1 - sigma) * alpha - delta) * mpmath.log(N, 2) / (C * mpmath.log(gamma / t, 2))
            checks["p_window_upper"] = float(window)
            if window >= 1:
                p = 1 << int(mpmath.floor(mpmath.log(window, 2)))
            else:
                violations.append("tau-range assumption: p window empty (needs tau >= c1 n^-c2)")
        if p is not None:
            log2_D = int(mpmath.floor(mpmath.log(d, 2) + C * p * mpmath.log(gamma / t, 2)))
            D = 1 << max(0, log2_D)
            checks["D_le_2(n/s)^alpha"] = bool(D <= 2 * (N / s) ** alpha)
            value = N ** (2 * sigma) * (t * gamma) ** p * D
            # directed downward so rounding can only add flagged tiles
            threshold = int(mpmath.floor(value * (1 - mpmath.mpf(10) ** -45)))
            if rho < 1:
                need = (1 + 2 * sigma * mpmath.log(N, 2)) / mpmath.log(r / (t * gamma**2), 2)
                checks["p_need"] = float(need)
                checks["outlier_p_ok"] = bool(p > need)
            K_req_log2 = bounds.explicit_rhs_log2(d, tau, float(gamma), max(1, p.bit_length() - 1))
            checks["explicit_rhs_log2"] = K_req_log2
            checks["explicit_fits_D"] = bool(K_req_log2 <= log2_D)

    if violations and strict:
        raise ParameterError(violations[0])
    return DetectorParams(
        n=n, d=d, rho=rho, tau=tau, mode="explicit",
        s=s, p=p or 0, D=D or 0, threshold=threshold if threshold is not None else 0,
        sigma=float(sigma), gamma=float(gamma), log2_gamma=float(log2_gamma),
        c1=float(c1), c2=float(c2), violations=violations, checks=checks, consts=consts,
    )


def identity_params(n: int, d: int, rho, tau) -> DetectorParams:
    rho, tau = to_fraction(rho), to_fraction(tau)
    _check_instance(rho, tau)
    # |ip| > tau d  <=>  |ip| > floor(tau d)
    threshold = math.floor(tau * d)
    return DetectorParams(
        n=n, d=d, rho=rho, tau=tau, mode="identity", s=1, p=1, D=d,
        threshold=threshold, abs_compare=True, certified=True,
    )


def _check_instance(rho: Fraction, tau: Fraction):
    if not 0 < tau < rho <= 1:
        raise ParameterError(f"need 0 < tau < rho <= 1, got tau={tau}, rho={rho}")


def _inner_grid(d: int, lo: Fraction, hi: Fraction) -> range:
    """Achievable inner products ip (same parity as d) with lo <= ip <= hi."""
    a = max(-d, bounds.ceil_fraction(lo))
    if (a - d) % 2:
        a += 1
    b = min(d, math.floor(hi))
    return range(a, b + 1, 2)


def certify_schedule(n: int, d: int, rho: Fraction, tau: Fraction, schedule: AmplifierSchedule, s: int | None = None):
    """Largest safe bucket size and the exact threshold for a toy schedule.

    Returns ``(s, threshold_fraction, envelope)``; raises ParameterError when
    no bucket size separates outliers from background.
    """
    env = {ip: phi_interval(schedule, ip) for ip in range(-d, d + 1, 2)}
    outl = [env[ip][0] for ip in env if abs(ip) >= rho * d]
    bg = [max(abs(env[ip][0]), abs(env[ip][1])) for ip in env if abs(ip) <= tau * d]
    if not outl:
        raise ParameterError(f"no inner product reaches rho*d = {float(rho * d)}")
    out_lo = min(outl)
    bg_hi = max(bg) if bg else Fraction(0)
    floor_all = min(Fraction(0), min(lo for lo, _ in env.values()))
    s_max = 0
    cand = 1
    while cand <= max(1, n) and out_lo + (cand * cand - 1) * floor_all > cand * cand * bg_hi:
        s_max = cand
        cand += 1
    if s_max == 0:
        raise ParameterError(
            f"toy amplifier cannot separate rho from tau: outlier floor {float(out_lo):.6g} "
            f"<= background ceiling {float(bg_hi):.6g}"
        )
    if s is None:
        s = s_max
    elif s > s_max:
        raise ParameterError(f"bucket size {s} exceeds the certified maximum {s_max}")
    T = s * s * bg_hi * schedule.output_dim
    summary = {
        "outlier_floor": float(out_lo),
        "background_ceiling": float(bg_hi),
        "min_any": float(floor_all),
        "s_max": s_max,
    }
    return s, T, summary


def toy_params(n, d, rho, tau, schedule: AmplifierSchedule | None = None, s: int | None = None, ell: int = 1):
    rho, tau = to_fraction(rho), to_fraction(tau)
    _check_instance(rho, tau)
    if schedule is None:
        schedule, (s, T, summary) = _auto_schedule(n, d, rho, tau, s, ell)
    else:
        s, T, summary = certify_schedule(n, d, rho, tau, schedule, s)
    params = DetectorParams(
        n=n, d=d, rho=rho, tau=tau, mode="toy", s=s, p=schedule.p,
        D=schedule.output_dim, threshold=math.floor(T), certified=True,
        gamma=float(schedule.params.gamma),
    )
    params.checks.update(summary)
    params.checks["schedule"] = schedule.ledger()
    return params, schedule


def _auto_schedule(n, d, rho, tau, s, ell):
    """Complete-graph schedule with the least padding exponent k that certifies.

    Longer cyclic padding shrinks the copy-truncate distortion, so k grows
    from ceil(log2 d) until the envelope separates rho from tau or the output
    would exceed 2^TOY_MAX_K.
    """
    gamma = _geometric_gamma(rho, tau)
    k = max(1, (d - 1).bit_length())
    err = None
    while (k << ell) <= TOY_MAX_K or err is None:
        schedule = complete_schedule(d, tau, gamma, ell=ell, k=k)
        try:
            return schedule, certify_schedule(n, d, rho, tau, schedule, s)
        except ParameterError as exc:
            err = exc
        k += 1
    raise err


def _geometric_gamma(rho: Fraction, tau: Fraction) -> Fraction:
    # bookkeeping only; certification uses the exact envelope
    lo, _ = bounds.sqrt_bracket(rho / tau, 20)
    g = bounds.sqrt_bracket(lo, 20)[0]
    return g if g > 1 else Fraction(1001, 1000)


@dataclass
class TensorSampler:
    index: np.ndarray  # (D, p) input coordinates

    def __call__(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.int8)
        out = X[:, self.index[:, 0]].copy()
        for t in range(1, self.index.shape[1]):
            out *= X[:, self.index[:, t]]
        return out


def tensor_sample_params(n, d, rho, tau, gamma=None, p: int = 2, seed: int = 0, cap: int = 1 << 24):
    rho, tau = to_fraction(rho), to_fraction(tau)
    _check_instance(rho, tau)
    gamma = _geometric_gamma(rho, tau) if gamma is None else to_fraction(gamma)
    if p < 2 or p % 2:
        raise ParameterError("tensor sampling needs an even p >= 2")
    D = bounds.existence_dim(bounds.DimQuery(d, tau, gamma, p=p))
    if D > cap:
        raise CapacityError(f"sampled dimension {D} exceeds cap {cap}")
    rng = SplitMix64(seed)
    raw = rng.block(D * p)
    index = (raw % np.uint64(d)).astype(np.int64).reshape(D, p)
    bg = (tau * gamma) ** p
    out = (rho / gamma) ** p
    s = 1
    while s + 1 <= n and out - (s + 1) ** 2 * bg + bg > (s + 1) ** 2 * bg:
        s += 1
    params = DetectorParams(
        n=n, d=d, rho=rho, tau=tau, mode="tensor-sample", s=s, p=p, D=D,
        threshold=math.floor(s * s * bg * D), gamma=float(gamma), certified=False,
    )
    params.checks["seed"] = seed
    return params, TensorSampler(index)


def bucket_aggregate(V: np.ndarray, s: int) -> np.ndarray:
    """Coordinatewise sums of consecutive groups of s rows (last group may be short)."""
    if s < 1:
        raise ParameterError("bucket size must be >= 1")
    V = np.asarray(V)
    n = V.shape[0]
    if s == 1:
        return V.copy()
    dtype = np.int8 if s <= 127 else np.int16 if s <= 32767 else np.int32
    starts = np.arange(0, n, s)
    return np.add.reduceat(V.astype(dtype), starts, axis=0, dtype=dtype)


def overflow_guard(bound_a: int, bound_b: int, depth: int):
    if int(bound_a) * int(bound_b) * int(depth) >= OVERFLOW_LIMIT:
        raise CapacityError(
            f"entry bound {bound_a} * {bound_b} * depth {depth} reaches 2^62; products may overflow"
        )


def _maxabs(M: np.ndarray) -> int:
    if not M.size:
        return 0
    return max(abs(int(M.max())), abs(int(M.min())))


def gemm(A: np.ndarray, B: np.ndarray, backend: str = "blocked", entry_bound: int | None = None) -> np.ndarray:
    """Exact integer product A @ B (int64) with an overflow guard."""
    A, B = np.asarray(A), np.asarray(B)
    if A.ndim != 2 or B.ndim != 2 or A.shape[1] != B.shape[0]:
        raise ParameterError(f"shape mismatch {A.shape} x {B.shape}")
    depth = A.shape[1]
    if entry_bound is not None:
        ba = bb = int(entry_bound)
    else:
        ba, bb = _maxabs(A), _maxabs(B)
    overflow_guard(ba, bb, depth)
    if backend == "naive":
        return A.astype(np.int64) @ B.astype(np.int64)
    if backend != "blocked":
        raise ParameterError(f"unknown gemm backend {backend!r}")
    out = np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
    if ba <= 127 and bb <= 127:
        kblock = max(1, min(depth, (2**31 - 1) // max(1, ba * bb)))
        kernels.gemm_nt_i8(
            np.ascontiguousarray(A, dtype=np.int8),
            np.ascontiguousarray(B.T, dtype=np.int8),
            out,
            kblock,
        )
    else:
        kernels.gemm_nt_i64(
            np.ascontiguousarray(A, dtype=np.int64),
            np.ascontiguousarray(B.T, dtype=np.int64),
            out,
            256,
        )
    return out


def _ip_block(PX: np.ndarray, PY: np.ndarray, d: int) -> np.ndarray:
    out = np.empty((PX.shape[0], PY.shape[0]), dtype=np.int64)
    kernels.popcount_ip(np.ascontiguousarray(PX), np.ascontiguousarray(PY), d, out)
    return out


def brute_force_pairs(X, Y, threshold_abs: int, chunk: int = 1024) -> list[tuple[int, int, int]]:
    """All (i, j, <x_i, y_j>) with |<x_i, y_j>| >= threshold_abs, sorted by (i, j)."""
    X, Y = as_signs(X), as_signs(Y)
    if X.shape[1] != Y.shape[1]:
        raise ParameterError("X and Y differ in dimension")
    d = X.shape[1]
    PX, PY = pack(X), pack(Y)
    out = []
    for lo in range(0, PX.shape[0], chunk):
        ips = _ip_block(PX[lo : lo + chunk], PY, d)
        ii, jj = np.nonzero(np.abs(ips) >= threshold_abs)
        out.extend((int(i) + lo, int(j), int(ips[i, j])) for i, j in zip(ii, jj))
    return out


@dataclass
class DetectionReport:
    outliers: list[tuple[int, int, int]]
    flagged_tiles: int
    tiles_total: int
    s: int
    params: DetectorParams
    mode: str
    counters: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    def pairs(self) -> set[tuple[int, int]]:
        return {(i, j) for i, j, _ in self.outliers}

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "outliers": [list(t) for t in self.outliers],
            "flagged_tiles": self.flagged_tiles,
            "tiles_total": self.tiles_total,
            "s": self.s,
            "params": self.params.ledger(),
            "counters": dict(self.counters),
        }


@dataclass
class PreparedDetector:
    """Derived parameters plus the amplifier, reusable across instances of one shape."""

    params: DetectorParams
    transform: Callable[[np.ndarray], np.ndarray] | None

    def amplify(self, M: np.ndarray) -> np.ndarray:
        return M if self.transform is None else self.transform(M)


def prepare_detector(
    n: int,
    d: int,
    rho,
    tau,
    consts: DetectorConstants | None = None,
    amplifier_mode: str = "toy",
    schedule: AmplifierSchedule | None = None,
    s: int | None = None,
    seed: int = 0,
    gamma=None,
    cap: int = 1 << 26,
) -> PreparedDetector:
    if amplifier_mode not in MODES:
        raise ParameterError(f"unknown amplifier mode {amplifier_mode!r}; choose from {MODES}")
    rho, tau = to_fraction(rho), to_fraction(tau)
    if amplifier_mode == "identity":
        params = identity_params(n, d, rho, tau)
        transform = None
    elif amplifier_mode == "toy":
        params, sched = toy_params(n, d, rho, tau, schedule, s)
        transform = lambda M: amplify_many(M, sched, cap)  # noqa: E731
    elif amplifier_mode == "tensor-sample":
        params, transform = tensor_sample_params(n, d, rho, tau, gamma=gamma, seed=seed)
    else:
        if consts is None:
            raise ParameterError("explicit mode needs detector constants")
        params = derive_params(n, d, rho, tau, consts)
        sched = derive_schedule(
            AmplifierParams(d, tau, params.gamma, max(1, params.p.bit_length() - 1))
        )
        transform = lambda M: amplify_many(M, sched, cap)  # noqa: E731
    if s is not None and amplifier_mode != "toy":
        params.s = s
    return PreparedDetector(params, transform)


def detect_amplified(
    X: np.ndarray,
    Y: np.ndarray,
    FX: np.ndarray,
    FY: np.ndarray,
    params: DetectorParams,
    backend: str = "blocked",
    threads: int = 1,
) -> DetectionReport:
    """Bucket, multiply and scan, given inputs and their amplified images."""
    d = X.shape[1]
    timings: dict = {}
    t2 = time.perf_counter()
    bs = params.s
    AX, AY = bucket_aggregate(FX, bs), bucket_aggregate(FY, bs)
    timings["bucket"] = time.perf_counter() - t2

    t3 = time.perf_counter()
    # bucket sums of sign vectors are bounded by the bucket size
    Z = gemm(AX, AY.T, backend=backend, entry_bound=bs)
    timings["gemm"] = time.perf_counter() - t3

    t4 = time.perf_counter()
    hits = np.abs(Z) > params.threshold if params.abs_compare else Z > params.threshold
    tiles = [(int(g), int(h)) for g, h in zip(*np.nonzero(hits))]
    rho, tau = params.rho, params.tau
    rho_abs = bounds.ceil_fraction(rho * d)
    PX, PY = pack(X), pack(Y)

    def scan(tile):
        g, h = tile
        xs = slice(g * bs, min((g + 1) * bs, X.shape[0]))
        ys = slice(h * bs, min((h + 1) * bs, Y.shape[0]))
        ips = _ip_block(PX[xs], PY[ys], d)
        found = [
            (xs.start + int(i), ys.start + int(j), int(ips[i, j]))
            for i, j in zip(*np.nonzero(np.abs(ips) >= rho_abs))
        ]
        background = int(np.count_nonzero(np.abs(ips) * tau.denominator > tau.numerator * d))
        return found, ips.size, background

    if threads > 1 and len(tiles) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(scan, tiles))
    else:
        results = [scan(t) for t in tiles]
    outliers = sorted(x for found, _, _ in results for x in found)
    timings["scan"] = time.perf_counter() - t4

    counters = {
        "tiles_scanned": len(tiles),
        "pairs_scanned": sum(r[1] for r in results),
        "q_estimate": sum(r[2] for r in results),
        "amplified_dim": int(FX.shape[1]),
        "backend": kernels.BACKEND,
    }
    return DetectionReport(
        outliers=outliers,
        flagged_tiles=len(tiles),
        tiles_total=int(Z.size),
        s=bs,
        params=params,
        mode=params.mode,
        counters=counters,
        timings=timings,
    )


def detect_outliers(
    X,
    Y,
    rho,
    tau,
    consts: DetectorConstants | None = None,
    amplifier_mode: str = "toy",
    schedule: AmplifierSchedule | None = None,
    s: int | None = None,
    seed: int = 0,
    gamma=None,
    backend: str = "blocked",
    threads: int = 1,
    cap: int = 1 << 26,
) -> DetectionReport:
    """Report every pair with |<x, y>| >= rho d (given a valid amplifier)."""
    X, Y = as_signs(X), as_signs(Y)
    if X.shape[1] != Y.shape[1]:
        raise ParameterError("X and Y differ in dimension")
    n, d = max(X.shape[0], Y.shape[0]), X.shape[1]
    t0 = time.perf_counter()
    prep = prepare_detector(n, d, rho, tau, consts, amplifier_mode, schedule, s, seed, gamma, cap)
    t1 = time.perf_counter()
    FX, FY = prep.amplify(X), prep.amplify(Y)
    t2 = time.perf_counter()
    report = detect_amplified(X, Y, FX, FY, prep.params, backend, threads)
    report.timings = {"params": t1 - t0, "amplify": t2 - t1, **report.timings}
    return report
