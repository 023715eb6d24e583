"""Planted-pair and noisy-parity instances, and solvers built on the detector."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import mpmath
import numpy as np

from .bounds import to_fraction
from .detector import (
    DetectionReport,
    DetectorConstants,
    detect_amplified,
    prepare_detector,
)
from .errors import ParameterError
from .rng import SplitMix64
from .signs import as_signs


@dataclass
class LightBulbInstance:
    vectors: np.ndarray
    rho: Fraction
    planted: tuple[int, int]
    seed: int

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def d(self) -> int:
        return self.vectors.shape[1]


def planted_flips(d: int, rho) -> int:
    """floor(d (1 - rho) / 2), the coordinates flipped in the planted copy."""
    rho = to_fraction(rho)
    return math.floor(d * (1 - rho) / 2)


def gen_lightbulb(n: int, d: int, rho, seed: int) -> LightBulbInstance:
    """n uniform vectors, one of which is a copy of another with a few signs flipped."""
    rho = to_fraction(rho)
    if n < 2:
        raise ParameterError("need n >= 2")
    if not 0 < rho <= 1:
        raise ParameterError(f"need 0 < rho <= 1, got {rho}")
    flips = planted_flips(d, rho)
    if flips < 0 or flips > d:
        raise ParameterError(f"infeasible rho = {rho} for d = {d}")
    rng = SplitMix64(seed)
    vectors = rng.sign_rows(n, d)
    a, b = rng.sample_distinct(n, 2)
    vectors[b] = vectors[a]
    if flips:
        vectors[b, rng.sample_distinct(d, flips)] *= -1
    return LightBulbInstance(vectors, rho, (min(a, b), max(a, b)), seed)


def split_single_set(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Index splits by binary digit: round i puts bit-i-zero indices in X, the rest in Y."""
    if n < 2:
        raise ParameterError("need n >= 2")
    idx = np.arange(n)
    rounds = []
    for i in range((n - 1).bit_length()):
        bit = (idx >> i) & 1
        rounds.append((idx[bit == 0], idx[bit == 1]))
    return rounds


@dataclass
class SolveResult:
    found: tuple | None
    value: int | None
    candidates: list = field(default_factory=list)
    reports: list[DetectionReport] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.found is not None


def lightbulb_constraints(n: int, d: int, rho, kappa: float, consts: DetectorConstants, rho_max: float) -> list[str]:
    """Violated preconditions for the theoretical light-bulb reduction."""
    out = []
    with mpmath.workdps(40):
        r = mpmath.mpf(repr(float(rho)))
        N = mpmath.mpf(n)
        eps = 1 - 1 / mpmath.mpf(kappa)
        if not 5 * r ** (-2 * kappa) * mpmath.log(N, 2) <= d:
            out.append("light bulb dimension constraint: 5 rho^(-2 kappa) log n <= d")
        if not d <= N ** consts.delta:
            out.append("light bulb dimension constraint: d <= n^delta")
        c1 = mpmath.mpf(rho_max) ** (-kappa * eps / 100000)
        c2 = (1 - 0.99 * eps / (4 * consts.C + 1)) * (consts.alpha - consts.delta) / consts.C
        if not c1 * N ** (-c2 / kappa) <= r <= rho_max:
            out.append("light bulb correlation-range constraint: c1 n^(-c2/kappa) <= rho <= rho_max")
    return out


def solve_lightbulb(
    inst: LightBulbInstance,
    kappa: float = 2.0,
    consts: DetectorConstants | None = None,
    amplifier_mode: str = "toy",
    rho_max: float = 0.9,
    threads: int = 1,
    backend: str = "blocked",
) -> SolveResult:
    """Recover the planted pair: split into two-set rounds and detect with tau = rho^kappa.

    ``rho_max`` clamps the background threshold so that rho = 1 still leaves
    tau < rho.
    """
    rho = inst.rho
    n, d = inst.n, inst.d
    notes = []
    tau = to_fraction(min(float(rho), rho_max) ** kappa)
    if amplifier_mode == "explicit":
        if consts is None:
            raise ParameterError("explicit mode needs detector constants")
        bad = lightbulb_constraints(n, d, rho, kappa, consts, rho_max)
        if bad:
            raise ParameterError(bad[0])
        consts = DetectorConstants(1 - 1 / kappa, rho_max**kappa, consts.delta, consts.C, consts.alpha)
    else:
        notes.append("reduction constraints not enforced outside explicit mode")

    rounds = split_single_set(n)
    side = max(max(len(a), len(b)) for a, b in rounds)
    prep = prepare_detector(side, d, rho, tau, consts, amplifier_mode)
    V = as_signs(inst.vectors)
    F = prep.amplify(V)
    best: dict[tuple[int, int], int] = {}
    reports = []
    for xs, ys in rounds:
        rep = detect_amplified(V[xs], V[ys], F[xs], F[ys], prep.params, backend, threads)
        reports.append(rep)
        for i, j, ip in rep.outliers:
            a, b = int(xs[i]), int(ys[j])
            best[(min(a, b), max(a, b))] = ip
    if not best:
        return SolveResult(None, None, [], reports, notes)
    cands = sorted(best.items(), key=lambda kv: (-abs(kv[1]), kv[0]))
    (pair, ip) = cands[0]
    return SolveResult(pair, ip, cands, reports, notes)


# -- parity with noise -------------------------------------------------------


@dataclass
class ParityInstance:
    v: int
    k: int
    S: tuple[int, ...]
    eta: float
    x: np.ndarray  # (d, v) examples
    y: np.ndarray  # (d,) labels
    seed: int

    @property
    def d(self) -> int:
        return self.x.shape[0]


def gen_parity(v: int, k: int, S, eta: float, d: int, seed: int) -> ParityInstance:
    """d examples (x, y) with y = z * prod_{l in S} x(l) and P(z = -1) = eta."""
    S = tuple(sorted(int(s) for s in S))
    if len(S) != k or len(set(S)) != k:
        raise ParameterError(f"support must have exactly k = {k} distinct elements, got {S}")
    if k > v or (S and not (0 <= S[0] and S[-1] < v)):
        raise ParameterError(f"support {S} not inside range({v})")
    if not 0 <= eta < 1:
        raise ParameterError(f"need 0 <= eta < 1, got {eta}")
    rng = SplitMix64(seed)
    x = rng.sign_rows(d, v)
    z = np.where(rng.uniforms(d) < eta, -1, 1).astype(np.int8)
    y = z * parity_values(x, S)
    return ParityInstance(v, k, S, eta, x, y.astype(np.int8), seed)


def parity_values(x: np.ndarray, J) -> np.ndarray:
    """x^J = prod_{l in J} x(l) for every row of x (empty J gives all ones)."""
    out = np.ones(x.shape[0], dtype=np.int8)
    for l in J:
        out = out * x[:, l]
    return out


def colex_rank(J) -> int:
    return sum(math.comb(c, i + 1) for i, c in enumerate(sorted(J)))


def colex_unrank(r: int, j: int) -> tuple[int, ...]:
    out = []
    for i in range(j, 0, -1):
        c = i - 1
        while math.comb(c + 1, i) <= r:
            c += 1
        out.append(c)
        r -= math.comb(c, i)
    return tuple(sorted(out))


def colex_subsets(v: int, j: int) -> list[tuple[int, ...]]:
    """All j-subsets of range(v) in colexicographic order."""
    return sorted(combinations(range(v), j), key=lambda J: tuple(reversed(J)))


@dataclass
class ParityCollections:
    X: np.ndarray
    Y: np.ndarray
    sets_x: list[tuple[int, ...]]
    sets_y: list[tuple[int, ...]]


def build_parity_collections(inst: ParityInstance, k: int | None = None) -> ParityCollections:
    """a^J1 = x^J1 over floor(k/2)-subsets and b^J2 = x^J2 y over ceil(k/2)-subsets."""
    k = inst.k if k is None else k
    if inst.v < k:
        raise ParameterError("need v >= k")
    k1, k2 = k // 2, k - k // 2
    sets_x, sets_y = colex_subsets(inst.v, k1), colex_subsets(inst.v, k2)
    X = np.stack([parity_values(inst.x, J) for J in sets_x])
    Y = np.stack([parity_values(inst.x, J) * inst.y for J in sets_y]).astype(np.int8)
    return ParityCollections(X, Y, sets_x, sets_y)


def parity_score(inst: ParityInstance, J) -> int:
    """|sum_i x_i^J y_i| over the drawn examples."""
    return abs(int(np.dot(parity_values(inst.x, J).astype(np.int64), inst.y)))


def parity_sample_size(v: int, k: int, eta: float, xi: float, theta: float, consts: DetectorConstants) -> int:
    """Least d with d >= (2k + 1 + 4 k zeta) tau^-2 (|1-2eta| - rho)^-2 log v, zeta = E/4."""
    r = abs(1 - 2 * eta)
    if not 0 < r <= theta < 1:
        raise ParameterError("need 0 < |1 - 2 eta| <= theta < 1")
    eps = 1 - 1 / xi
    E = 0.99 * eps * (consts.alpha - consts.delta) / (4 * consts.C + 1)
    zeta = E / 4
    with mpmath.workdps(40):
        rm = mpmath.mpf(repr(r))
        rho = rm**xi
        tau = rho**xi
        need = (2 * k + 1 + 4 * k * zeta) / tau**2 / (rm - rho) ** 2 * mpmath.log(v, 2)
        return max(1, int(mpmath.ceil(need)))


def solve_parity(
    inst: ParityInstance,
    xi: float = 1.5,
    theta: float = 0.9,
    consts: DetectorConstants | None = None,
    amplifier_mode: str = "toy",
    threads: int = 1,
    backend: str = "blocked",
) -> SolveResult:
    """Detect correlated (J1, J2) pairs and return the best-scoring J1 xor J2 of size k.

    rho = r^xi and tau = rho^xi with r = min(|1 - 2 eta|, theta); clamping by
    theta keeps tau < rho in the noiseless case.
    """
    notes = []
    r = min(abs(1 - 2 * inst.eta), theta)
    if r <= 0:
        raise ParameterError("eta = 1/2 carries no signal")
    rho = to_fraction(r**xi)
    tau = to_fraction(r ** (xi * xi))
    if amplifier_mode == "explicit":
        if consts is None:
            raise ParameterError("explicit mode needs detector constants")
        need = parity_sample_size(inst.v, inst.k, inst.eta, xi, theta, consts)
        if inst.d < need:
            raise ParameterError(f"parity sample size: d = {inst.d} < {need}")
        consts = DetectorConstants(1 - 1 / xi, theta, consts.delta, consts.C, consts.alpha)
    else:
        notes.append("reduction constraints not enforced outside explicit mode")
    col = build_parity_collections(inst)
    n = max(len(col.sets_x), len(col.sets_y))
    prep = prepare_detector(n, inst.d, rho, tau, consts, amplifier_mode)
    rep = detect_amplified(col.X, col.Y, prep.amplify(col.X), prep.amplify(col.Y), prep.params, backend, threads)
    seen = {}
    for i, j, _ in rep.outliers:
        J = tuple(sorted(set(col.sets_x[i]) ^ set(col.sets_y[j])))
        if len(J) == inst.k and J not in seen:
            seen[J] = parity_score(inst, J)
    if not seen:
        return SolveResult(None, None, [], [rep], notes)
    cands = sorted(seen.items(), key=lambda kv: (-kv[1], colex_rank(kv[0])))
    J, score = cands[0]
    return SolveResult(J, score, cands, [rep], notes)
