"""Explicit correlation amplifiers built from repeated approximate squaring.

An input ``x in {-1,1}^d`` is first copied cyclically to length ``2^k``
(copy-and-truncate). Level ``i`` then replicates the current vector to the
vertex count ``D_i`` of an expander ``G_i`` (index mod ``d_i``) and maps it to
the vector indexed by edge ends, ``x^G(u * Δ_i + i) = x(u) x(v)`` where
``Rot(u, i) = (v, j)``. The final vector is repeated cyclically to ``2^K``.

Every output coordinate is a product of ``2^ell`` input coordinates, so
``f(x) * f(y) == f(x * y)`` coordinatewise. :func:`amplified_inner` uses that
identity to get ``<f(x), f(y)>`` from one amplification.

Theoretical schedules use the zigzag family with ``b_i >= 10`` and are only
evaluable per coordinate. Toy schedules take small explicit graphs whose
second eigenvalue is measured, and can be checked end to end.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from . import bounds
from .bounds import sqrt_bracket, to_fraction
from .errors import CapacityError, ParameterError
from .rotgraph import (
    SPECTRAL_CAP,
    CompleteGraph,
    RotationMapGraph,
    rvw_family,
    second_eigenvalue,
)

MEMORY_CAP = 1 << 26
SPECTRAL_TOL = 1e-7


@dataclass(frozen=True)
class AmplifierParams:
    d: int
    tau: Fraction | float
    gamma: Fraction | float
    ell: int
    K: int | None = None
    mode: str = "theoretical"
    level_graphs: tuple[RotationMapGraph, ...] | None = None
    b_min: int = 10
    k: int | None = None

    def __post_init__(self):
        if self.mode not in ("theoretical", "toy"):
            raise ParameterError(f"unknown amplifier mode {self.mode!r}")
        if self.d < 1:
            raise ParameterError("need d >= 1")
        if self.ell < 1:
            raise ParameterError("need ell >= 1")
        tau, gamma = to_fraction(self.tau), to_fraction(self.gamma)
        if not 0 < tau < 1:
            raise ParameterError(f"need 0 < tau < 1, got {self.tau}")
        if gamma <= 1:
            raise ParameterError(f"need gamma > 1, got {self.gamma}")
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "gamma", gamma)
        if self.level_graphs is not None:
            object.__setattr__(self, "level_graphs", tuple(self.level_graphs))


@dataclass
class Level:
    index: int
    tau: mpmath.mpf
    d_in: int
    graph: RotationMapGraph
    b: int | None = None
    t: int | None = None
    lambda_hat: float | None = None
    lambda_cert: float | None = None
    verified: bool | None = None

    @property
    def D(self) -> int:
        return self.graph.vertex_count

    @property
    def Delta(self) -> int:
        return self.graph.degree

    @property
    def d_out(self) -> int:
        return self.D * self.Delta


@dataclass
class AmplifierSchedule:
    params: AmplifierParams
    gamma0: mpmath.mpf
    tau0: Fraction
    k: int
    levels: list[Level]
    K: int
    copy_ok: bool
    K_required: int | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def d(self) -> int:
        return self.params.d

    @property
    def ell(self) -> int:
        return self.params.ell

    @property
    def p(self) -> int:
        return 1 << self.params.ell

    @property
    def mode(self) -> str:
        return self.params.mode

    @property
    def d_final(self) -> int:
        return self.levels[-1].d_out

    @property
    def output_dim(self) -> int:
        return 1 << self.K

    @property
    def certified(self) -> bool:
        """Toy schedule whose padding and measured levels meet the degree bound."""
        return self.copy_ok and all(lv.verified for lv in self.levels)

    def ledger(self) -> dict:
        out = {
            "mode": self.mode,
            "d": self.d,
            "ell": self.ell,
            "p": self.p,
            "tau": str(self.params.tau),
            "gamma": str(self.params.gamma),
            "gamma0": mpmath.nstr(self.gamma0, 12),
            "tau0": str(self.tau0),
            "k": self.k,
            "K": self.K,
            "K_required": self.K_required,
            "copy_truncate_ok": self.copy_ok,
            "levels": [],
        }
        for lv in self.levels:
            out["levels"].append(
                {
                    "i": lv.index,
                    "tau_i": mpmath.nstr(lv.tau, 12),
                    "b_i": lv.b,
                    "t_i": lv.t,
                    "d_i": _pow2_str(lv.d_in),
                    "D_i": _pow2_str(lv.D),
                    "Delta_i": _pow2_str(lv.Delta),
                    "lambda_hat": lv.lambda_hat,
                    "lambda_cert": lv.lambda_cert,
                    "verified": lv.verified,
                }
            )
        if self.mode == "toy":
            out["certified"] = self.certified
        if self.notes:
            out["notes"] = list(self.notes)
        return out


def _pow2_str(n: int) -> str:
    if n > 1 << 30 and n & (n - 1) == 0:
        return f"2^{n.bit_length() - 1}"
    return str(n)


def _min_k_copy(d: int, tau: Fraction, gamma: Fraction) -> int:
    """Smallest k >= 1 with 2^k >= 2 d (1 - gamma^-1/2)^-1 gamma / tau."""
    bits = 64
    while True:
        lo, hi = sqrt_bracket(gamma, bits)
        ks = []
        for s in (hi, lo):
            need = 2 * d * gamma / tau / (1 - 1 / s)
            ks.append(max(1, bounds.ceil_log2(need)))
        if ks[0] == ks[1]:
            return ks[0]
        bits *= 2
        if bits > 1 << 14:
            return ks[1]


def _copy_ok(d: int, k: int, tau: Fraction, gamma: Fraction) -> bool:
    lo, hi = sqrt_bracket(gamma, 128)
    # conservative: use the lower bracket, which makes the requirement largest
    need = 2 * d * gamma / tau / (1 - 1 / lo)
    return (1 << k) >= need


def _tau_levels(tau0: Fraction, gamma0: mpmath.mpf, ell: int) -> list[mpmath.mpf]:
    taus = [mpmath.mpf(tau0.numerator) / tau0.denominator]
    for _ in range(ell - 1):
        taus.append(taus[-1] ** 2 / gamma0)
    return taus


def _measure(graph: RotationMapGraph) -> float | None:
    if graph.vertex_count * graph.degree > SPECTRAL_CAP:
        return None
    return second_eigenvalue(graph, tol=SPECTRAL_TOL).lambda_hat


def derive_schedule(params: AmplifierParams) -> AmplifierSchedule:
    """Per-level thresholds, base parameters and graphs for the amplifier."""
    with mpmath.workdps(60):
        g = mpmath.mpf(params.gamma.numerator) / params.gamma.denominator
        gamma0 = mpmath.sqrt(g)
        tau0 = params.tau / params.gamma
        taus = _tau_levels(tau0, gamma0, params.ell)
        slack = 1 - 1 / gamma0
        if params.mode == "theoretical":
            return _theoretical(params, gamma0, tau0, taus, slack)
        return _toy(params, gamma0, tau0, taus, slack)


def _theoretical(params, gamma0, tau0, taus, slack) -> AmplifierSchedule:
    if params.level_graphs is not None:
        raise ParameterError("explicit level graphs require toy mode")
    K_req = bounds.min_output_exponent(params.d, params.tau, params.gamma, params.ell)
    if params.K is not None and params.K < K_req:
        raise ParameterError(
            f"2^K >= d (2^10 (1 - gamma^-1/2)^-1)^(20 ell + 1) (gamma/tau)^(60 2^ell) "
            f"violated: K = {params.K} < {K_req}"
        )
    K = K_req if params.K is None else params.K
    k = _min_k_copy(params.d, params.tau, params.gamma)
    if params.k is not None:
        raise ParameterError("k is derived in theoretical mode")
    levels = []
    d_i = 1 << k
    for i, tau_i in enumerate(taus):
        bound = (32 / (slack * tau_i**2)) ** 4
        b = max(params.b_min, int(mpmath.ceil(mpmath.log(bound, 2) / 4)))
        log_d = d_i.bit_length() - 1
        t = max(1, -(-log_d // (16 * b)))
        graph = rvw_family(b, t, toy=params.b_min < 10)
        lv = Level(i, tau_i, d_i, graph, b=b, t=t)
        levels.append(lv)
        d_i = lv.d_out
    if d_i > 1 << K:
        raise ParameterError(f"final dimension {_pow2_str(d_i)} exceeds 2^K = 2^{K}")
    return AmplifierSchedule(params, gamma0, tau0, k, levels, K, True, K_required=K_req)


def _toy(params, gamma0, tau0, taus, slack) -> AmplifierSchedule:
    graphs = params.level_graphs
    if graphs is None or len(graphs) != params.ell:
        raise ParameterError(f"toy mode needs exactly ell = {params.ell} level graphs")
    k = params.k if params.k is not None else _min_k_copy(params.d, params.tau, params.gamma)
    if (1 << k) < params.d:
        raise ParameterError(f"2^k = {1 << k} < d = {params.d}")
    copy_ok = _copy_ok(params.d, k, params.tau, params.gamma)
    levels = []
    d_i = 1 << k
    for i, (tau_i, graph) in enumerate(zip(taus, graphs)):
        if graph.vertex_count % d_i:
            raise ParameterError(
                f"level {i}: graph has {graph.vertex_count} vertices, not a multiple of d_{i} = {d_i}"
            )
        lam = _measure(graph)
        cert = graph.lambda_bound
        if cert is None and lam is not None:
            cert = lam + SPECTRAL_TOL
        verified = None if lam is None else bool(2 * lam <= slack * tau_i**2)
        lv = Level(i, tau_i, d_i, graph, lambda_hat=lam, lambda_cert=cert, verified=verified)
        levels.append(lv)
        d_i = lv.d_out
    if d_i & (d_i - 1):
        raise ParameterError(f"final dimension {d_i} is not a power of two")
    K_min = d_i.bit_length() - 1
    K = K_min if params.K is None else params.K
    if K < K_min:
        raise ParameterError(f"K = {K} below log2 of the final dimension {K_min}")
    return AmplifierSchedule(params, gamma0, tau0, k, levels, K, copy_ok)


def complete_schedule(d: int, tau, gamma, ell: int = 1, k: int | None = None) -> AmplifierSchedule:
    """Toy schedule whose levels are complete graphs with loops (exact squaring)."""
    if k is None:
        k = max(1, (d - 1).bit_length())
    graphs = []
    d_i = 1 << k
    for _ in range(ell):
        graphs.append(CompleteGraph(d_i))
        d_i *= d_i
    return derive_schedule(
        AmplifierParams(d, tau, gamma, ell, mode="toy", level_graphs=tuple(graphs), k=k)
    )


def _as_rows(x) -> tuple[np.ndarray, bool]:
    a = np.asarray(x)
    single = a.ndim == 1
    a = np.atleast_2d(a)
    if a.dtype != np.int8:
        a = a.astype(np.int8)
    return a, single


def copy_truncate(x, k: int) -> np.ndarray:
    """Cyclic copies of x truncated to length 2^k."""
    a, single = _as_rows(x)
    d = a.shape[1]
    if (1 << k) < d:
        raise ParameterError(f"2^k = {1 << k} < d = {d}")
    out = a[:, np.arange(1 << k) % d]
    return out[0] if single else out


def approx_square(x, graph: RotationMapGraph) -> np.ndarray:
    """Coordinate ``u * Δ + i`` is ``x(u) x(v)`` with ``Rot(u, i) = (v, j)``."""
    a, single = _as_rows(x)
    if a.shape[1] != graph.vertex_count:
        raise ParameterError(
            f"vector dimension {a.shape[1]} != vertex count {graph.vertex_count}"
        )
    V, _ = graph.rot_table()
    out = (a[:, :, None] * a[:, V]).reshape(a.shape[0], -1)
    return out[0] if single else out


def amplify(x, schedule: AmplifierSchedule, cap: int = MEMORY_CAP) -> np.ndarray:
    """Materialize f(x) for one vector or a batch of rows."""
    if schedule.output_dim > cap:
        raise CapacityError(
            f"output dimension 2^{schedule.K} exceeds the materialization cap {cap}; "
            "use amplify_coord"
        )
    a, single = _as_rows(x)
    if a.shape[1] != schedule.d:
        raise ParameterError(f"input dimension {a.shape[1]} != schedule d = {schedule.d}")
    cur = copy_truncate(a, schedule.k)
    for lv in schedule.levels:
        if lv.D != cur.shape[1]:
            cur = cur[:, np.arange(lv.D) % cur.shape[1]]
        cur = approx_square(cur, lv.graph)
    if schedule.output_dim != cur.shape[1]:
        cur = cur[:, np.arange(schedule.output_dim) % cur.shape[1]]
    return cur[0] if single else cur


def amplify_many(X, schedule: AmplifierSchedule, cap: int = MEMORY_CAP, batch: int | None = None):
    """Amplify rows of X in batches bounded by ``cap`` total coordinates."""
    X = np.asarray(X, dtype=np.int8)
    if batch is None:
        batch = max(1, cap // max(1, schedule.output_dim))
    out = np.empty((X.shape[0], schedule.output_dim), dtype=np.int8)
    for lo in range(0, X.shape[0], batch):
        out[lo : lo + batch] = amplify(X[lo : lo + batch], schedule, cap)
    return out


def amplified_inner(x, y, schedule: AmplifierSchedule, cap: int = MEMORY_CAP) -> int:
    """<f(x), f(y)> computed as the coordinate sum of f(x * y)."""
    z = np.asarray(x, dtype=np.int8) * np.asarray(y, dtype=np.int8)
    return int(amplify(z, schedule, cap).sum(dtype=np.int64))


@dataclass
class CoordStats:
    rot_evals: list[int]
    input_touches: int = 0


def amplify_coord(x, schedule: AmplifierSchedule, j: int, stats: CoordStats | None = None) -> int:
    """Coordinate j of f(x) without materializing f(x)."""
    if not 0 <= j < schedule.output_dim:
        raise ParameterError(f"index {j} outside [0, 2^{schedule.K})")
    if stats is None:
        stats = CoordStats([0] * schedule.ell)
    x = np.asarray(x)
    d = x.shape[0]
    if d != schedule.d:
        raise ParameterError(f"input dimension {d} != schedule d = {schedule.d}")
    levels = schedule.levels

    def value(level: int, idx: int) -> int:
        if level == 0:
            stats.input_touches += 1
            return int(x[idx % d])
        lv = levels[level - 1]
        u, lab = divmod(idx, lv.Delta)
        v, _ = lv.graph.rot(u, lab)
        stats.rot_evals[level - 1] += 1
        return value(level - 1, u % lv.d_in) * value(level - 1, v % lv.d_in)

    return value(schedule.ell, j % schedule.d_final)


def phi_interval(schedule: AmplifierSchedule, ip: int) -> tuple[Fraction, Fraction]:
    """Exact range of <f(x), f(y)> / 2^K over all pairs with <x, y> = ip.

    Uses the cyclic-padding remainder for the first step and the additive
    control ``|nu' - nu^2| <= 2 lambda`` per level with each level's
    certified eigenvalue bound (analytic when known, else measured + tol).
    """
    d = schedule.d
    if abs(ip) > d or (ip - d) % 2:
        raise ParameterError(f"{ip} is not an inner product of two {d}-dimensional sign vectors")
    size = 1 << schedule.k
    q, m = divmod(size, d)
    rest = d - m
    lo = Fraction(q * ip + max(-m, ip - rest), size)
    hi = Fraction(q * ip + min(m, ip + rest), size)
    for lv in schedule.levels:
        if lv.lambda_cert is None:
            raise ParameterError(f"level {lv.index} has no certified eigenvalue bound")
        if lo <= 0 <= hi:
            sq_lo, sq_hi = Fraction(0), max(lo * lo, hi * hi)
        else:
            sq_lo, sq_hi = min(lo * lo, hi * hi), max(lo * lo, hi * hi)
        err = 2 * Fraction(lv.lambda_cert)
        lo, hi = max(Fraction(-1), sq_lo - err), min(Fraction(1), sq_hi + err)
    return lo, hi


def definition_bounds(schedule: AmplifierSchedule, ip: int) -> tuple[Fraction | None, Fraction]:
    """Lower/upper bounds on <f(x), f(y)> / 2^K promised for an amplifier with these parameters.

    For |nu| < tau the promise is |phi| <= (tau gamma)^p (lower bound returned as
    its negation); otherwise (nu / gamma)^p <= phi <= (nu gamma)^p.
    """
    d, p = schedule.d, schedule.p
    tau, gamma = schedule.params.tau, schedule.params.gamma
    nu = Fraction(ip, d)
    if abs(nu) < tau:
        cap = (tau * gamma) ** p
        return -cap, cap
    return (nu / gamma) ** p, (nu * gamma) ** p


def inner_products(FX: np.ndarray, FY: np.ndarray) -> np.ndarray:
    """Row-wise inner products of two equally shaped int8 matrices."""
    return np.einsum("ij,ij->i", FX.astype(np.int32), FY.astype(np.int32), dtype=np.int64)

