"""Regular graphs given by rotation maps, and the zigzag expander family.

A graph here is a rotation map ``rot(u, i) -> (v, j)`` over integer-encoded
vertices ``0 <= u < D`` and edge labels ``0 <= i < Δ``. Composite encodings
put the left component in the high digits: a tensor vertex ``(u1, u2)`` is
``u1 * D2 + u2``, a square label ``(i1, i2)`` is ``i1 * Δ + i2``. When the
right component's range is a power of two this is bit concatenation.

``rot`` works on arbitrarily large Python integers (the theoretical family
has 2^160+ vertices). ``rot_table`` materializes the full map as numpy arrays
for small graphs and is what the spectral checker and the amplifier use.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import CapacityError, ConvergenceError, ParameterError
from .gf2k import FieldSpec, find_irreducible, gf_mul, gf_mul_array

TABLE_CAP = 1 << 24
SPECTRAL_CAP = 1 << 22


def zigzag_bound(l1: float, l2: float) -> float:
    """Eigenvalue bound for a zigzag product of [., ., l1] and [., ., l2] graphs."""
    a = 1.0 - l2 * l2
    return 0.5 * a * l1 + 0.5 * math.sqrt(a * a * l1 * l1 + 4.0 * l2 * l2)


class RotationMapGraph:
    """A Δ-regular graph on D vertices, given by its rotation map."""

    kind = "graph"

    def __init__(self, vertex_count: int, degree: int, children=()):
        self.vertex_count = int(vertex_count)
        self.degree = int(degree)
        self.children = tuple(children)
        self._table = None

    @property
    def vertex_bits(self) -> int:
        return (self.vertex_count - 1).bit_length()

    @property
    def label_bits(self) -> int:
        return (self.degree - 1).bit_length()

    def rot(self, u: int, i: int) -> tuple[int, int]:
        if not (0 <= u < self.vertex_count and 0 <= i < self.degree):
            raise ParameterError(f"({u}, {i}) outside {self.vertex_count} x {self.degree}")
        return self._rot(u, i)

    def _rot(self, u: int, i: int) -> tuple[int, int]:
        raise NotImplementedError

    @property
    def lambda_bound(self) -> float | None:
        """Analytic bound on the normalized second eigenvalue, if known."""
        return None

    def rot_table(self, cap: int = TABLE_CAP) -> tuple[np.ndarray, np.ndarray]:
        """Arrays ``(V, J)`` of shape (D, Δ) with ``rot(u, i) == (V[u,i], J[u,i])``."""
        if self._table is None:
            size = self.vertex_count * self.degree
            if size > cap:
                raise CapacityError(f"rotation table of {size} entries exceeds cap {cap}")
            V, J = self._build_table()
            V = np.ascontiguousarray(V, dtype=np.int64).reshape(self.vertex_count, self.degree)
            J = np.ascontiguousarray(J, dtype=np.int64).reshape(self.vertex_count, self.degree)
            V.setflags(write=False)
            J.setflags(write=False)
            self._table = (V, J)
        return self._table

    def _build_table(self):
        V = np.empty((self.vertex_count, self.degree), dtype=np.int64)
        J = np.empty_like(V)
        for u in range(self.vertex_count):
            for i in range(self.degree):
                V[u, i], J[u, i] = self._rot(u, i)
        return V, J

    def header(self) -> str:
        return f"{self.kind} [D={_fmt_count(self.vertex_count)}, deg={_fmt_count(self.degree)}]"

    def describe(self, max_depth: int = 12) -> str:
        lines: list[str] = []

        def walk(g, depth):
            lines.append("  " * depth + g.header())
            if depth + 1 > max_depth and g.children:
                lines.append("  " * (depth + 1) + "...")
                return
            for c in g.children:
                walk(c, depth + 1)

        walk(self, 0)
        return "\n".join(lines)

    def __repr__(self):
        return f"<{self.header()}>"


def _fmt_count(n: int) -> str:
    if n > 1 << 20 and n & (n - 1) == 0:
        return f"2^{n.bit_length() - 1}"
    return str(n)


class CompleteGraph(RotationMapGraph):
    """K_n with a self-loop at every vertex: rot(u, i) = (i, u); λ = 0."""

    kind = "complete"

    def __init__(self, n: int):
        if n < 1:
            raise ParameterError("complete graph needs n >= 1")
        super().__init__(n, n)

    def _rot(self, u, i):
        return i, u

    @property
    def lambda_bound(self):
        return 0.0

    def _build_table(self):
        n = self.vertex_count
        idx = np.arange(n, dtype=np.int64)
        return np.broadcast_to(idx[None, :], (n, n)), np.broadcast_to(idx[:, None], (n, n))

    def header(self):
        return f"complete K_{self.vertex_count} with loops"


class CycleGraph(RotationMapGraph):
    """C_n; label 0 steps forward, label 1 steps back."""

    kind = "cycle"

    def __init__(self, n: int):
        if n < 2:
            raise ParameterError("cycle needs n >= 2")
        super().__init__(n, 2)

    def _rot(self, u, i):
        n = self.vertex_count
        return ((u + 1) % n, 1) if i == 0 else ((u - 1) % n, 0)

    @property
    def lambda_bound(self):
        n = self.vertex_count
        return 1.0 if n % 2 == 0 else math.cos(math.pi / n)

    def _build_table(self):
        n = self.vertex_count
        u = np.arange(n, dtype=np.int64)
        V = np.stack([(u + 1) % n, (u - 1) % n], axis=1)
        J = np.broadcast_to(np.array([1, 0], dtype=np.int64), (n, 2))
        return V, J

    def header(self):
        return f"cycle C_{self.vertex_count}"


class PathLoopGraph(RotationMapGraph):
    """The path on n vertices with a self-loop at each end (2-regular)."""

    kind = "path"

    def __init__(self, n: int):
        if n < 1:
            raise ParameterError("path needs n >= 1")
        super().__init__(n, 2)

    def _rot(self, u, i):
        n = self.vertex_count
        if i == 0:
            return (u + 1, 1) if u < n - 1 else (u, 0)
        return (u - 1, 0) if u > 0 else (u, 1)

    @property
    def lambda_bound(self):
        return math.cos(math.pi / self.vertex_count)

    def header(self):
        return f"looped path P_{self.vertex_count}"


class BaseGraph(RotationMapGraph):
    """The polynomial graph over GF(q), q = 2^b.

    Vertices are coefficient tuples ``a = (a_0, ..., a_m) in GF(q)^(m+1)``
    (``m = d_poly``; ``a_0`` in the high digits) and labels are pairs
    ``(x, y) in GF(q)^2`` encoded ``x * q + y``. The rotation map is
    ``rot(a, (x, y)) = (a + y * (1, x, ..., x^m), (x, y))``; the label's second
    component is ``-y``, which is ``y`` in characteristic 2.
    D = q^(m+1), Δ = q^2, normalized second eigenvalue at most m / q.
    """

    kind = "base"

    def __init__(self, field: FieldSpec, d_poly: int):
        q = field.order
        if d_poly < 1 or d_poly >= q:
            raise ParameterError(f"need 1 <= d_poly < q = {q}, got d_poly = {d_poly}")
        self.field = field
        self.d_poly = d_poly
        super().__init__(q ** (d_poly + 1), q * q)

    @property
    def lambda_bound(self):
        return self.d_poly / self.field.order

    def _rot(self, u, i):
        f, m, b = self.field, self.d_poly, self.field.b
        mask = f.order - 1
        x, y = i >> b, i & mask
        out = 0
        power = 1
        for k in range(m + 1):
            shift = b * (m - k)
            coeff = (u >> shift) & mask
            out |= (coeff ^ gf_mul(y, power, f)) << shift
            power = gf_mul(power, x, f)
        return out, i

    def _build_table(self):
        f, m, b = self.field, self.d_poly, self.field.b
        q = f.order
        u = np.arange(self.vertex_count, dtype=np.uint64)
        xs = np.arange(q, dtype=np.uint64)
        V = np.zeros((self.vertex_count, q * q), dtype=np.uint64)
        power = np.ones(q, dtype=np.uint64)
        for k in range(m + 1):
            shift = np.uint64(b * (m - k))
            coeff = (u >> shift) & np.uint64(q - 1)
            term = gf_mul_array(xs[None, :], power[:, None], f)  # term[x, y] = y * x^k
            V |= (coeff[:, None] ^ term.reshape(1, q * q)) << shift
            power = gf_mul_array(power, xs, f)
        J = np.broadcast_to(np.arange(q * q, dtype=np.int64)[None, :], V.shape)
        return V.astype(np.int64), J

    def header(self):
        return (
            f"base q=2^{self.field.b} d_poly={self.d_poly} "
            f"[D={_fmt_count(self.vertex_count)}, deg={_fmt_count(self.degree)}]"
        )


class SquareGraph(RotationMapGraph):
    kind = "square"

    def __init__(self, g: RotationMapGraph):
        self.g = g
        super().__init__(g.vertex_count, g.degree**2, (g,))

    def _rot(self, u, lab):
        i1, i2 = divmod(lab, self.g.degree)
        v, j1 = self.g._rot(u, i1)
        w, j2 = self.g._rot(v, i2)
        return w, j2 * self.g.degree + j1

    @property
    def lambda_bound(self):
        lb = self.g.lambda_bound
        return None if lb is None else lb * lb

    def _build_table(self):
        V1, J1 = self.g.rot_table()
        dg = self.g.degree
        W = V1[V1]  # W[u, i1, i2] = V1[V1[u, i1], i2]
        J = J1[V1] * dg + J1[:, :, None]
        return W.reshape(self.vertex_count, -1), J.reshape(self.vertex_count, -1)


class TensorGraph(RotationMapGraph):
    kind = "tensor"

    def __init__(self, g1: RotationMapGraph, g2: RotationMapGraph):
        self.g1, self.g2 = g1, g2
        super().__init__(
            g1.vertex_count * g2.vertex_count, g1.degree * g2.degree, (g1, g2)
        )

    def _rot(self, u, lab):
        u1, u2 = divmod(u, self.g2.vertex_count)
        i1, i2 = divmod(lab, self.g2.degree)
        v1, j1 = self.g1._rot(u1, i1)
        v2, j2 = self.g2._rot(u2, i2)
        return v1 * self.g2.vertex_count + v2, j1 * self.g2.degree + j2

    @property
    def lambda_bound(self):
        a, b = self.g1.lambda_bound, self.g2.lambda_bound
        return None if a is None or b is None else max(a, b)

    def _build_table(self):
        V1, J1 = self.g1.rot_table()
        V2, J2 = self.g2.rot_table()
        D2, d2 = self.g2.vertex_count, self.g2.degree
        V = V1[:, None, :, None] * D2 + V2[None, :, None, :]
        J = J1[:, None, :, None] * d2 + J2[None, :, None, :]
        return V.reshape(self.vertex_count, -1), J.reshape(self.vertex_count, -1)


class ZigzagGraph(RotationMapGraph):
    """G (z) H: vertices (v, a) encoded ``v * D_H + a``, labels ``i * Δ_H + j``.

    rot((v, a), (i, j)): (a', i') = Rot_H(a, i); (w, b) = Rot_G(v, a');
    (b', j') = Rot_H(b, j); return ((w, b'), (j', i')).
    """

    kind = "zigzag"

    def __init__(self, g: RotationMapGraph, h: RotationMapGraph):
        if g.degree != h.vertex_count:
            raise ParameterError(
                f"zigzag needs deg(G) == |V(H)|, got {g.degree} vs {h.vertex_count}"
            )
        self.g, self.h = g, h
        super().__init__(g.vertex_count * g.degree, h.degree**2, (g, h))

    def _rot(self, u, lab):
        g, h = self.g, self.h
        v, a = divmod(u, h.vertex_count)
        i, j = divmod(lab, h.degree)
        a2, i2 = h._rot(a, i)
        w, b = g._rot(v, a2)
        b2, j2 = h._rot(b, j)
        return w * h.vertex_count + b2, j2 * h.degree + i2

    @property
    def lambda_bound(self):
        a, b = self.g.lambda_bound, self.h.lambda_bound
        return None if a is None or b is None else zigzag_bound(a, b)

    def _build_table(self):
        VG, JG = self.g.rot_table()
        VH, JH = self.h.rot_table()
        dh = self.h.degree
        Dh = self.h.vertex_count
        # axes: v, a, i, j
        a2 = VH[None, :, :, None]
        i2 = JH[None, :, :, None]
        v = np.arange(self.g.vertex_count)[:, None, None, None]
        w = VG[v, a2]
        b = JG[v, a2]
        jj = np.arange(dh)[None, None, None, :]
        b2 = VH[b, jj]
        j2 = JH[b, jj]
        V = w * Dh + b2
        J = j2 * dh + i2
        return V.reshape(self.vertex_count, -1), J.reshape(self.vertex_count, -1)


def base_graph(f: FieldSpec, d_poly: int) -> BaseGraph:
    return BaseGraph(f, d_poly)


def square(g: RotationMapGraph) -> SquareGraph:
    return SquareGraph(g)


def tensor(g1: RotationMapGraph, g2: RotationMapGraph) -> TensorGraph:
    return TensorGraph(g1, g2)


def zigzag(g: RotationMapGraph, h: RotationMapGraph) -> ZigzagGraph:
    return ZigzagGraph(g, h)


class FamilyGraph(RotationMapGraph):
    """G_t of the recursive family; delegates to its construction."""

    kind = "family"

    def __init__(self, inner: RotationMapGraph, t: int, b: int | None):
        self.inner, self.t, self.b = inner, t, b
        super().__init__(inner.vertex_count, inner.degree, (inner,))
        self._rot = inner._rot

    @property
    def lambda_bound(self):
        return self.inner.lambda_bound

    def rot_table(self, cap: int = TABLE_CAP):
        return self.inner.rot_table(cap)

    def header(self):
        tag = f" b={self.b}" if self.b is not None else " toy"
        return f"G_{self.t}{tag} [D={_fmt_count(self.vertex_count)}, deg={_fmt_count(self.degree)}]"


def _build_family(h: RotationMapGraph, t: int, memo: dict, b):
    if t in memo:
        return memo[t]
    if t == 1:
        g = square(h)
    elif t == 2:
        g = tensor(h, h)
    else:
        left = _build_family(h, (t - 1 + 1) // 2, memo, b)
        right = _build_family(h, (t - 1) // 2, memo, b)
        g = zigzag(square(tensor(left, right)), h)
    memo[t] = FamilyGraph(g, t, b)
    return memo[t]


@lru_cache(maxsize=None)
def _standard_base(b: int) -> BaseGraph:
    return BaseGraph(find_irreducible(b), 15)


_standard_memo: dict[int, dict] = {}


def rvw_family(
    b: int,
    t: int,
    base_override: RotationMapGraph | None = None,
    toy: bool = False,
) -> FamilyGraph:
    """G_t with G_1 = H^2, G_2 = H (x) H, G_t = (G_ceil((t-1)/2) (x) G_floor((t-1)/2))^2 (z) H.

    The standard base H is the q = 2^b, d_poly = 15 polynomial graph, giving a
    [2^(16bt), 2^(4b), 16 * 2^-b] graph for b >= 10. Smaller b or a custom
    base require ``toy=True``; a custom base must satisfy |V(H)| = deg(H)^8
    for t >= 3.
    """
    if t < 1:
        raise ParameterError("family index t must be >= 1")
    if base_override is not None:
        if not toy:
            raise ParameterError("a base override requires toy mode")
        if t >= 3 and base_override.vertex_count != base_override.degree**8:
            raise ParameterError(
                "toy base must satisfy |V(H)| = deg(H)^8 for t >= 3 "
                f"(got {base_override.vertex_count} vs {base_override.degree}^8)"
            )
        return _build_family(base_override, t, {}, None)
    if b < 10 and not toy:
        raise ParameterError(f"b = {b} < 10: the spectral guarantee needs b >= 10 (use toy mode)")
    if b < 1:
        raise ParameterError("b must be >= 1")
    memo = _standard_memo.setdefault(b, {})
    return _build_family(_standard_base(b), t, memo, b)


def lambda_sequence(lam: float, t_max: int) -> list[float]:
    """Bounds λ_1..λ_t_max for the family, from the base bound λ."""
    seq = [0.0, lam * lam, lam]  # 1-indexed; seq[0] unused
    for T in range(3, t_max + 1):
        if T % 2:
            t = (T + 1) // 2
            seq.append(lam + seq[t - 1] ** 2)
        else:
            t = T // 2
            seq.append(max(lam + seq[t] ** 2, lam + seq[t - 1] ** 2))
    return seq[1 : t_max + 1]


class SpectralEstimate:
    __slots__ = ("lambda_hat", "iterations", "residual")

    def __init__(self, lambda_hat: float, iterations: int, residual: float):
        self.lambda_hat = lambda_hat
        self.iterations = iterations
        self.residual = residual

    def __repr__(self):
        return (
            f"SpectralEstimate(lambda_hat={self.lambda_hat:.9g}, "
            f"iterations={self.iterations}, residual={self.residual:.3g})"
        )


def second_eigenvalue(
    g: RotationMapGraph,
    tol: float = 1e-7,
    max_iter: int = 100_000,
    seed: int = 0,
) -> SpectralEstimate:
    """|λ_2| / Δ by power iteration on A^2 with the uniform vector projected out."""
    D, deg = g.vertex_count, g.degree
    if D * deg > SPECTRAL_CAP:
        raise CapacityError(f"D * deg = {D * deg} exceeds the dense cap {SPECTRAL_CAP}")
    if D == 1:
        return SpectralEstimate(0.0, 0, 0.0)
    V, _ = g.rot_table(cap=SPECTRAL_CAP)

    def apply(vec):
        return vec[V].sum(axis=1) / deg

    v = np.random.default_rng(seed).standard_normal(D)
    v -= v.mean()
    v /= np.linalg.norm(v)
    residual = math.inf
    for it in range(1, max_iter + 1):
        w = apply(apply(v))
        w -= w.mean()
        mu2 = float(v @ w)
        residual = float(np.linalg.norm(w - mu2 * v))
        norm = float(np.linalg.norm(w))
        if norm < 1e-300:
            return SpectralEstimate(0.0, it, 0.0)
        if residual < tol:
            return SpectralEstimate(math.sqrt(max(mu2, 0.0)), it, residual)
        v = w / norm
    raise ConvergenceError(
        f"power iteration did not converge in {max_iter} steps (residual {residual:.3g})",
        residual,
    )


def parse_graph(spec: str) -> RotationMapGraph:
    """Small graphs by name: ``cN``, ``kN``, ``pN``, ``base:B:M``, ``rvw:B:T``."""
    s = spec.strip().lower()
    try:
        if s.startswith("base:"):
            _, b, m = s.split(":")
            return base_graph(find_irreducible(int(b)), int(m))
        if s.startswith("rvw:"):
            _, b, t = s.split(":")
            return rvw_family(int(b), int(t), toy=int(b) < 10)
        kinds = {"c": CycleGraph, "k": CompleteGraph, "p": PathLoopGraph}
        if s[:1] in kinds:
            return kinds[s[0]](int(s[1:]))
    except ValueError as exc:
        if isinstance(exc, ParameterError):
            raise
        raise ParameterError(f"bad graph spec {spec!r}") from exc
    raise ParameterError(f"unknown graph spec {spec!r}")
