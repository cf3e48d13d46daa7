"""Finite-volume quantum Markov chain states of the Ising model on the tree.

The edge operator is ``K = exp(beta * (1 + Z Z) / 2) = K0 * 1 + K3 * Z Z``.
Everything in sight (K, boundary fields, root weight) is diagonal in the Z
basis, so the density ``W = K_n K_n^*`` of a finite-volume state is a weight on
spin configurations:

    weight(sigma) = w0(sigma_root) * prod_edges (K0 + K3 sigma_x sigma_y)**2
                    * prod_leaves h_n(sigma_leaf)

Expectations are normalized traces against this weight. The enumeration
oracle materialises all ``2**|Lambda_n|`` weights; bit ``j`` of a
configuration index is the spin of site ``j`` in ``volume_vertices`` order,
with bit 0 meaning spin +1.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .algebra import DiagOp, PauliOp, ProductObservable, SIGMA_Z, product_diagonal_part
from .dynamics import ModelParams, find_fixed_points, planar_point, line_coefficients
from .errors import CapacityError, ParamError, RegimeError, SupportError
from .tree import TreeParams, VertexCoord, volume_edges, volume_size, volume_vertices

ENUMERATION_CAP = 22
DENSE_CAP = 10


@dataclass(frozen=True)
class EdgeKernel:
    beta: float
    K0: float
    K3: float

    @property
    def theta(self) -> float:
        return math.exp(2 * self.beta)

    @property
    def diag_sum(self) -> float:
        """``K0**2 + K3**2 = (theta + 1) / 2``."""
        return self.K0**2 + self.K3**2

    @property
    def cross(self) -> float:
        """``2 K0 K3 = (theta - 1) / 2``."""
        return 2 * self.K0 * self.K3

    def edge_weight(self, same_spin: bool) -> float:
        """Eigenvalue of ``K K^*`` on a pair of spins."""
        return (self.K0 + self.K3) ** 2 if same_spin else (self.K0 - self.K3) ** 2

    def matrix(self) -> np.ndarray:
        """4x4 matrix on the pair (parent, child), parent the most significant factor."""
        zz = np.diag([1.0, -1.0, -1.0, 1.0])
        return self.K0 * np.eye(4) + self.K3 * zz


def kernel(beta: float) -> EdgeKernel:
    if not beta > 0:
        raise ParamError(f"beta must be > 0, got {beta}")
    eb = math.exp(beta)
    return EdgeKernel(beta, (eb + 1) / 2, (eb - 1) / 2)


def params_kernel(p: ModelParams) -> EdgeKernel:
    return kernel(p.beta)


@dataclass(frozen=True)
class BoundaryCondition:
    """Root weight ``w0`` plus a field ``h(n)`` that is constant within each level."""

    kind: str
    w0: DiagOp
    h: Callable[[int], DiagOp]
    alpha: float | None = None

    def levels(self, n: int) -> list[DiagOp]:
        return [self.h(m) for m in range(n + 1)]

    def normalization(self) -> float:
        """``Tr(w0 h(0))``; equals 1 for a proper boundary condition."""
        prod = self.w0 * self.h(0)
        return (prod.dp + prod.dm) / 2


KINDS = ("alpha0", "alpha", "beta", "gamma")


def theta_weight(p: ModelParams) -> float:
    """``Theta = 2 / (theta + 1)``, the common value A1 = B1 on the symmetric line."""
    return 2 / (p.theta + 1)


def alpha0_value(p: ModelParams) -> float:
    return theta_weight(p) ** (p.k / (p.k - 1))


def _constant(d: DiagOp) -> Callable[[int], DiagOp]:
    return lambda n: d


def boundary_condition(p: ModelParams, kind: str, alpha: float | None = None) -> BoundaryCondition:
    kind = kind.lower().replace("_", "")
    if kind == "alpha0":
        a0 = alpha0_value(p)
        return BoundaryCondition("alpha0", DiagOp.scalar(1 / a0), _constant(DiagOp.scalar(a0)), a0)
    if kind == "alpha":
        if alpha is None or not alpha > 0:
            raise ParamError(f"the alpha family needs a positive alpha, got {alpha}")
        a0 = alpha0_value(p)

        def h(n: int) -> DiagOp:
            return DiagOp.scalar(a0 * (alpha / a0) ** (1.0 / p.k**n))

        return BoundaryCondition("alpha", DiagOp.scalar(1 / alpha), h, float(alpha))
    if kind in ("beta", "gamma"):
        if not p.has_transition:
            raise RegimeError(
                f"{kind} boundary condition exists only for theta > {p.theta_c}, got theta={p.theta}"
            )
        fp = find_fixed_points(p)
        x, y = fp.planar[1 if kind == "beta" else 2]
        h0, h3 = (x + y) / 2, (x - y) / 2
        return BoundaryCondition(kind, DiagOp.scalar(1 / h0), _constant(DiagOp.from_pauli(h0, h3)))
    raise ParamError(f"unknown boundary kind {kind!r}; expected one of {', '.join(KINDS)}")


def field_from_fixed_point(p: ModelParams, t: float) -> tuple[float, float]:
    """Pauli coefficients ``(h0, h3)`` of the constant field on the invariant line of ratio ``t``."""
    a, b = line_coefficients(p, t ** (1.0 / p.k))
    x, y = planar_point(a, b, p.k)
    return (x + y) / 2, (x - y) / 2


def a_h_matrix(h: DiagOp | tuple[float, float], kern: EdgeKernel) -> np.ndarray:
    """Transfer of the pair ``(g0, g3)`` through one child carrying the field ``h``.

    Partial-tracing a child with field ``h0 + h3 Z`` out of
    ``K (h0 + h3 Z_child)(g0 + g3 Z_parent) K`` gives ``A_h @ (g0, g3)``.
    """
    h0, h3 = (h.a0, h.a3) if isinstance(h, DiagOp) else h
    c, d = kern.diag_sum, kern.cross
    return np.array([[c * h0, d * h3], [d * h3, c * h0]], dtype=float)


def trace_children(children: Sequence[DiagOp], kern: EdgeKernel) -> DiagOp:
    """``Tr_x]`` of ``prod K * prod h_children * prod K`` as a diagonal operator on the parent."""
    g = np.array([1.0, 0.0])
    for h in reversed(children):
        g = a_h_matrix(h, kern) @ g
    return DiagOp.from_pauli(g[0], g[1])


def recursion_residual(bc: BoundaryCondition, p: ModelParams, n: int) -> float:
    """Max-abs deviation of the traced-out level ``n+1`` field from ``h(n)``."""
    if n < 0:
        raise ParamError(f"level must be >= 0, got {n}")
    kern = params_kernel(p)
    got = trace_children([bc.h(n + 1)] * p.k, kern)
    want = bc.h(n)
    return max(abs(got.a0 - want.a0), abs(got.a3 - want.a3))


def pairwise_sum(x: np.ndarray) -> float:
    """Sum with a fixed binary reduction tree (adjacent pairs first).

    For a power-of-two length the result does not depend on how the array was
    split into aligned power-of-two blocks, which is what makes chunked and
    single-block evaluation bit-identical.
    """
    x = np.asarray(x)
    if x.size == 0:
        return 0.0
    while x.size > 1:
        if x.size % 2:
            x = np.append(x, 0.0)
        x = x[0::2] + x[1::2]
    return x[0].item()


def _bits(idx: np.ndarray, j: int) -> np.ndarray:
    return ((idx >> j) & 1).astype(bool)


@dataclass
class FiniteVolumeState:
    """Exact weights of the level-``n`` state, one per spin configuration of Lambda_n."""

    params: ModelParams
    bc: BoundaryCondition
    n: int
    sites: list[VertexCoord]
    weights: np.ndarray
    chunks: int = 1

    @property
    def site_index(self) -> dict[VertexCoord, int]:
        return {v: j for j, v in enumerate(self.sites)}

    def spins(self, v: VertexCoord) -> np.ndarray:
        """+1/-1 spin of site ``v`` across all configurations."""
        j = self.site_index[v]
        idx = np.arange(self.weights.size, dtype=np.int64)
        return 1 - 2 * ((idx >> j) & 1)


def _fill_weights(
    idx: np.ndarray,
    index: dict[VertexCoord, int],
    edges: list[tuple[VertexCoord, VertexCoord]],
    leaves: list[VertexCoord],
    bc: BoundaryCondition,
    leaf_field: DiagOp,
    kern: EdgeKernel,
) -> np.ndarray:
    root_bit = _bits(idx, index[VertexCoord()])
    w = np.where(root_bit, bc.w0.dm, bc.w0.dp).astype(float)
    same, diff = kern.edge_weight(True), kern.edge_weight(False)
    for u, v in edges:
        w *= np.where(_bits(idx, index[u]) == _bits(idx, index[v]), same, diff)
    for v in leaves:
        w *= np.where(_bits(idx, index[v]), leaf_field.dm, leaf_field.dp)
    return w


def oracle_weights(
    p: ModelParams,
    bc: BoundaryCondition,
    n: int,
    cap: int = ENUMERATION_CAP,
    workers: int = 1,
) -> FiniteVolumeState:
    """Enumerate all spin configurations of Lambda_n and their weights.

    With ``workers > 1`` the configuration space is cut into ``2**j`` aligned
    blocks filled concurrently; the weights are identical either way.
    """
    if n < 0:
        raise ParamError(f"level must be >= 0, got {n}")
    _, size = volume_size(p.k, n)
    if size > cap:
        raise CapacityError(f"|Lambda_{n}| = {size} sites exceeds the enumeration cap of {cap}")
    sites = volume_vertices(p.k, n)
    index = {v: j for j, v in enumerate(sites)}
    edges = volume_edges(p.k, n)
    leaves = [v for v in sites if v.level == n]
    leaf_field = bc.h(n)
    if not (bc.w0.is_positive and leaf_field.is_positive):
        raise ParamError("boundary condition must be strictly positive")
    kern = params_kernel(p)
    total = 1 << size

    chunks = 1
    while chunks * 2 <= max(1, workers) and chunks * 2 <= total:
        chunks *= 2
    bounds = np.linspace(0, total, chunks + 1, dtype=np.int64)

    def block(i: int) -> np.ndarray:
        idx = np.arange(bounds[i], bounds[i + 1], dtype=np.int64)
        return _fill_weights(idx, index, edges, leaves, bc, leaf_field, kern)

    if chunks == 1:
        weights = block(0)
    else:
        with ThreadPoolExecutor(max_workers=chunks) as pool:
            weights = np.concatenate(list(pool.map(block, range(chunks))))
    return FiniteVolumeState(p, bc, n, sites, weights, chunks)


def _check_support(k: int, n: int, a: ProductObservable):
    tree = TreeParams(k)
    for v in a.sites:
        if v.level > n or not tree.contains(v):
            raise SupportError(f"site {v} is outside Lambda_{n} of the order-{k} tree")


def evaluate_state(st: FiniteVolumeState, a: ProductObservable):
    """Normalized trace of ``W_n`` against the diagonal part of ``a``.

    The X and Y parts are dropped first: the density is diagonal, so they
    cannot contribute. Returns a complex number only for complex observables.
    """
    _check_support(st.params.k, st.n, a)
    index = st.site_index
    factors = []
    for v, op in product_diagonal_part(a).sites.items():
        if not op.is_identity:
            factors.append((index[v], op.a0 + op.a3, op.a0 - op.a3))
    is_complex = any(isinstance(z, complex) for _, dp, dm in factors for z in (dp, dm))
    f = st.weights.astype(complex if is_complex else float)
    if factors:
        idx = np.arange(f.size, dtype=np.int64)
        for j, dp, dm in factors:
            f *= np.where(_bits(idx, j), dm, dp)
    return pairwise_sum(f) / f.size


def state_value(p: ModelParams, bc: BoundaryCondition, n: int, a: ProductObservable, **kw):
    return evaluate_state(oracle_weights(p, bc, n, **kw), a)


def compatibility_residual(
    p: ModelParams,
    bc: BoundaryCondition,
    n: int,
    probes: Iterable[ProductObservable],
) -> float:
    """Max over probes of ``|phi_{n+1}(a) - phi_n(a)|``."""
    small = oracle_weights(p, bc, n)
    big = oracle_weights(p, bc, n + 1)
    worst = 0.0
    for a in probes:
        worst = max(worst, abs(evaluate_state(big, a) - evaluate_state(small, a)))
    return worst


def uniqueness_identity(
    p: ModelParams, alpha: float, n: int, probes: Iterable[ProductObservable]
) -> float:
    """Max over probes of ``|phi_alpha(a) - phi_alpha0(a)|`` in the uniqueness regime."""
    if p.has_transition:
        raise RegimeError(f"uniqueness is only claimed for theta <= {p.theta_c}, got theta={p.theta}")
    st_a = oracle_weights(p, boundary_condition(p, "alpha", alpha), n)
    st_0 = oracle_weights(p, boundary_condition(p, "alpha0"), n)
    return max((abs(evaluate_state(st_a, a) - evaluate_state(st_0, a)) for a in probes), default=0.0)


def single_site_probes(k: int, n: int) -> list[ProductObservable]:
    return [ProductObservable({v: SIGMA_Z}, n) for v in volume_vertices(k, n)]


def random_diagonal_probes(k: int, n: int, count: int, seed: int = 0) -> list[ProductObservable]:
    """Seeded random products of real diagonal operators on random subsets of Lambda_n."""
    rng = np.random.default_rng(seed)
    sites = volume_vertices(k, n)
    out = []
    for _ in range(count):
        m = int(rng.integers(1, len(sites) + 1))
        chosen = rng.choice(len(sites), size=m, replace=False)
        ops = {}
        for j in sorted(chosen):
            a0, a3 = rng.uniform(-1, 1, size=2)
            ops[sites[j]] = PauliOp(float(a0), 0.0, 0.0, float(a3))
        out.append(ProductObservable(ops, n))
    return out


def random_pauli_probes(k: int, n: int, count: int, seed: int = 0) -> list[ProductObservable]:
    """Seeded random products of general complex 2x2 operators."""
    rng = np.random.default_rng(seed)
    sites = volume_vertices(k, n)
    out = []
    for _ in range(count):
        ops = {}
        for v in sites:
            if rng.random() < 0.7:
                c = rng.normal(size=4) + 1j * rng.normal(size=4)
                ops[v] = PauliOp(*(complex(z) for z in c))
        out.append(ProductObservable(ops, n))
    return out


def dense_evaluate(p: ModelParams, bc: BoundaryCondition, n: int, a: ProductObservable) -> complex:
    """``Tr(K_n K_n^* a)`` with full ``2**m x 2**m`` matrices and no diagonal reduction."""
    sites = volume_vertices(p.k, n)
    m = len(sites)
    if m > DENSE_CAP:
        raise CapacityError(f"dense evaluation limited to {DENSE_CAP} sites, Lambda_{n} has {m}")
    _check_support(p.k, n, a)
    index = {v: j for j, v in enumerate(sites)}
    kern = params_kernel(p)
    dim = 1 << m

    def site_op(j: int, op: np.ndarray) -> np.ndarray:
        return np.kron(np.kron(np.eye(1 << j), op), np.eye(1 << (m - j - 1)))

    def pair_op(i: int, j: int) -> np.ndarray:
        z = np.diag([1.0, -1.0])
        return kern.K0 * np.eye(dim) + kern.K3 * site_op(i, z) @ site_op(j, z)

    k_n = site_op(0, bc.w0.sqrt().matrix())
    for u, v in volume_edges(p.k, n):
        k_n = k_n @ pair_op(index[u], index[v])
    for v in sites:
        if v.level == n:
            k_n = k_n @ site_op(index[v], bc.h(n).sqrt().matrix())
    density = k_n @ k_n.conj().T
    return complex(np.trace(density @ a.matrix(sites)) / dim)
