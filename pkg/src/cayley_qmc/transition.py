"""Transfer matrix of the ordered states and the phase-transition gap.

For a constant field built from a fixed point ``t != 1`` of g, tracing out a
whole branch of the tree acts on the Pauli pair ``(h0, h3)`` of one child as
a fixed 2x2 matrix. Its powers give the expectation of Z at a deep vertex, and
the limit of that expectation separates the ordered states from the
symmetric one.
"""
from __future__ import annotations

import enum
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dynamics import FixedPointData, ModelParams, find_fixed_points, g_eval
from .errors import ParamError, RegimeError
from .qmc import a_h_matrix, field_from_fixed_point, params_kernel

FIXED_POINT_GATE = 1e-9
NEAR_CRITICAL = 1e-6


@dataclass(frozen=True)
class TransferMatrix:
    matrix: np.ndarray
    t: float
    h0: float
    h3: float
    theta_plus: float
    theta_minus: float
    lambda2: float
    x1: float
    y1: float
    x2: float
    y2: float
    route_gap: float
    identity_residual: float

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix))

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.matrix))


def _closed_form(theta: float, t: float) -> np.ndarray:
    big = t * t + 2 * theta * t + 1
    small = t * t - 1
    m = np.array(
        [
            [(theta + 1) / 2 * big, (theta - 1) / 2 * small],
            [(theta + 1) / 2 * small, (theta - 1) / 2 * big],
        ]
    )
    return m / ((theta + t) * (theta * t + 1))


def _from_branch(theta: float, k: int, h0: float, h3: float) -> tuple[np.ndarray, float, float]:
    plus = h0 * (theta + 1) / 2 + h3 * (theta - 1) / 2
    minus = h0 * (theta + 1) / 2 - h3 * (theta - 1) / 2
    p, m = plus ** (k - 1), minus ** (k - 1)
    mat = 0.5 * np.array(
        [
            [(theta + 1) / 2 * (p + m), (theta - 1) / 2 * (p - m)],
            [(theta + 1) / 2 * (p - m), (theta - 1) / 2 * (p + m)],
        ]
    )
    return mat, plus, minus


def build_transfer_matrix(p: ModelParams, t: float) -> TransferMatrix:
    """Transfer matrix for the constant field on the line of ratio ``t``.

    ``t`` must be a non-trivial fixed point of g (t3 for the gamma state, t2
    for beta). The matrix is built twice, from the closed form in ``t`` and
    from the branch product of single-child matrices; ``route_gap`` is the
    max entrywise difference. ``identity_residual`` measures
    ``t = ((theta*t + 1) / (theta + t))**k`` relative to ``t``.
    """
    if abs(t - 1) < 1e-12:
        raise ParamError("the symmetric fixed point t=1 has no transfer matrix")
    residual = abs(g_eval(p, t) - t)
    if residual > FIXED_POINT_GATE * max(1.0, t):
        raise ParamError(f"t={t} is not a fixed point of g (residual {residual:.3g})")
    theta = p.theta
    closed = _closed_form(theta, t)
    h0, h3 = field_from_fixed_point(p, t)
    branch, plus, minus = _from_branch(theta, p.k, h0, h3)
    x1, y1 = t + 1, t - 1
    return TransferMatrix(
        matrix=closed,
        t=t,
        h0=h0,
        h3=h3,
        theta_plus=plus,
        theta_minus=minus,
        lambda2=(theta**2 - 1) * t / ((theta + t) * (theta * t + 1)),
        x1=x1,
        y1=y1,
        x2=-(theta - 1) * y1,
        y2=(theta + 1) * x1,
        route_gap=float(np.max(np.abs(closed - branch))),
        identity_residual=abs(((theta * t + 1) / (theta + t)) ** p.k - t) / t,
    )


def child_matrix_product(p: ModelParams, h0: float, h3: float) -> np.ndarray:
    """Product of k single-child matrices with the first child's field left free.

    Applied to ``(h0', h3')`` it traces out a parent whose first child carries
    ``h0' + h3' Z`` and whose other children carry ``h0 + h3 Z``.
    """
    kern = params_kernel(p)
    rest = np.linalg.matrix_power(a_h_matrix((h0, h3), kern), p.k - 1) @ np.array([1.0, 0.0])
    c, d = kern.diag_sum, kern.cross
    return np.array([[c * rest[0], d * rest[1]], [c * rest[1], d * rest[0]]])


def transfer_power(tm: TransferMatrix, p: ModelParams, n: int) -> np.ndarray:
    """Closed-form ``A**n`` from the eigen-decomposition with eigenvalues 1 and lambda2."""
    if n < 0:
        raise ParamError(f"power must be >= 0, got {n}")
    theta = p.theta
    x1, y1 = tm.x1, tm.y1
    ln = tm.lambda2**n
    denom = (theta + 1) * x1**2 + (theta - 1) * y1**2
    return (
        np.array(
            [
                [(theta + 1) * x1**2 + (theta - 1) * y1**2 * ln, x1 * y1 * (theta - 1) * (1 - ln)],
                [x1 * y1 * (theta + 1) * (1 - ln), (theta + 1) * x1**2 * ln + (theta - 1) * y1**2],
            ]
        )
        / denom
    )


def _ordered_fixed_point(p: ModelParams, kind: str, fp: FixedPointData | None = None) -> float:
    if not p.has_transition:
        raise RegimeError(f"{kind} state exists only for theta > {p.theta_c}, got theta={p.theta}")
    fp = fp or find_fixed_points(p)
    return fp.t3 if kind == "gamma" else fp.t2


def _kind(kind: str) -> str:
    kind = kind.lower()
    if kind not in ("alpha0", "beta", "gamma"):
        raise ParamError(f"leaf expectation is defined for alpha0, beta, gamma; got {kind!r}")
    return kind


def leaf_sigma3_expectation(p: ModelParams, kind: str, N: int) -> float:
    """Expectation of Z at vertex (1, ..., 1) of level N+1.

    ``(1/h0) * first component of A**(N+1) @ (h3, h0)``: the Z probe turns the
    leaf field ``h0 + h3 Z`` into ``h3 + h0 Z``, and each level up applies A.
    """
    kind = _kind(kind)
    if N < 0:
        raise ParamError(f"N must be >= 0, got {N}")
    if kind == "alpha0":
        return 0.0
    tm = build_transfer_matrix(p, _ordered_fixed_point(p, kind))
    v = transfer_power(tm, p, N + 1) @ np.array([tm.h3, tm.h0])
    return float(v[0] / tm.h0)


def magnetization_terms(p: ModelParams, kind: str = "gamma") -> tuple[float, float, float]:
    """``(m_inf, c, lambda2)`` with ``leaf expectation(N) = m_inf + c * lambda2**(N+1)``."""
    kind = _kind(kind)
    if kind == "alpha0":
        return 0.0, 0.0, 0.0
    tm = build_transfer_matrix(p, _ordered_fixed_point(p, kind))
    theta, x1, y1, h0, h3 = p.theta, tm.x1, tm.y1, tm.h0, tm.h3
    denom = h0 * ((theta + 1) * x1**2 + (theta - 1) * y1**2)
    m_inf = ((theta + 1) * x1**2 * h3 + (theta - 1) * x1 * y1 * h0) / denom
    c = (theta - 1) * (y1**2 * h3 - x1 * y1 * h0) / denom
    return m_inf, c, tm.lambda2


class PhaseVerdict(enum.Enum):
    UNIQUE = "unique-state"
    TRANSITION = "phase-transition"


@dataclass(frozen=True)
class GapReport:
    N: int
    verdict: PhaseVerdict
    phi_alpha: float | None = None
    phi_gamma_N: float | None = None
    phi_limit: float | None = None
    eps0: float | None = None
    N0: int | None = None
    lambda2: float | None = None
    phi_beta_N: float | None = None

    @property
    def gap(self) -> float | None:
        if self.phi_gamma_N is None:
            return None
        return abs(self.phi_alpha - self.phi_gamma_N)

    @property
    def beta_gamma_gap(self) -> float | None:
        """Reported for information only; no equivalence verdict is drawn from it."""
        if self.phi_beta_N is None:
            return None
        return abs(self.phi_beta_N - self.phi_gamma_N)


def gap_report(p: ModelParams, N: int) -> GapReport:
    """Quasi-equivalence gap between the symmetric and the gamma state at depth N.

    ``eps0`` is half the limiting magnetization; ``N0`` is the smallest level
    such that ``|phi_gamma(N)| >= eps0`` for every ``N > N0``.
    """
    if not p.has_transition:
        return GapReport(N, PhaseVerdict.UNIQUE)
    m_inf, c, lam = magnetization_terms(p, "gamma")
    eps0 = m_inf / 2
    n0 = 0
    n = 1
    # once |c| lam**(n+1) <= |m_inf| - eps0 the inequality holds for all later n
    while abs(c) * lam ** (n + 1) > abs(m_inf) - eps0:
        if abs(m_inf + c * lam ** (n + 1)) < eps0:
            n0 = n
        n += 1
    return GapReport(
        N,
        PhaseVerdict.TRANSITION,
        phi_alpha=leaf_sigma3_expectation(p, "alpha0", N),
        phi_gamma_N=leaf_sigma3_expectation(p, "gamma", N),
        phi_limit=m_inf,
        eps0=eps0,
        N0=n0,
        lambda2=lam,
        phi_beta_N=leaf_sigma3_expectation(p, "beta", N),
    )


@dataclass(frozen=True)
class PhaseRow:
    theta: float
    regime: str
    t2: float | None = None
    t3: float | None = None
    lambda2: float | None = None
    m_infinity: float = 0.0
    eps0: float | None = None

    def as_dict(self) -> dict:
        return {
            "theta": self.theta,
            "regime": self.regime,
            "t2": self.t2,
            "t3": self.t3,
            "lambda2": self.lambda2,
            "m_infinity": self.m_infinity,
            "eps0": self.eps0,
        }


PHASE_COLUMNS = ("theta", "regime", "t2", "t3", "lambda2", "m_infinity", "eps0")


def phase_diagram_row(p: ModelParams) -> PhaseRow:
    if not p.has_transition:
        return PhaseRow(p.theta, "unique")
    fp = find_fixed_points(p)
    m_inf, _, lam = magnetization_terms(p, "gamma")
    if p.theta - p.theta_c < NEAR_CRITICAL:
        # double root at s=1: t2, t3 are too ill-conditioned to report
        return PhaseRow(p.theta, "near-critical", lambda2=lam, m_infinity=m_inf, eps0=m_inf / 2)
    return PhaseRow(p.theta, "transition", fp.t2, fp.t3, lam, m_inf, m_inf / 2)


def _row(args: tuple[int, float]) -> PhaseRow:
    k, theta = args
    return phase_diagram_row(ModelParams(k, theta))


def phase_diagram(k: int, thetas, workers: int = 1) -> list[PhaseRow]:
    """Rows for each theta, sorted by theta whatever the completion order."""
    jobs = [(k, float(t)) for t in sorted(thetas)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_row, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    return [_row(j) for j in jobs]
