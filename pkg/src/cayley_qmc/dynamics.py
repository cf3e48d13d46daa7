"""The boundary-field recursion as a planar dynamical system.

A homogeneous diagonal boundary field on level n is a pair ``(x, y)`` of
eigenvalues. One step towards the leaves is the map

    f(x, y) = ((2*theta*x**(1/k) - 2*y**(1/k)) / (theta**2 - 1),
               (2*theta*y**(1/k) - 2*x**(1/k)) / (theta**2 - 1)),

and the ratio ``t = x / y`` evolves under the one-dimensional map

    g(t) = (theta*t**(1/k) - 1) / (theta - t**(1/k)).

Fixed points of ``g`` are found in the variable ``s = t**(1/k)`` where they
are the roots of ``s**(k+1) - theta*s**k + theta*s - 1`` on ``(1/theta, theta)``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, ParamError

CONVERGENCE_TOL = 1e-12
_XTOL = 1e-300
_RTOL = 4 * float(np.finfo(float).eps)
MAX_STEPS = 10_000


class Critical(NamedTuple):
    theta: float
    beta: float


def critical_theta(k: int) -> Critical:
    """Threshold ``theta_c = (k+1)/(k-1)`` and the matching inverse temperature."""
    if int(k) != k or k < 2:
        raise ParamError(f"branching order k must be an integer >= 2, got {k}")
    theta_c = (k + 1) / (k - 1)
    return Critical(theta_c, math.log(theta_c) / 2)


@dataclass(frozen=True)
class ModelParams:
    k: int
    theta: float

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 2:
            raise ParamError(f"branching order k must be an integer >= 2, got {self.k}")
        if not (self.theta > 1) or math.isinf(self.theta):
            raise ParamError(f"theta must be a finite number > 1, got {self.theta}")
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "theta", float(self.theta))

    @classmethod
    def from_beta(cls, k: int, beta: float) -> ModelParams:
        if not beta > 0:
            raise ParamError(f"beta must be > 0, got {beta}")
        try:
            theta = math.exp(2 * beta)
        except OverflowError:
            raise ParamError(f"theta = exp(2*beta) overflows for beta={beta}") from None
        return cls(k, theta)

    @property
    def beta(self) -> float:
        return math.log(self.theta) / 2

    @property
    def theta_c(self) -> float:
        return critical_theta(self.k).theta

    @property
    def has_transition(self) -> bool:
        # equality belongs to the uniqueness regime
        return self.theta > self.theta_c


def _root(t: float, k: int) -> float:
    return t ** (1.0 / k)


def g_eval(p: ModelParams, t: float) -> float:
    if t < 0:
        raise DomainError(f"g is undefined for negative t={t}")
    s = _root(t, p.k)
    if s == p.theta:
        raise DomainError(f"g has a pole at t = theta**k = {p.theta ** p.k}")
    return (p.theta * s - 1) / (p.theta - s)


def s_polynomial(p: ModelParams, s: float) -> float:
    """``s**(k+1) - theta*s**k + theta*s - 1``; its roots are the k-th roots of fixed points."""
    return s ** (p.k + 1) - p.theta * s**p.k + p.theta * s - 1


def deflated_polynomial(p: ModelParams, s: float) -> float:
    """The s-polynomial divided by ``(s - 1)``, evaluated by synthetic division."""
    coeffs = [1.0, -p.theta] + [0.0] * (p.k - 2) + [p.theta, -1.0]
    acc = 0.0
    quotient = []
    for c in coeffs[:-1]:
        acc += c
        quotient.append(acc)
    value = 0.0
    for c in quotient:
        value = value * s + c
    return value


@dataclass(frozen=True)
class FixedPointData:
    """Fixed points ``t_i`` of g (ordered t1=1, t2, t3) and the derived planar fixed points."""

    params: ModelParams
    t: tuple[float, ...]
    s: tuple[float, ...]
    A: tuple[float, ...]
    B: tuple[float, ...]
    planar: tuple[tuple[float, float], ...]

    @property
    def count(self) -> int:
        return len(self.t)

    @property
    def t1(self) -> float:
        return self.t[0]

    @property
    def t2(self) -> float | None:
        return self.t[1] if self.count == 3 else None

    @property
    def t3(self) -> float | None:
        return self.t[2] if self.count == 3 else None

    def line(self, i: int) -> int:
        """Validate a 1-based invariant-line index and return the 0-based position."""
        if not 1 <= i <= self.count:
            raise IndexError(f"invariant line l{i} does not exist at theta={self.params.theta}")
        return i - 1


def line_coefficients(p: ModelParams, s: float) -> tuple[float, float]:
    """``(A, B)`` with ``f(x, y) = (A, B) * y**(1/k)`` on the line of ratio ``s**k``."""
    d = p.theta**2 - 1
    return (2 * p.theta * s - 2) / d, (2 * p.theta - 2 * s) / d


def find_fixed_points(p: ModelParams) -> FixedPointData:
    s_roots = [1.0]
    if p.has_transition:
        # the deflated polynomial is negative at s=1 and positive at 1/theta and theta
        q = lambda s: deflated_polynomial(p, s)  # noqa: E731
        lo = brentq(q, 1.0 / p.theta, 1.0, xtol=_XTOL, rtol=_RTOL, maxiter=500)
        hi = brentq(q, 1.0, p.theta, xtol=_XTOL, rtol=_RTOL, maxiter=500)
        s_roots += [lo, hi]
    return _assemble(p, s_roots)


def _assemble(p: ModelParams, s_roots: Sequence[float]) -> FixedPointData:
    t = tuple(s**p.k for s in s_roots)
    A, B, planar = [], [], []
    for s in s_roots:
        a, b = line_coefficients(p, s)
        A.append(a)
        B.append(b)
        planar.append(planar_point(a, b, p.k))
    return FixedPointData(p, t, tuple(s_roots), tuple(A), tuple(B), tuple(planar))


def planar_point(a: float, b: float, k: int) -> tuple[float, float]:
    scale = b ** (1.0 / (k - 1))
    return a * scale, b * scale


def planar_fixed_points(fp: FixedPointData, p: ModelParams | None = None) -> list[tuple[float, float]]:
    return list(fp.planar)


def ratio_domain(p: ModelParams) -> tuple[float, float]:
    bound = p.theta**p.k
    return 1.0 / bound, bound


def in_f_domain(p: ModelParams, x: float, y: float) -> bool:
    if not (x > 0 and y > 0):
        return False
    bound = p.theta**p.k
    return y / bound <= x <= bound * y


def f_step(p: ModelParams, x: float, y: float) -> tuple[float, float]:
    if not in_f_domain(p, x, y):
        raise DomainError(f"({x}, {y}) is outside the domain of f at theta={p.theta}, k={p.k}")
    rx, ry = _root(x, p.k), _root(y, p.k)
    d = p.theta**2 - 1
    return (2 * p.theta * rx - 2 * ry) / d, (2 * p.theta * ry - 2 * rx) / d


def forward_recursion_step(p: ModelParams, x: float, y: float) -> tuple[float, float]:
    """Field on the parent level from the field on the child level; inverse of ``f_step``."""
    if not (x > 0 and y > 0):
        raise DomainError(f"field eigenvalues must be positive, got ({x}, {y})")
    return ((p.theta * x + y) / 2) ** p.k, ((x + p.theta * y) / 2) ** p.k


class Verdict(enum.Enum):
    CONVERGES = "converges"
    EXITS = "exits-domain"
    FIXED = "at-fixed-point"
    UNDETERMINED = "undetermined"


@dataclass
class TrajectoryResult:
    points: list[tuple[float, float]]
    verdict: Verdict
    limit: tuple[float, float] | None = None
    exit_step: int | None = None
    predicted: str = ""
    steps: int = field(init=False)

    def __post_init__(self):
        self.steps = len(self.points) - 1


def classify_ratio(p: ModelParams, t: float, fp: FixedPointData | None = None) -> str:
    """Predicted fate of a trajectory from its starting ratio.

    Returns ``"line i"`` on an invariant line, ``"converges"`` inside the basin
    of the t1 point, ``"finite"`` when the trajectory must leave the domain and
    ``"outside"`` when the ratio is not in the domain at all.
    """
    fp = fp or find_fixed_points(p)
    lo, hi = ratio_domain(p)
    for i, ti in enumerate(fp.t, start=1):
        if abs(t - ti) <= 1e-14 * max(1.0, ti):
            return f"line {i}"
    if not lo <= t <= hi:
        return "outside"
    if fp.count == 3:
        return "converges" if fp.t2 < t < fp.t3 else "finite"
    return "finite"


def iterate_trajectory(
    p: ModelParams,
    x0: float,
    y0: float,
    max_steps: int = MAX_STEPS,
    tol: float = CONVERGENCE_TOL,
) -> TrajectoryResult:
    if not (x0 > 0 and y0 > 0):
        raise ParamError(f"initial point must be positive, got ({x0}, {y0})")
    predicted = classify_ratio(p, x0 / y0)
    points = [(x0, y0)]
    x, y = x0, y0
    for step in range(1, max_steps + 1):
        try:
            nx, ny = f_step(p, x, y)
        except DomainError:
            return TrajectoryResult(points, Verdict.EXITS, exit_step=step, predicted=predicted)
        points.append((nx, ny))
        if max(abs(nx - x), abs(ny - y)) < tol:
            verdict = Verdict.FIXED if step == 1 else Verdict.CONVERGES
            return TrajectoryResult(points, verdict, limit=(nx, ny), predicted=predicted)
        x, y = nx, ny
    return TrajectoryResult(points, Verdict.UNDETERMINED, predicted=predicted)


def invariant_line_trajectory(
    p: ModelParams, i: int, x0: float, n: int, fp: FixedPointData | None = None
) -> tuple[float, float]:
    """Closed-form n-th iterate of a start point on the invariant line ``y = x / t_i``."""
    fp = fp or find_fixed_points(p)
    j = fp.line(i)
    if not x0 > 0:
        raise ParamError(f"x0 must be positive, got {x0}")
    px, py = fp.planar[j]
    y0 = x0 / fp.t[j]
    e = 1.0 / p.k**n
    return px * (x0 / px) ** e, py * (y0 / py) ** e


def nested_radical_limit(b: Sequence[float] | Callable[[int], float], k: int, n: int) -> float:
    """``b_n * (b_{n-1} * ( ... * b_0**(1/k))**(1/k))**(1/k)``.

    Tends to ``b**(k/(k-1))`` when ``b_m -> b``.
    """
    term = b if callable(b) else b.__getitem__
    acc = None
    for m in range(n + 1):
        bm = term(m)
        if not bm > 0:
            raise ParamError(f"sequence entries must be positive, b_{m}={bm}")
        acc = bm if acc is None else bm * _root(acc, k)
    return acc
