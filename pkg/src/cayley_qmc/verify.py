"""Self-check suite run by ``cayley-qmc verify``.

Each check reports a measured value next to its tolerance. Checks that need
the ordered states only run above the critical temperature; below it the
uniqueness checks take their place.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import qmc
from .algebra import ProductObservable, SIGMA_Z
from .dynamics import (
    ModelParams,
    Verdict,
    critical_theta,
    f_step,
    find_fixed_points,
    forward_recursion_step,
    g_eval,
    invariant_line_trajectory,
    iterate_trajectory,
    nested_radical_limit,
    s_polynomial,
)
from .errors import CapacityError
from .transition import (
    PhaseVerdict,
    build_transfer_matrix,
    gap_report,
    leaf_sigma3_expectation,
    magnetization_terms,
    transfer_power,
)
from .tree import VertexCoord, volume_size


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    value: float
    tol: float


def _leaf(N: int) -> VertexCoord:
    return VertexCoord((1,) * (N + 1))


def _max_oracle_level(k: int) -> int:
    n = 0
    while volume_size(k, n + 1)[1] <= qmc.ENUMERATION_CAP:
        n += 1
    return n


class _Suite:
    def __init__(self, p: ModelParams):
        self.p = p
        self.checks: list[Check] = []

    def below(self, name: str, value: float, tol: float):
        value = float(value)
        self.checks.append(Check(name, bool(value < tol), value, tol))

    def above(self, name: str, value: float, bound: float):
        value = float(value)
        self.checks.append(Check(name, bool(value > bound), value, bound))

    def flag(self, name: str, ok: bool):
        self.checks.append(Check(name, bool(ok), 1.0 if ok else 0.0, 1.0))


def _dynamics(s: _Suite):
    p = s.p
    k, theta = p.k, p.theta
    crit = critical_theta(k)
    s.below("critical.theta_c", abs(crit.theta - (k + 1) / (k - 1)), 1e-15)
    s.below("critical.beta_c", abs(np.exp(2 * crit.beta) - crit.theta), 1e-12)

    fp = find_fixed_points(p)
    s.flag("fixed_points.count_matches_regime", fp.count == (3 if p.has_transition else 1))
    s.below("fixed_points.g_residual", max(abs(g_eval(p, t) - t) / t for t in fp.t), 1e-12)
    s.below("fixed_points.s_polynomial", max(abs(s_polynomial(p, x)) for x in fp.s), 1e-12)
    s.below(
        "fixed_points.planar_fixed",
        max(max(abs(a - b) for a, b in zip(f_step(p, *pt), pt)) for pt in fp.planar),
        1e-12,
    )
    if fp.count == 3:
        s.below("fixed_points.t2_t3_reciprocal", abs(fp.t2 * fp.t3 - 1), 1e-12)
        s.flag("fixed_points.ordering", 1 / theta**k < fp.t2 < 1 < fp.t3 < theta**k)

    ts = np.linspace(1 / theta**k, theta**k, 401)[1:-1]
    gs = np.array([g_eval(p, t) for t in ts])
    s.flag("g.increasing", bool(np.all(np.diff(gs) > 0)))
    s.below("g.reciprocal_symmetry", max(abs(g_eval(p, 1 / t) * g - 1) for t, g in zip(ts, gs)), 1e-9)

    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(50):
        x, y = rng.uniform(0.05, 2.0, size=2)
        fx, fy = f_step(p, *forward_recursion_step(p, x, y))
        worst = max(worst, abs(fx - x) / x, abs(fy - y) / y)
    s.below("f.inverts_forward_step", worst, 1e-12)

    traj = iterate_trajectory(p, 1.0, 1.0)
    limit = traj.limit or (np.inf, np.inf)
    s.flag("trajectory.symmetric_start_converges", traj.verdict is Verdict.CONVERGES)
    s.below("trajectory.symmetric_limit", max(abs(a - b) for a, b in zip(limit, fp.planar[0])), 1e-10)

    bad_ratio = fp.t2 / 2 if fp.count == 3 else 0.5
    s.flag("trajectory.off_basin_exits", iterate_trajectory(p, bad_ratio, 1.0).verdict is Verdict.EXITS)

    # off-diagonal lines repel: rounding grows like rho**n, so compare only
    # while eps * rho**n stays well below the tolerance
    worst = 0.0
    for i in range(1, fp.count + 1):
        x0 = 0.7
        rho = max(1.0, _line_expansion(p, fp.s[i - 1]))
        horizon = min(20, int(np.log(1e-11 / np.finfo(float).eps) / np.log(rho)) if rho > 1 else 20)
        pts = iterate_trajectory(p, x0, x0 / fp.t[i - 1], max_steps=horizon, tol=0.0).points
        for n, pt in enumerate(pts):
            closed = invariant_line_trajectory(p, i, x0, n, fp)
            worst = max(worst, abs(closed[0] - pt[0]), abs(closed[1] - pt[1]))
    s.below("trajectory.invariant_line_closed_form", worst, 1e-10)

    b = 2 / (theta + 1)
    s.below("nested_radical.limit", abs(nested_radical_limit([b] * 80, k, 79) - b ** (k / (k - 1))), 1e-12)


def _line_expansion(p: ModelParams, s: float) -> float:
    """Log-derivative of g at the fixed point ``t = s**k``."""
    th = p.theta
    return s / p.k * (th * th - 1) / ((th - s) * (th * s - 1))


def _kinds(p: ModelParams) -> list[tuple[str, float | None]]:
    kinds = [("alpha0", None), ("alpha", 0.5), ("alpha", 2.0)]
    if p.has_transition:
        kinds += [("beta", None), ("gamma", None)]
    return kinds


def _label(kind: str, alpha: float | None) -> str:
    return kind if alpha is None else f"{kind}({alpha:g})"


def _states(s: _Suite):
    p = s.p
    kern = qmc.params_kernel(p)
    s.below("kernel.diag_sum", abs(kern.diag_sum - (p.theta + 1) / 2), 1e-15 * p.theta)
    s.below("kernel.cross", abs(kern.cross - (p.theta - 1) / 2), 1e-15 * p.theta)

    nmax = _max_oracle_level(p.k)
    for kind, alpha in _kinds(p):
        bc = qmc.boundary_condition(p, kind, alpha)
        lab = _label(kind, alpha)
        s.below(f"boundary.{lab}.normalization", abs(bc.normalization() - 1), 1e-12)
        s.below(
            f"boundary.{lab}.recursion",
            max(qmc.recursion_residual(bc, p, n) for n in range(7)),
            1e-12,
        )
        st = qmc.oracle_weights(p, bc, min(2, nmax))
        s.below(f"oracle.{lab}.normalization", abs(qmc.evaluate_state(st, ProductObservable({}, st.n)) - 1), 1e-10)
        s.above(f"oracle.{lab}.positive_weights", float(np.min(st.weights)), 0.0)

    n = 1
    probes = qmc.single_site_probes(p.k, n) + qmc.random_diagonal_probes(p.k, n, 100, seed=1)
    for kind in ("alpha0", "gamma") if p.has_transition else ("alpha0",):
        bc = qmc.boundary_condition(p, kind)
        s.below(f"compatibility.{kind}", qmc.compatibility_residual(p, bc, n, probes), 1e-10)

    bc0 = qmc.boundary_condition(p, "alpha0")
    h2 = bc0.h(2)
    broken = qmc.BoundaryCondition("alpha0", bc0.w0, lambda m: h2 * 1.1 if m == 2 else bc0.h(m))
    s.above(
        "compatibility.corrupted_control",
        qmc.compatibility_residual(p, broken, 1, [ProductObservable({}, 1)]),
        0.01,
    )

    worst = 0.0
    kind = "gamma" if p.has_transition else "alpha0"
    bc = qmc.boundary_condition(p, kind)
    st = qmc.oracle_weights(p, bc, 1)
    for a in qmc.random_pauli_probes(p.k, 1, 10, seed=3):
        worst = max(worst, abs(qmc.dense_evaluate(p, bc, 1, a) - qmc.evaluate_state(st, a)))
    s.below(f"diagonalizability.{kind}", worst, 1e-12)

    w1 = qmc.oracle_weights(p, bc, min(2, nmax), workers=1)
    w4 = qmc.oracle_weights(p, bc, min(2, nmax), workers=4)
    s.flag("oracle.worker_determinism", bool(np.array_equal(w1.weights, w4.weights)))

    if not p.has_transition:
        probes = qmc.single_site_probes(p.k, 2) + qmc.random_diagonal_probes(p.k, 2, 20, seed=2)
        for alpha in (0.5, 2.0):
            s.below(f"uniqueness.alpha({alpha:g})", qmc.uniqueness_identity(p, alpha, 2, probes), 1e-12)


def _transfer(s: _Suite):
    p = s.p
    if not p.has_transition:
        rep = gap_report(p, 3)
        s.flag("gap.unique_verdict", rep.verdict is PhaseVerdict.UNIQUE and rep.eps0 is None)
        s.below("leaf.alpha0", abs(leaf_sigma3_expectation(p, "alpha0", 5)), 1e-15)
        return

    fp = find_fixed_points(p)
    tm = build_transfer_matrix(p, fp.t3)
    A = tm.matrix
    eig = np.sort(np.linalg.eigvals(A).real)
    s.below("transfer.route_gap", tm.route_gap, 1e-12)
    s.below("transfer.t3_identity", tm.identity_residual, 1e-12)
    s.below("transfer.lambda1", abs(eig[1] - 1), 1e-12)
    s.below("transfer.lambda2_is_det", abs(eig[0] - tm.lambda2) + abs(tm.det - tm.lambda2), 1e-12)
    s.below("transfer.trace_minus_det", abs(tm.trace - tm.det - 1), 1e-12)
    s.flag("transfer.lambda2_in_unit_interval", 0 < tm.lambda2 < 1)
    v1 = np.array([tm.x1, tm.y1])
    v2 = np.array([tm.x2, tm.y2])
    s.below("transfer.eigvec1", np.max(np.abs(A @ v1 - v1)), 1e-12 * np.max(np.abs(v1)))
    s.below("transfer.eigvec2", np.max(np.abs(A @ v2 - tm.lambda2 * v2)), 1e-12 * np.max(np.abs(v2)))
    s.below(
        "transfer.closed_form_powers",
        max(np.max(np.abs(transfer_power(tm, p, n) - np.linalg.matrix_power(A, n))) for n in range(31)),
        1e-9,
    )

    s.below("leaf.alpha0", abs(leaf_sigma3_expectation(p, "alpha0", 5)), 1e-15)
    nmax = _max_oracle_level(p.k)
    worst = 0.0
    for kind in ("alpha0", "gamma", "beta"):
        bc = qmc.boundary_condition(p, kind)
        for N in range(nmax):
            try:
                st = qmc.oracle_weights(p, bc, N + 1)
            except CapacityError:
                break
            oracle = qmc.evaluate_state(st, ProductObservable({_leaf(N): SIGMA_Z}, N + 1))
            worst = max(worst, abs(oracle - leaf_sigma3_expectation(p, kind, N)))
    s.below("leaf.oracle_agreement", worst, 1e-9)
    s.below(
        "leaf.beta_gamma_antisymmetry",
        max(abs(leaf_sigma3_expectation(p, "beta", N) + leaf_sigma3_expectation(p, "gamma", N)) for N in range(6)),
        1e-10,
    )
    b = qmc.boundary_condition(p, "beta").h(0)
    g = qmc.boundary_condition(p, "gamma").h(0)
    s.below("boundary.spin_flip", max(abs(b.a0 - g.a0), abs(b.a3 + g.a3)), 1e-12)

    m_inf, c, lam = magnetization_terms(p)
    # deviations below 1e-6 lose too many digits to cancellation to pin the ratio
    dev = [leaf_sigma3_expectation(p, "gamma", N) - m_inf for N in range(1, 11)]
    dev = [d for d in dev if abs(d) > 1e-6]
    ratios = [dev[i + 1] / dev[i] for i in range(len(dev) - 1)]
    if ratios:
        s.below("leaf.geometric_ratio", max(abs(r - lam) for r in ratios), 1e-8)

    rep = gap_report(p, 3)
    s.flag("gap.transition_verdict", rep.verdict is PhaseVerdict.TRANSITION)
    s.below("gap.eps0_half_limit", abs(rep.eps0 - rep.phi_limit / 2), 1e-15)
    tail = [abs(leaf_sigma3_expectation(p, "gamma", N)) for N in range(rep.N0 + 1, rep.N0 + 40)]
    s.flag("gap.bound_after_N0", min(tail) >= rep.eps0)


def run_suite(k: int, theta: float) -> list[Check]:
    p = ModelParams(k, theta)
    s = _Suite(p)
    for part in (_dynamics, _states, _transfer):
        part(s)
    return s.checks


def timed_suite(k: int, theta: float, clock: Callable[[], float] = time.perf_counter):
    t0 = clock()
    checks = run_suite(k, theta)
    return checks, clock() - t0
