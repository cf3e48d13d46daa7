"""Acceptance criteria, one test per criterion, at the stated tolerances.

A summary line per criterion is printed at the end of the run by the hook in
``conftest.py``.
"""
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from cayley_qmc import qmc
from cayley_qmc.algebra import ProductObservable, SIGMA_Z
from cayley_qmc.dynamics import ModelParams, Verdict, find_fixed_points, invariant_line_trajectory, iterate_trajectory
from cayley_qmc.tree import VertexCoord
from cayley_qmc.transition import (
    build_transfer_matrix,
    leaf_sigma3_expectation,
    magnetization_terms,
    transfer_power,
)

P24 = ModelParams(2, 4.0)
LEAF_1_1 = VertexCoord((1, 1))


def test_criterion_01_critical_threshold():
    """Root count flips from 1 to 3 at theta = 3 (k=2), bracketed within one step."""
    thetas = [round(2.5 + i * 1e-3, 12) for i in range(1001)]
    t0 = time.perf_counter()
    counts = [find_fixed_points(ModelParams(2, th)).count for th in thetas]
    elapsed = time.perf_counter() - t0
    for th, c in zip(thetas, counts):
        assert c == (1 if th <= 3 else 3), th
    flips = [i for i in range(1, len(counts)) if counts[i] != counts[i - 1]]
    assert len(flips) == 1
    lo, hi = thetas[flips[0] - 1], thetas[flips[0]]
    assert lo <= 3 < hi and hi - lo <= 1e-3 + 1e-12
    assert elapsed < 1.0


def test_criterion_02_fixed_points():
    fp = find_fixed_points(P24)
    assert abs(fp.t2 - 0.1458980338) < 1e-9
    assert abs(fp.t3 - 6.8541019662) < 1e-9
    assert abs(fp.t2 * fp.t3 - 1) < 1e-12


def test_criterion_03_transfer_spectrum():
    tm = build_transfer_matrix(P24, find_fixed_points(P24).t3)
    assert abs(tm.lambda2 - 1 / 3) < 1e-10
    assert abs(tm.trace - tm.det - 1) < 1e-12
    iterated = np.eye(2)
    for _ in range(30):
        iterated = iterated @ tm.matrix
    assert np.max(np.abs(transfer_power(tm, P24, 30) - iterated)) < 1e-9


def test_criterion_04_state_values():
    t0 = time.perf_counter()
    probe = ProductObservable({LEAF_1_1: SIGMA_Z}, 2)
    st_a = qmc.oracle_weights(P24, qmc.boundary_condition(P24, "alpha0"), 2)
    st_g = qmc.oracle_weights(P24, qmc.boundary_condition(P24, "gamma"), 2)
    assert len(st_a.weights) == len(st_g.weights) == 128
    alpha_formula = leaf_sigma3_expectation(P24, "alpha0", 1)
    alpha_oracle = qmc.evaluate_state(st_a, probe)
    gamma_formula = leaf_sigma3_expectation(P24, "gamma", 1)
    gamma_oracle = qmc.evaluate_state(st_g, probe)
    elapsed = time.perf_counter() - t0
    assert abs(alpha_formula) < 1e-12
    assert abs(alpha_oracle) < 1e-12
    assert abs(gamma_formula - gamma_oracle) < 1e-9
    assert elapsed < 1.0
    assert abs(gamma_formula - 0.877869) <= 1e-6, f"phi_gamma(N=1) = {gamma_formula!r}"


def test_criterion_05_limit_magnetization():
    m_inf, c, lam = magnetization_terms(P24)
    assert abs(m_inf - 0.894432) < 1e-3
    dev = [leaf_sigma3_expectation(P24, "gamma", N) - m_inf for N in range(1, 11)]
    ratios = [b / a for a, b in zip(dev, dev[1:])]
    assert max(abs(r - lam) for r in ratios) < 1e-8


def test_criterion_06_compatibility():
    t0 = time.perf_counter()
    probes = qmc.single_site_probes(2, 1) + qmc.random_diagonal_probes(2, 1, 100, seed=2024)
    for kind in ("alpha0", "gamma"):
        bc = qmc.boundary_condition(P24, kind)
        assert qmc.compatibility_residual(P24, bc, 1, probes) < 1e-10
    assert time.perf_counter() - t0 < 5.0


@pytest.mark.parametrize("theta", [2.5, 3.0])
@pytest.mark.parametrize("alpha", [0.5, 2.0])
def test_criterion_07_uniqueness(theta, alpha):
    probes = qmc.single_site_probes(2, 2) + qmc.random_diagonal_probes(2, 2, 100, seed=7)
    assert qmc.uniqueness_identity(ModelParams(2, theta), alpha, 2, probes) < 1e-12


@pytest.mark.parametrize("k, thetas", [(2, (1.5, 2.5, 3.0, 3.5, 4.0, 8.0)), (3, (1.2, 2.0, 2.5, 3.0, 6.0))])
def test_criterion_08_recursion_residuals(k, thetas):
    for theta in thetas:
        p = ModelParams(k, theta)
        kinds = [("alpha0", None), ("alpha", 0.5), ("alpha", 2.0)]
        if p.has_transition:
            kinds += [("beta", None), ("gamma", None)]
        for kind, alpha in kinds:
            bc = qmc.boundary_condition(p, kind, alpha)
            worst = max(qmc.recursion_residual(bc, p, n) for n in range(7))
            assert worst < 1e-12, (theta, kind, alpha, worst)


def test_criterion_09_spin_flip():
    g = qmc.boundary_condition(P24, "gamma").h(0)
    b = qmc.boundary_condition(P24, "beta").h(0)
    assert abs(b.a0 - g.a0) < 1e-12
    assert abs(b.a3 + g.a3) < 1e-12
    for N in range(6):
        assert abs(leaf_sigma3_expectation(P24, "beta", N) + leaf_sigma3_expectation(P24, "gamma", N)) < 1e-10


def test_criterion_10_trajectories():
    r = iterate_trajectory(P24, 1.0, 1.0, max_steps=60)
    assert r.verdict is Verdict.CONVERGES and r.steps <= 60
    assert max(abs(r.limit[0] - 0.16), abs(r.limit[1] - 0.16)) < 1e-10
    r = iterate_trajectory(P24, 0.1, 1.0)
    assert r.verdict is Verdict.EXITS and r.exit_step == 3
    fp = find_fixed_points(P24)
    for i in (1, 2, 3):
        for x0 in (0.05, 1.0, 3.0):
            pts = iterate_trajectory(P24, x0, x0 / fp.t[i - 1], max_steps=20, tol=0.0).points
            assert len(pts) == 21
            for n, (x, y) in enumerate(pts):
                cx, cy = invariant_line_trajectory(P24, i, x0, n, fp)
                assert max(abs(cx - x), abs(cy - y)) < 1e-10


def test_criterion_11_verify_suites():
    t0 = time.perf_counter()
    for k, theta in (("2", "4"), ("3", "3")):
        proc = subprocess.run(
            [sys.executable, "-m", "cayley_qmc", "verify", "--k", k, "--theta", theta],
            capture_output=True,
            text=True,
            timeout=60,
        )
        assert proc.returncode == 0, proc.stdout + proc.stderr
    assert time.perf_counter() - t0 < 30.0
