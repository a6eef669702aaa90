import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from signcomp.errors import PreconditionError
from signcomp.models import sample_glm
from signcomp.schur import random_schur_sign
from signcomp.stats import (
    binomial_slack,
    incoherence,
    permeance,
    permeance_stat_bound,
    permeance_statistic,
    spherical_stat,
    verify_coherence_bounds,
    verify_empirical_width,
    verify_gaussian_norm,
    verify_marginal_tail,
    verify_permeance_stat_bound,
    verify_spherical_bound,
    verify_tail_bound,
)

HADAMARD4 = np.array([[1, 1, 1, 1], [1, -1, 1, -1], [1, 1, -1, -1], [1, -1, -1, 1]])


def test_permeance_examples():
    assert permeance(HADAMARD4[:, :3]) == pytest.approx(1.0)
    assert permeance(np.array([[1], [-1], [1]])) == pytest.approx(1.0)
    assert permeance(np.column_stack([HADAMARD4[:, 1], HADAMARD4[:, 1]])) == pytest.approx(0.0, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 12), st.integers(1, 5), st.integers(0, 2 ** 32 - 1))
def test_permeance_in_unit_interval(n, r, seed):
    S = np.random.default_rng(seed).choice([-1, 1], size=(n, r))
    assert -1e-12 <= permeance(S) <= 1.0 + 1e-12


def test_incoherence_identity():
    rep = incoherence(np.eye(5))
    assert (rep.mu_left, rep.mu_right, rep.mu_tilde) == pytest.approx((1.0, 1.0, 5.0))
    assert rep.mu == pytest.approx(5.0)
    # rank-one all-ones matrix is maximally incoherent
    flat = incoherence(np.ones((4, 6)))
    assert (flat.mu_left, flat.mu_right, flat.mu_tilde) == pytest.approx((1.0, 1.0, 1.0))
    with pytest.raises(PreconditionError):
        incoherence(np.zeros((3, 3)))


@pytest.mark.parametrize("seed", range(10))
def test_incoherence_of_gaussian_loadings(seed):
    S = random_schur_sign(20, 3, seed)
    L0 = sample_glm(S, 30, seed=seed).L0
    rep = incoherence(L0)
    assert rep.mu_left <= (1.0 + 1e-9) / permeance(S)
    assert rep.mu_left == pytest.approx(incoherence(S.astype(float)).mu_left, rel=1e-9)
    assert rep.mu_left >= 1 - 1e-12 and rep.mu_right >= 1 - 1e-12
    assert rep.mu == max(rep.mu_left, rep.mu_right, rep.mu_tilde)


# permeance statistic


def grid_minimum(L0, points=2_000_001):
    U, s, _ = np.linalg.svd(L0, full_matrices=False)
    C = L0.T @ U[:, :2]
    theta = np.linspace(0.0, math.pi, points)
    best = math.inf
    for chunk in np.array_split(theta, 40):
        a = np.stack([np.cos(chunk), np.sin(chunk)])
        best = min(best, float(np.abs(C @ a).sum(axis=0).min()))
    return best


def test_permeance_statistic_single_column():
    l = np.array([[3.0], [4.0]])
    br = permeance_statistic(l)
    assert br.exact and br.lower == pytest.approx(5.0) and br.upper == pytest.approx(5.0)


def test_permeance_statistic_symmetric_configuration():
    # three unit vectors at 60 degree spacing in a plane of R^3
    ang = np.array([0.0, math.pi / 3, 2 * math.pi / 3])
    L0 = np.vstack([np.cos(ang), np.sin(ang), np.zeros(3)])
    br = permeance_statistic(L0)
    sub = permeance_statistic(L0, method="subgradient", seed=0)
    grid = grid_minimum(L0)
    # minimum sits orthogonal to one column: |cos 30| + |cos 30| + 0 = sqrt(3)
    assert br.exact and br.upper == pytest.approx(math.sqrt(3), abs=1e-12)
    assert grid == pytest.approx(br.upper, abs=1e-3)
    assert sub.upper == pytest.approx(br.upper, abs=1e-3)
    assert sub.lower <= br.upper + 1e-12


@pytest.mark.parametrize("seed", range(3))
def test_permeance_statistic_rank_two_against_grid(seed):
    S = random_schur_sign(12, 2, seed)
    L0 = sample_glm(S, 15, seed=seed).L0
    br = permeance_statistic(L0)
    assert br.exact
    assert grid_minimum(L0) == pytest.approx(br.upper, abs=1e-3)
    assert permeance_statistic(L0, method="subgradient", seed=1).upper == pytest.approx(br.upper, abs=1e-3)


@pytest.mark.parametrize("seed", range(3))
def test_permeance_statistic_rank_three_bracket(seed):
    S = random_schur_sign(15, 3, seed)
    L0 = sample_glm(S, 25, seed=seed).L0
    exact = permeance_statistic(L0)
    approx = permeance_statistic(L0, method="subgradient", seed=seed)
    assert approx.lower <= exact.upper + 1e-9 <= approx.upper + 2e-9
    # random directions never beat the exact minimum
    U, _, _ = np.linalg.svd(L0, full_matrices=False)
    a = np.random.default_rng(seed).standard_normal((3, 20000))
    a /= np.linalg.norm(a, axis=0)
    assert np.abs(L0.T @ U[:, :3] @ a).sum(axis=0).min() >= exact.upper - 1e-9


def test_permeance_statistic_unknown_method():
    with pytest.raises(PreconditionError):
        permeance_statistic(np.eye(3), method="grid")


# spherical statistic


def test_spherical_stat_examples():
    P = np.diag([0.0, 1.0, 1.0])
    assert spherical_stat(P, np.zeros((3, 4))) == 0.0
    assert spherical_stat(P, np.array([[5.0], [1.0], [2.0]])) == pytest.approx(1.0)
    # columns inside the inlier span are dropped
    assert spherical_stat(P, np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])) == pytest.approx(1.0)
    with pytest.raises(PreconditionError):
        spherical_stat(np.diag([0.5, 1.0, 1.0]), np.ones((3, 1)))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 8), st.integers(1, 6), st.integers(0, 2 ** 32 - 1))
def test_spherical_stat_range(n, k, seed):
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((n, 1)))
    P = np.eye(n) - Q @ Q.T
    v = spherical_stat(P, rng.standard_normal((n, k)))
    assert 1.0 - 1e-12 <= v <= math.sqrt(k) + 1e-12


# harnesses


def test_binomial_slack():
    assert binomial_slack(0.5, 100) == pytest.approx(0.15)
    assert binomial_slack(2.0, 100) == 0.0


def test_tail_bound_large_t():
    chk = verify_tail_bound(5, 100, 20.0, 2000, seed=0)
    assert chk.value == 0.0 and chk.passed


def test_tail_bound_full_basis():
    chk = verify_tail_bound(6, 6, 0.3, 500, seed=1)
    assert chk.value == 0.0


def test_tail_bound_small_t_hits():
    chk = verify_tail_bound(6, 6, 0.2, 500, seed=1)
    assert chk.value == 1.0 and chk.passed


def test_single_trial_has_no_verdict():
    assert verify_tail_bound(2, 10, 1.0, 1, seed=0).passed is None
    checks = verify_coherence_bounds(random_schur_sign(20, 3, 0), 30, 1.0, 1, seed=0)
    assert checks["mu-right-tail"].passed is None
    assert "mu_right" in checks["mu-right-tail"].details


def test_coherence_bounds_small_run():
    checks = verify_coherence_bounds(random_schur_sign(20, 3, 1), 30, 1.0, 300, seed=1)
    assert all(c.passed for c in checks.values())
    assert checks["mu-left"].details["violations"] == 0


def test_gaussian_norm_small_run():
    chk = verify_gaussian_norm(20, 20, 2.0, 500, seed=2)
    assert chk.passed and chk.bound == pytest.approx(math.exp(-4))


def test_width_marginal_spherical_small_runs():
    S = random_schur_sign(20, 3, 3)
    assert verify_empirical_width(S, 50, 500, seed=3).passed
    assert verify_marginal_tail(S, 10, 500, seed=3).passed
    assert verify_spherical_bound(20, 3, 10, 2.0, 300, seed=3).passed


def test_permeance_stat_bound_trivial_regime():
    S = random_schur_sign(20, 3, 4)
    assert permeance_stat_bound(20, 30, 3, permeance(S), 2.0) < 0
    chk = verify_permeance_stat_bound(S, 30, 2.0, 10, seed=4)
    assert chk.passed and chk.details["trivial"] == 1.0


def test_permeance_stat_bound_nontrivial_regime():
    S = random_schur_sign(16, 2, 5)
    chk = verify_permeance_stat_bound(S, 2000, 2.0, 10, seed=5)
    assert chk.details["trivial"] == 0.0
    assert chk.passed
