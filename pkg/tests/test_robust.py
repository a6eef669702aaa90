import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from signcomp.decompose import asym_scd, match_signed_permutation
from signcomp.errors import HypothesisViolation, PreconditionError
from signcomp.models import sample_inlier_outlier, sample_sparse_instance
from signcomp.robust import (
    default_pcp_lambda,
    denoise_factorize_outliers,
    denoise_factorize_sparse,
    pcp_denoise,
    pcp_objective,
    reaper,
    reaper_objective,
    select_inliers,
)
from signcomp.schur import random_schur_sign
from signcomp.stats import permeance


def permeant_sign(n, r, seed, floor=0.5):
    k = 0
    while True:
        S = random_schur_sign(n, r, seed=[seed, k])
        if permeance(S) >= floor:
            return S
        k += 1


def projector_onto(M):
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    U = U[:, s > 1e-9 * s[0]]
    return U @ U.T


@pytest.mark.parametrize("n, m, lam", [(100, 50, 0.1), (1, 1, 1.0), (4, 9, 1 / 3)])
def test_default_lambda(n, m, lam):
    assert default_pcp_lambda(n, m) == pytest.approx(lam)


def test_pcp_zero():
    res = pcp_denoise(np.zeros((4, 3)))
    assert res.converged and not res.L.any() and not res.Omega.any()


@pytest.mark.parametrize("seed", [0, 1])
def test_pcp_recovers_low_rank(seed):
    S = permeant_sign(40, 2, seed)
    inst = sample_sparse_instance(S, 40, 80, 5.0, seed=seed)
    res = pcp_denoise(inst.B)
    assert res.converged
    scale = 1 + np.linalg.norm(inst.B)
    assert res.split_residual <= 1e-7 * scale
    assert np.linalg.norm(res.L - inst.L0) <= 1e-4 * np.linalg.norm(inst.L0)
    # optimality witness against the planted pair
    lam = default_pcp_lambda(40, 40)
    assert res.objective <= pcp_objective(inst.L0, inst.Omega0, lam) + 1e-6 * scale


def test_pcp_uncorrupted_rank_one():
    rng = np.random.default_rng(4)
    B = np.outer(rng.choice([-1.0, 1.0], 30), rng.standard_normal(25))
    res = pcp_denoise(B, tol=1e-9, max_iter=5000)
    assert np.linalg.norm(res.L - B) <= 1e-6 * np.linalg.norm(B)
    assert np.abs(res.Omega).max() <= 1e-6
    assert res.objective >= pcp_objective(B, np.zeros_like(B), res.lam) - 1e-6


def test_pcp_iteration_cap():
    S = permeant_sign(20, 2, 3)
    inst = sample_sparse_instance(S, 20, 20, 5.0, seed=3)
    res = pcp_denoise(inst.B, max_iter=3)
    assert not res.converged and res.iterations == 3


def test_pcp_rejects_bad_lambda():
    with pytest.raises(PreconditionError):
        pcp_denoise(np.ones((2, 2)), lam=0.0)


# REAPER


def test_reaper_without_outliers():
    rng = np.random.default_rng(0)
    B = rng.standard_normal((8, 2)) @ rng.standard_normal((2, 30))
    res = reaper(B, 2)
    assert res.converged
    assert res.objective <= 1e-9 * np.linalg.norm(B)
    assert np.allclose(res.P, projector_onto(B), atol=1e-9)


def test_reaper_single_column_codimension_one():
    b = np.array([[1.0], [2.0], [-1.0], [0.5]])
    res = reaper(b, 3)
    assert res.objective <= 1e-12
    tr, lo, hi = res.constraint_residuals
    assert tr <= 1e-8 and lo >= -1e-8 and hi >= -1e-8


@pytest.mark.parametrize("seed", [0, 1])
def test_reaper_recovers_inlier_subspace(seed):
    S = random_schur_sign(30, 3, seed)
    inst = sample_inlier_outlier(S, 200, 30, seed=seed)
    res = reaper(inst.B, 3)
    P0 = projector_onto(inst.L0)
    assert res.converged
    assert np.linalg.norm(res.P - P0, 2) <= 1e-3
    assert res.objective <= reaper_objective(inst.B, P0) + 1e-9 * (1 + res.objective)
    tr, lo, hi = res.constraint_residuals
    assert tr <= 1e-8 and lo >= -1e-8 and hi >= -1e-8
    assert select_inliers(inst.B, res.P) == inst.inliers


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_reaper_objective_is_monotone(seed):
    rng = np.random.default_rng(seed)
    n, r = 10, 2
    inl = rng.standard_normal((n, r)) @ rng.standard_normal((r, 40))
    B = np.hstack([inl, 2 * rng.standard_normal((n, 15))])
    res = reaper(B, r, max_iter=100)
    hist = np.array(res.history)
    assert np.all(np.diff(hist) <= B.shape[1] * res.delta + 1e-12 * hist[0])


def test_reaper_validation():
    with pytest.raises(PreconditionError):
        reaper(np.ones((3, 4)), 3)
    with pytest.raises(PreconditionError):
        reaper(np.ones((3, 4)), 1, delta=0.0)


def test_select_inliers_examples():
    P = np.diag([1.0, 1.0, 0.0])
    B = np.array([[1.0, 0.0], [2.0, 0.0], [0.0, 3.0]])
    assert select_inliers(B, P) == [0]
    assert select_inliers(B[:, :1], P) == [0]


# pipelines


def test_sparse_pipeline_without_corruption_matches_scd():
    S = random_schur_sign(20, 3, 2)
    B = S @ np.random.default_rng(2).standard_normal((30, 3)).T
    res = denoise_factorize_sparse(B, seed=1)
    assert match_signed_permutation(asym_scd(B, seed=1).S, res.S) is not None


def test_sparse_pipeline_recovers_signs():
    S = permeant_sign(40, 2, 7)
    inst = sample_sparse_instance(S, 40, 80, 5.0, seed=7)
    res = denoise_factorize_sparse(inst.B, seed=7)
    assert match_signed_permutation(S, res.S) is not None


def test_sparse_pipeline_rejects_dense_corruption():
    S = permeant_sign(40, 2, 1)
    inst = sample_sparse_instance(S, 40, 800, 20.0, seed=1)
    with pytest.raises(HypothesisViolation):
        denoise_factorize_sparse(inst.B)


def test_outlier_pipeline_without_outliers_matches_scd():
    S = random_schur_sign(30, 3, 5)
    inst = sample_inlier_outlier(S, 40, 0, seed=5)
    res = denoise_factorize_outliers(inst.B, 3, seed=0)
    assert res.inliers == list(range(40))
    assert match_signed_permutation(asym_scd(inst.B, seed=0).S, res.S) is not None


def test_outlier_pipeline_recovers_signs():
    S = random_schur_sign(30, 3, 6)
    inst = sample_inlier_outlier(S, 200, 30, seed=6)
    res = denoise_factorize_outliers(inst.B, 3, seed=6)
    assert match_signed_permutation(S, res.S) is not None
    assert res.inliers == inst.inliers


def test_outlier_pipeline_all_outliers():
    B = np.random.default_rng(0).standard_normal((30, 40))
    with pytest.raises(HypothesisViolation):
        denoise_factorize_outliers(B, 3)
