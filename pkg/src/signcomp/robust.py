"""Denoising front-ends and denoise-then-factorize pipelines.

``pcp_denoise`` splits ``B = L + Omega`` by principal component pursuit,

    minimize ||L||_* + lam ||Omega||_1   subject to   L + Omega = B,

solved with ADMM (singular value thresholding for ``L``, entrywise soft
thresholding for ``Omega``, residual-balanced penalty).

``reaper`` fits an r-dimensional subspace to data with column outliers,

    minimize sum_i ||(I - P) b_i||   over  trace(P) = r,  0 <= P <= I,

by iteratively reweighted least squares; every reweighted subproblem is solved
exactly by a top-r eigenprojector, so iterates are orthogonal projectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Union

import numpy as np

from .decompose import SignDecomposition, asym_scd
from .errors import HypothesisViolation, PreconditionError
from .linalg import DEFAULT_TOL, Tolerances, as_matrix, as_symmetric

PCP_TOL = 1e-7
PCP_MAX_ITER = 2000
REAPER_TOL = 1e-9
REAPER_MAX_ITER = 500
INLIER_TOL = 1e-6


@dataclass
class PcpResult:
    L: np.ndarray
    Omega: np.ndarray
    objective: float
    iterations: int
    split_residual: float
    converged: bool
    lam: float = float("nan")


@dataclass
class ReaperResult:
    P: np.ndarray
    objective: float
    iterations: int
    constraint_residuals: tuple
    converged: bool
    history: List[float] = field(default_factory=list, repr=False)
    delta: float = 0.0


@dataclass
class PipelineResult:
    decomposition: SignDecomposition
    denoised: Union[PcpResult, ReaperResult]
    inliers: Optional[List[int]] = None

    @property
    def S(self) -> np.ndarray:
        return self.decomposition.S

    @property
    def W(self) -> np.ndarray:
        return self.decomposition.W


def default_pcp_lambda(n: int, m: int) -> float:
    if n < 1 or m < 1:
        raise PreconditionError("dimensions must be positive")
    return 1.0 / math.sqrt(max(n, m))


def pcp_objective(L, Omega, lam: float) -> float:
    return float(np.linalg.svd(L, compute_uv=False).sum() + lam * np.abs(Omega).sum())


def _svt(M: np.ndarray, thresh: float) -> np.ndarray:
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    s = np.maximum(s - thresh, 0.0)
    k = int(np.count_nonzero(s))
    return (U[:, :k] * s[:k]) @ Vt[:k]


def _soft(M: np.ndarray, thresh: float) -> np.ndarray:
    return np.sign(M) * np.maximum(np.abs(M) - thresh, 0.0)


def pcp_denoise(
    B,
    lam: Optional[float] = None,
    tol: float = PCP_TOL,
    max_iter: int = PCP_MAX_ITER,
) -> PcpResult:
    """Principal component pursuit by ADMM.

    Stops when both the split residual ``||B - L - Omega||_F`` and the dual
    residual ``mu ||Omega_k - Omega_{k-1}||_F`` fall below ``tol (1 + ||B||_F)``.
    """
    B = as_matrix(B, "B")
    n, m = B.shape
    if lam is None:
        lam = default_pcp_lambda(n, m)
    if not lam > 0:
        raise PreconditionError("lam must be positive")
    normB = float(np.linalg.norm(B))
    L = np.zeros_like(B)
    Om = np.zeros_like(B)
    if normB == 0.0:
        return PcpResult(L, Om, 0.0, 0, 0.0, True, lam)
    Y = np.zeros_like(B)
    mu = n * m / (4.0 * np.abs(B).sum())
    scale = 1.0 + normB
    converged = False
    it = 0
    split = math.inf
    for it in range(1, max_iter + 1):
        L = _svt(B - Om + Y / mu, 1.0 / mu)
        Om_prev = Om
        Om = _soft(B - L + Y / mu, lam / mu)
        R = B - L - Om
        Y = Y + mu * R
        split = float(np.linalg.norm(R))
        dual = mu * float(np.linalg.norm(Om - Om_prev))
        if split <= tol * scale and dual <= tol * scale:
            converged = True
            break
        if split > 10.0 * dual:
            mu *= 2.0
        elif dual > 10.0 * split:
            mu /= 2.0
    return PcpResult(L, Om, pcp_objective(L, Om, lam), it, split, converged, lam)


# --------------------------------------------------------------------------
# REAPER


def reaper_objective(B, P) -> float:
    B = np.asarray(B, dtype=float)
    return float(np.linalg.norm(B - P @ B, axis=0).sum())


def _top_projector(C: np.ndarray, r: int) -> np.ndarray:
    _, V = np.linalg.eigh(C)
    Q = V[:, -r:]
    return Q @ Q.T


def projector_constraint_residuals(P, r: int) -> tuple:
    lam = np.linalg.eigvalsh(P)
    return (abs(float(np.trace(P)) - r), float(lam[0]), float(1.0 - lam[-1]))


def reaper(
    B,
    r: int,
    tol: float = REAPER_TOL,
    max_iter: int = REAPER_MAX_ITER,
    delta: Optional[float] = None,
) -> ReaperResult:
    """Robust r-dimensional subspace fit by IRLS.

    Weights are ``1 / max(delta, ||(I - P) b_i||)``.  The objective is
    non-increasing up to ``m * delta / 2`` per step (majorization argument), and
    iteration stops when the decrease is below ``tol (1 + objective)``.
    """
    B = as_matrix(B, "B")
    n, m = B.shape
    if not 1 <= r < n:
        raise PreconditionError(f"need 1 <= r < n, got r={r}, n={n}")
    normB = float(np.linalg.norm(B))
    if delta is None:
        delta = 1e-10 * normB if normB > 0 else 1e-300
    if not delta > 0:
        raise PreconditionError("delta must be positive")
    P = _top_projector(B @ B.T, r)
    obj = reaper_objective(B, P)
    history = [obj]
    converged = obj == 0.0
    it = 0
    while not converged and it < max_iter:
        it += 1
        res = np.linalg.norm(B - P @ B, axis=0)
        beta = 1.0 / np.maximum(delta, res)
        P_new = _top_projector((B * beta) @ B.T, r)
        new = reaper_objective(B, P_new)
        history.append(new)
        decrease = obj - new
        P, obj = P_new, new
        if decrease < tol * (1.0 + obj):
            converged = True
    P = 0.5 * (P + P.T)
    return ReaperResult(P, obj, it, projector_constraint_residuals(P, r), converged,
                        history, delta)


def select_inliers(B, P, tol: float = INLIER_TOL) -> List[int]:
    """Columns of ``B`` fixed by ``P`` up to ``tol (1 + ||b_i||)``."""
    B = as_matrix(B, "B")
    P = as_symmetric(P, "P", rtol=1e-6)
    if P.shape[0] != B.shape[0]:
        raise PreconditionError("P and B have incompatible shapes")
    res = np.linalg.norm(B - P @ B, axis=0)
    return [int(i) for i in np.flatnonzero(res <= tol * (1.0 + np.linalg.norm(B, axis=0)))]


# --------------------------------------------------------------------------
# pipelines


def denoise_factorize_sparse(
    B,
    lam: Optional[float] = None,
    pcp_tol: float = 1e-9,
    max_iter: int = 5000,
    tol: Tolerances = DEFAULT_TOL,
    seed=None,
) -> PipelineResult:
    """PCP, then a sign component decomposition of the low-rank part."""
    pcp = pcp_denoise(B, lam=lam, tol=pcp_tol, max_iter=max_iter)
    if not np.any(pcp.L):
        raise HypothesisViolation("the low-rank component is zero")
    dec = asym_scd(pcp.L, tol, seed=seed)
    return PipelineResult(dec, pcp)


def denoise_factorize_outliers(
    B,
    r: int,
    reaper_tol: float = REAPER_TOL,
    max_iter: int = REAPER_MAX_ITER,
    inlier_tol: float = INLIER_TOL,
    tol: Tolerances = DEFAULT_TOL,
    seed=None,
) -> PipelineResult:
    """REAPER, inlier selection, then a sign component decomposition of the inliers."""
    B = as_matrix(B, "B")
    fit = reaper(B, r, tol=reaper_tol, max_iter=max_iter)
    inliers = select_inliers(B, fit.P, inlier_tol)
    if len(inliers) < r:
        raise HypothesisViolation(
            f"only {len(inliers)} columns lie in the fitted subspace; need at least r = {r}"
        )
    dec = asym_scd(B[:, inliers], tol, seed=seed)
    if dec.rank != r:
        raise HypothesisViolation(
            f"the inlier columns have rank {dec.rank}, expected {r}"
        )
    return PipelineResult(dec, fit, inliers)
