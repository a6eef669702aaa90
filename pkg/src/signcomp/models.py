"""Generative models for test instances.

Gaussian loadings: ``L0 = S G^t / sqrt(r)`` with ``G`` (m x r) standard normal.
Sparse corruption: ``B = L0 + Omega0`` with ``Omega0`` supported on a uniformly
random set of entries.  Column outliers: ``B = [L0 Omega0] Pi`` with standard
normal outlier columns and a random column permutation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .errors import PreconditionError, SamplingError
from .linalg import numerical_rank
from .rng import substream
from .schur import as_sign_matrix, is_schur_sign


@dataclass
class GlmInstance:
    S: np.ndarray
    L0: np.ndarray
    G: np.ndarray
    seed: Optional[int] = None


@dataclass
class CorruptionInstance:
    B: np.ndarray
    model: str
    L0: np.ndarray
    Omega0: np.ndarray
    S: Optional[np.ndarray] = None
    # outlier model: B[:, j] = [L0 Omega0][:, perm[j]]
    perm: Optional[np.ndarray] = None
    inliers: List[int] = field(default_factory=list)
    outliers: List[int] = field(default_factory=list)


def _checked_sign(S, check_schur: bool) -> np.ndarray:
    S = as_sign_matrix(S)
    if check_schur and not is_schur_sign(S):
        raise PreconditionError("S is not Schur independent")
    return S


def glm_draw(S: np.ndarray, m: int, rng: np.random.Generator):
    """One draw ``(L0, G)`` from the Gaussian loadings model, without validation."""
    r = S.shape[1]
    G = rng.standard_normal((m, r))
    return (S @ G.T) / math.sqrt(r), G


def sample_glm(S, m: int, seed=None, check_schur: bool = True) -> GlmInstance:
    S = _checked_sign(S, check_schur)
    r = S.shape[1]
    if m < r:
        raise PreconditionError(f"m = {m} must be at least r = {r}")
    L0, G = glm_draw(S, m, substream(seed, 0))
    if numerical_rank(L0) != r:
        raise SamplingError("the sampled loading matrix is rank deficient")
    return GlmInstance(S, L0, G, seed)


def sample_sparse_corruption(n: int, m: int, omega: int, magnitude: float = 1.0,
                             seed=None) -> np.ndarray:
    """``omega`` entries of value +-magnitude at uniformly random positions."""
    if n < 1 or m < 1:
        raise PreconditionError("dimensions must be positive")
    if not 0 <= omega <= n * m:
        raise PreconditionError(f"omega must lie in [0, {n * m}], got {omega}")
    rng = substream(seed, 1)
    out = np.zeros(n * m)
    idx = rng.choice(n * m, size=omega, replace=False)
    out[idx] = magnitude * rng.choice(np.array([-1.0, 1.0]), size=omega)
    return out.reshape(n, m)


def sample_sparse_instance(S, m: int, omega: int, magnitude: float = 1.0, seed=None,
                           check_schur: bool = True) -> CorruptionInstance:
    glm = sample_glm(S, m, seed, check_schur)
    n = glm.S.shape[0]
    Om = sample_sparse_corruption(n, m, omega, magnitude, seed)
    return CorruptionInstance(glm.L0 + Om, "sparse", glm.L0, Om, glm.S)


def sample_inlier_outlier(S, m: int, m_prime: int, seed=None,
                          check_schur: bool = True) -> CorruptionInstance:
    """GLM inliers mixed with ``m_prime`` standard normal outlier columns."""
    if m_prime < 0:
        raise PreconditionError("m_prime must be nonnegative")
    glm = sample_glm(S, m, seed, check_schur)
    n = glm.S.shape[0]
    rng = substream(seed, 2)
    Om = rng.standard_normal((n, m_prime))
    perm = rng.permutation(m + m_prime)
    B = np.hstack([glm.L0, Om])[:, perm]
    inliers = [int(j) for j in np.flatnonzero(perm < m)]
    outliers = [int(j) for j in np.flatnonzero(perm >= m)]
    return CorruptionInstance(B, "outlier", glm.L0, Om, glm.S, perm, inliers, outliers)
