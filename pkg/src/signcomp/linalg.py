"""Dense linear-algebra kernels shared by every other module.

All decompositions go through numpy's LAPACK-backed ``svd``/``eigh`` so that
tolerances compose predictably.  Matrices are plain ``numpy.ndarray`` values;
the helpers ``as_matrix`` and ``as_symmetric`` perform the validation that the
rest of the package relies on.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from .errors import EmptyBasisError, PreconditionError


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances used throughout the package.

    rank_rel
        Relative singular-value cutoff.  ``None`` means
        ``1e-9 * max(rows, cols)`` of the matrix being ranked.
    entry_round
        Maximum distance of a recovered entry from {+-1} or {0, 1}.
    residual_rel
        Relative Frobenius reconstruction tolerance.
    psd_slack
        Allowed magnitude of a negative eigenvalue in a "psd" matrix.
    """

    rank_rel: Optional[float] = None
    entry_round: float = 1e-3
    residual_rel: float = 1e-6
    psd_slack: float = 1e-7

    def __post_init__(self):
        if self.rank_rel is not None and not (0.0 < self.rank_rel < 1.0):
            raise PreconditionError(f"rank_rel must lie in (0, 1), got {self.rank_rel}")
        for name in ("entry_round", "residual_rel", "psd_slack"):
            if not getattr(self, name) > 0.0:
                raise PreconditionError(f"{name} must be strictly positive")

    def rank_cutoff(self, shape) -> float:
        if self.rank_rel is not None:
            return self.rank_rel
        return min(1e-9 * max(shape), 0.5)

    def with_(self, **changes) -> "Tolerances":
        return replace(self, **changes)


DEFAULT_TOL = Tolerances()


def as_matrix(M, name: str = "matrix") -> np.ndarray:
    """Return ``M`` as a finite 2-D float array with at least one entry."""
    A = np.asarray(M, dtype=float)
    if A.ndim == 1:
        A = A.reshape(-1, 1)
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise PreconditionError(f"{name} must be a non-empty 2-D array, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise PreconditionError(f"{name} has non-finite entries")
    return A


def as_symmetric(A, name: str = "matrix", rtol: float = 1e-8) -> np.ndarray:
    """Validate a square, (numerically) symmetric matrix and symmetrize it."""
    A = as_matrix(A, name)
    if A.shape[0] != A.shape[1]:
        raise PreconditionError(f"{name} must be square, got shape {A.shape}")
    scale = 1.0 + np.abs(A).max()
    if np.abs(A - A.T).max() > rtol * scale:
        raise PreconditionError(f"{name} is not symmetric")
    return 0.5 * (A + A.T)


def numerical_rank(M, tol: Tolerances = DEFAULT_TOL) -> int:
    """Number of singular values above ``rank_rel * sigma_1``; 0 for the zero matrix."""
    M = as_matrix(M)
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol.rank_cutoff(M.shape) * s[0]))


def orth_basis(M, tol: Tolerances = DEFAULT_TOL, rank: Optional[int] = None) -> np.ndarray:
    """Orthonormal basis for the numerical range of ``M``.

    With ``rank`` given, the leading ``rank`` left singular vectors are
    returned regardless of the cutoff.
    """
    M = as_matrix(M)
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    k = numerical_rank(M, tol) if rank is None else int(rank)
    if k == 0 or s[0] == 0.0:
        raise EmptyBasisError("cannot build a basis for the range of the zero matrix")
    if k > s.size:
        raise PreconditionError(f"requested rank {k} exceeds min(shape) = {s.size}")
    return U[:, :k]


def sym_eig(A) -> Tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and orthonormal eigenvectors of a symmetric matrix."""
    A = as_symmetric(A)
    lam, V = np.linalg.eigh(A)
    return lam[::-1], V[:, ::-1]


def least_squares(A, B, tol: Tolerances = DEFAULT_TOL) -> Tuple[np.ndarray, float]:
    """Minimum-norm minimizer of ``||AX - B||_F`` and the attained residual."""
    A = as_matrix(A, "A")
    Bm = np.asarray(B, dtype=float)
    vector = Bm.ndim == 1
    Bm = as_matrix(Bm, "B")
    if A.shape[0] != Bm.shape[0]:
        raise PreconditionError(f"row mismatch: A has {A.shape[0]} rows, B has {Bm.shape[0]}")
    rcond = tol.rank_cutoff(A.shape)
    X, *_ = np.linalg.lstsq(A, Bm, rcond=rcond)
    residual = float(np.linalg.norm(A @ X - Bm))
    if vector:
        X = X[:, 0]
    return X, residual


def min_eigenvalue(A) -> float:
    """Smallest eigenvalue of a symmetric matrix."""
    A = as_symmetric(A)
    return float(np.linalg.eigvalsh(A)[0])


def projector(U: np.ndarray) -> np.ndarray:
    """Orthogonal projector ``U U^t`` onto the span of orthonormal columns."""
    return U @ U.T
