"""Sign and binary component decompositions.

``sym_scd``
    Correlation matrix ``A = S diag(tau) S^t`` with Schur independent ``S`` and
    ``tau`` in the open simplex.  Each round maximizes a random linear
    functional over the correlation matrices with the range of ``A``; the
    maximizer is ``s s^t`` for one of the sign columns, which is then peeled off
    by moving along the pencil ``z A + (1 - z) s s^t`` to its psd boundary.
``asym_scd``
    ``B = S W^t``.  A factorization SDP produces the correlation matrix
    ``S D S^t / trace(D)`` (``D`` = column norms of ``W``), ``sym_scd`` splits
    it, and ``W`` follows by least squares.
``bcd``
    ``C = Z W^t`` with binary ``Z``.  ``2C - E`` has a sign decomposition with
    one extra column equal to ``+-e``; the binary factors are read off after
    fixing the signs of the remaining columns.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import (
    ExtractionError,
    HypothesisViolation,
    PreconditionError,
    SignResolutionError,
    SolverError,
    StructureError,
)
from .linalg import (
    DEFAULT_TOL,
    Tolerances,
    as_matrix,
    as_symmetric,
    least_squares,
    numerical_rank,
    orth_basis,
)
from .rng import base_entropy
from .schur import (
    as_binary_matrix,
    as_sign_matrix,
    binary_to_sign,
    max_sign_cardinality,
    sign_to_binary,
)
from .sdp import factorization_sdp, sign_vertex_sdp, solve_pencil_max

__all__ = [
    "SymScdResult",
    "SignDecomposition",
    "BinaryDecomposition",
    "SignedPermutation",
    "sym_scd",
    "asym_scd",
    "bcd",
    "binary_to_sign",
    "sign_to_binary",
    "match_signed_permutation",
    "match_permutation",
    "planted_sign_basis",
    "planted_binary_basis",
]

MAX_REDRAWS = 5


@dataclass
class SymScdResult:
    S: np.ndarray
    tau: np.ndarray
    residual: float = 0.0
    zetas: List[float] = field(default_factory=list)
    redraws: int = 0


@dataclass
class SignDecomposition:
    S: np.ndarray
    W: np.ndarray
    residual: float = 0.0
    X: Optional[np.ndarray] = field(default=None, repr=False)
    Y: Optional[np.ndarray] = field(default=None, repr=False)
    tau: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def rank(self) -> int:
        return self.S.shape[1]


@dataclass
class BinaryDecomposition:
    Z: np.ndarray
    Wplus: np.ndarray
    residual: float = 0.0
    xi: Optional[np.ndarray] = field(default=None, repr=False)
    sign_decomposition: Optional[SignDecomposition] = field(default=None, repr=False)


@dataclass(frozen=True)
class SignedPermutation:
    """Column map ``M -> M Pi`` with ``Pi[perm[i], i] = signs[i]``.

    Equivalently column ``i`` of the image is ``signs[i]`` times column
    ``perm[i]`` of the source.  Indices are zero-based.
    """

    perm: Tuple[int, ...]
    signs: Tuple[int, ...]

    def __post_init__(self):
        r = len(self.perm)
        if sorted(self.perm) != list(range(r)):
            raise PreconditionError(f"perm {self.perm} is not a bijection on 0..{r - 1}")
        if len(self.signs) != r or any(s not in (-1, 1) for s in self.signs):
            raise PreconditionError("signs must be a +-1 vector of the same length as perm")

    @classmethod
    def identity(cls, r: int) -> "SignedPermutation":
        return cls(tuple(range(r)), (1,) * r)

    def matrix(self) -> np.ndarray:
        r = len(self.perm)
        P = np.zeros((r, r))
        P[list(self.perm), list(range(r))] = self.signs
        return P

    def apply(self, M) -> np.ndarray:
        """Columns of ``M`` rearranged and signed: ``M @ self.matrix()``."""
        M = np.asarray(M)
        return M[:, list(self.perm)] * np.asarray(self.signs)

    def compose(self, other: "SignedPermutation") -> "SignedPermutation":
        """The map ``M -> (M self) other``."""
        perm = tuple(self.perm[j] for j in other.perm)
        signs = tuple(self.signs[j] * s for j, s in zip(other.perm, other.signs))
        return SignedPermutation(perm, signs)


# --------------------------------------------------------------------------
# symmetric


def validate_correlation(A, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    A = as_symmetric(A, "A", rtol=tol.psd_slack)
    d = np.diag(A)
    if np.abs(d - 1.0).max() > tol.entry_round:
        raise PreconditionError("A is not a correlation matrix: diagonal entries differ from 1")
    lam = np.linalg.eigvalsh(A)[0]
    if lam < -tol.psd_slack * A.shape[0]:
        raise PreconditionError(f"A is not positive semidefinite (min eigenvalue {lam:.3e})")
    return A


def _extract_sign(X: np.ndarray, tol: Tolerances) -> Optional[np.ndarray]:
    """Sign vector ``s`` with ``X = s s^t`` if ``X`` is numerically so, else None."""
    n = X.shape[0]
    lam, V = np.linalg.eigh(X)
    if lam[-1] < (1.0 - 1e-4) * n:
        return None
    v = np.sqrt(lam[-1]) * V[:, -1]
    if np.abs(np.abs(v) - 1.0).max() > tol.entry_round:
        return None
    s = np.where(v >= 0, 1, -1).astype(np.int64)
    return s if s[0] == 1 else -s


def sym_scd(
    A,
    tol: Tolerances = DEFAULT_TOL,
    seed=None,
    max_redraws: int = MAX_REDRAWS,
    rank: Optional[int] = None,
) -> SymScdResult:
    """Split a correlation matrix into ``S diag(tau) S^t``.

    ``rank`` overrides the numerical rank of ``A`` (used when ``A`` comes from
    an SDP whose rank is known).  Columns of ``S`` are normalized to start
    with +1.
    """
    A0 = validate_correlation(A, tol)
    n = A0.shape[0]
    r = numerical_rank(A0, tol) if rank is None else int(rank)
    if r == 0:
        raise PreconditionError("A has rank zero")
    if r > max_sign_cardinality(n):
        raise HypothesisViolation(
            f"rank {r} exceeds the largest Schur independent family in dimension {n}"
        )
    base = base_entropy(seed)
    Acur = A0.copy()
    signs: List[np.ndarray] = []
    zetas: List[float] = []
    redraws = 0
    for i in range(r - 1):
        U = orth_basis(Acur, tol, rank=r - i)
        s = None
        for attempt in range(max(1, max_redraws)):
            g = np.random.default_rng([base, i, attempt]).standard_normal(n)
            try:
                Xv, _ = sign_vertex_sdp(U, g, tolerances=tol)
            except SolverError:
                redraws += 1
                continue
            cand = _extract_sign(Xv, tol)
            if cand is None or any(np.array_equal(cand, t) for t in signs):
                redraws += 1
                continue
            s = cand
            break
        if s is None:
            raise ExtractionError(
                f"round {i + 1}: the vertex SDP maximizer was not a rank-one sign "
                f"matrix for {max(1, max_redraws)} random directions"
            )
        X = np.outer(s, s).astype(float)
        z = solve_pencil_max(Acur, X, tol)
        Acur = z * Acur + (1.0 - z) * X
        Acur = 0.5 * (Acur + Acur.T)
        signs.append(s)
        zetas.append(z)
    last = _extract_sign(Acur, tol)
    if last is None or any(np.array_equal(last, t) for t in signs):
        raise ExtractionError("the deflated matrix is not a rank-one sign matrix")
    signs.append(last)
    S = np.column_stack(signs)

    # A0 = sum_i tau_i s_i s_i^t, solved against the original matrix
    G = np.column_stack([np.outer(s, s).ravel() for s in S.T]).astype(float)
    tau, _ = least_squares(G, A0.ravel(), tol)
    tau = np.atleast_1d(tau)
    if tau.min() < -1e-6 or abs(tau.sum() - 1.0) > 1e-6:
        raise HypothesisViolation(
            f"weights are not in the simplex (min {tau.min():.3e}, sum {tau.sum():.9f})",
            residual=float(abs(tau.sum() - 1.0)),
        )
    residual = float(np.linalg.norm(A0 - (S * tau) @ S.T) / np.linalg.norm(A0))
    if residual > tol.residual_rel:
        raise HypothesisViolation(
            f"reconstruction residual {residual:.3e} exceeds {tol.residual_rel:.1e}",
            residual=residual,
        )
    return SymScdResult(S, tau, residual, zetas, redraws)


# --------------------------------------------------------------------------
# asymmetric


def asym_scd(B, tol: Tolerances = DEFAULT_TOL, seed=None, max_redraws: int = MAX_REDRAWS
             ) -> SignDecomposition:
    """Minimal sign component decomposition ``B = S W^t``."""
    B = as_matrix(B, "B")
    n, m = B.shape
    r = numerical_rank(B, tol)
    if r == 0:
        raise PreconditionError("B is the zero matrix")
    if r > max_sign_cardinality(n):
        raise HypothesisViolation(
            f"rank {r} exceeds the largest Schur independent family in dimension {n}"
        )
    fac = factorization_sdp(B, rank=r, tolerances=tol)
    if not fac.solution.converged:
        raise SolverError(
            f"factorization SDP did not converge ({fac.solution.status}, "
            f"{fac.solution.iterations} iterations)"
        )
    X = fac.X
    off = float(np.abs(np.diag(X) - 1.0).max())
    if off > tol.entry_round:
        raise HypothesisViolation(
            "factorization SDP solution has a non-unit diagonal: the column space of B "
            "is not spanned by Schur independent sign vectors",
            residual=off,
        )
    try:
        sym = sym_scd(X, tol, seed=seed, max_redraws=max_redraws, rank=r)
    except PreconditionError as exc:
        raise HypothesisViolation(f"intermediate correlation matrix rejected: {exc}") from exc
    S = sym.S
    Wt, _ = least_squares(S.astype(float), B, tol)
    W = Wt.T
    residual = float(np.linalg.norm(B - S @ W.T) / np.linalg.norm(B))
    if residual > tol.residual_rel:
        raise HypothesisViolation(
            f"hypotheses likely violated: reconstruction residual {residual:.3e} "
            f"exceeds {tol.residual_rel:.1e}",
            residual=residual,
        )
    return SignDecomposition(S, W, residual, X=fac.X, Y=fac.Y, tau=sym.tau)


# --------------------------------------------------------------------------
# binary


def bcd(C, tol: Tolerances = DEFAULT_TOL, seed=None, max_redraws: int = MAX_REDRAWS
        ) -> BinaryDecomposition:
    """Minimal binary component decomposition ``C = Z W^t``."""
    C = as_matrix(C, "C")
    n, m = C.shape
    rc = numerical_rank(C, tol)
    if rc == 0:
        raise PreconditionError("C is the zero matrix")
    B = 2.0 * C - 1.0
    rb = numerical_rank(B, tol)
    if rb != rc + 1:
        raise StructureError(
            f"rank(2C - E) = {rb} but rank(C) + 1 = {rc + 1}: the all-ones vector lies in "
            "the row or column space of C, so no Schur independent binary factor exists"
        )
    dec = asym_scd(B, tol, seed=seed, max_redraws=max_redraws)
    S, W = dec.S, dec.W
    j = int(np.argmax(np.abs(S.mean(axis=0))))
    col = S[:, j]
    if not np.all(col == col[0]):
        raise StructureError("no column of the sign factor equals +-e")
    phi = int(col[0])
    others = [k for k in range(S.shape[1]) if k != j]
    Sr = S[:, others]
    Wr = W[:, others]
    rhs = phi * W[:, j] + 1.0
    xi, res = least_squares(Wr, rhs, tol)
    xi = np.atleast_1d(xi)
    limit = tol.residual_rel * (1.0 + np.linalg.norm(rhs))
    if res > limit:
        raise SignResolutionError(
            f"sign system residual {res:.3e} exceeds {limit:.3e}", residual=float(res)
        )
    dev = float(np.abs(np.abs(xi) - 1.0).max())
    if dev > tol.entry_round:
        raise SignResolutionError(
            f"sign system solution {np.round(xi, 6).tolist()} is not +-1 valued", residual=dev
        )
    xi = np.where(xi >= 0, 1, -1).astype(np.int64)
    Z = (Sr * xi + 1) // 2
    Wplus = Wr * xi
    residual = float(np.linalg.norm(C - Z @ Wplus.T) / np.linalg.norm(C))
    if residual > tol.residual_rel:
        raise HypothesisViolation(
            f"binary reconstruction residual {residual:.3e} exceeds {tol.residual_rel:.1e}",
            residual=residual,
        )
    return BinaryDecomposition(Z, Wplus, residual, xi, dec)


# --------------------------------------------------------------------------
# matching


def _match(M1: np.ndarray, M2: np.ndarray, signed: bool) -> Optional[SignedPermutation]:
    if M1.shape != M2.shape:
        raise PreconditionError(f"shape mismatch: {M1.shape} vs {M2.shape}")
    r = M1.shape[1]
    plus = np.array([[np.array_equal(M2[:, i], M1[:, j]) for j in range(r)] for i in range(r)])
    if signed:
        minus = np.array(
            [[np.array_equal(M2[:, i], -M1[:, j]) for j in range(r)] for i in range(r)]
        )
    else:
        minus = np.zeros_like(plus)
    cost = (~(plus | minus)).astype(float)
    rows, cols = linear_sum_assignment(cost)
    if cost[rows, cols].sum() > 0:
        return None
    perm = tuple(int(c) for c in cols)
    signs = tuple(1 if plus[i, perm[i]] else -1 for i in range(r))
    return SignedPermutation(perm, signs)


def match_signed_permutation(S1, S2) -> Optional[SignedPermutation]:
    """Signed permutation ``Pi`` with ``S2 = S1 Pi``, or None."""
    return _match(as_sign_matrix(S1, "S1"), as_sign_matrix(S2, "S2"), signed=True)


def match_permutation(Z1, Z2) -> Optional[SignedPermutation]:
    """Permutation (all signs +1) with ``Z2 = Z1 Pi``, or None."""
    return _match(as_binary_matrix(Z1, "Z1"), as_binary_matrix(Z2, "Z2"), signed=False)


# --------------------------------------------------------------------------
# planted bases


def planted_sign_basis(B, tol: Tolerances = DEFAULT_TOL, seed=None) -> np.ndarray:
    """Schur independent sign vectors spanning ``range(B)``."""
    return asym_scd(B, tol, seed=seed).S


def planted_binary_basis(B, tol: Tolerances = DEFAULT_TOL, seed=None) -> np.ndarray:
    """Schur independent binary vectors spanning ``range(B)``.

    Runs ``bcd`` on ``U G`` where ``U`` is an orthonormal basis of the range
    and ``G`` is a Gaussian r x (r + 1) matrix; with probability one the row
    space of ``U G`` avoids the all-ones vector, as ``bcd`` requires.
    """
    B = as_matrix(B, "B")
    U = orth_basis(B, tol)
    r = U.shape[1]
    base = base_entropy(seed)
    G = np.random.default_rng([base, 0xB1]).standard_normal((r, r + 1))
    return bcd(U @ G, tol, seed=base).Z
