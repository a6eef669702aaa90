"""Schur independence of sign and binary matrices.

A sign matrix ``S`` (entries +-1, columns s_1..s_r) is Schur independent when
``{e} U {s_i * s_j : i < j}`` is linearly independent (``*`` is the entrywise
product).  A binary matrix ``Z`` is Schur independent when
``{e} U {z_i} U {z_i * z_j : i < j}`` is.  All rank decisions here are exact:
the entries are small integers, so fraction-free elimination over Python
integers gives a certificate rather than a numerical judgment.
"""

from __future__ import annotations

import math
from itertools import combinations
from typing import List, Sequence

import numpy as np

from .errors import CardinalityError, PreconditionError, SamplingError

MAX_DRAWS = 1000


def as_sign_matrix(S, name: str = "S") -> np.ndarray:
    """Validate that every entry is exactly +1 or -1; returns an int array."""
    A = np.asarray(S)
    if A.ndim == 1:
        A = A.reshape(-1, 1)
    if A.ndim != 2 or A.size == 0:
        raise PreconditionError(f"{name} must be a non-empty 2-D array")
    if not np.all((A == 1) | (A == -1)):
        raise PreconditionError(f"{name} must have entries in {{-1, +1}}")
    return A.astype(np.int64)


def as_binary_matrix(Z, name: str = "Z") -> np.ndarray:
    """Validate that every entry is exactly 0 or 1; returns an int array."""
    A = np.asarray(Z)
    if A.ndim == 1:
        A = A.reshape(-1, 1)
    if A.ndim != 2 or A.size == 0:
        raise PreconditionError(f"{name} must be a non-empty 2-D array")
    if not np.all((A == 0) | (A == 1)):
        raise PreconditionError(f"{name} must have entries in {{0, 1}}")
    return A.astype(np.int64)


def exact_rank(M) -> int:
    """Rank of an integer matrix by Bareiss fraction-free elimination."""
    rows = [[int(v) for v in row] for row in np.asarray(M)]
    if not rows or not rows[0]:
        return 0
    n, m = len(rows), len(rows[0])
    rank = 0
    prev = 1
    for col in range(m):
        pivot = next((i for i in range(rank, n) if rows[i][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        p = rows[rank][col]
        for i in range(rank + 1, n):
            a = rows[i][col]
            rows[i] = [(p * rows[i][k] - a * rows[rank][k]) // prev for k in range(m)]
        prev = p
        rank += 1
        if rank == n:
            break
    return rank


def sign_schur_family(S) -> np.ndarray:
    """Columns ``e`` and ``s_i * s_j`` for ``i < j``."""
    S = as_sign_matrix(S)
    n, r = S.shape
    cols = [np.ones(n, dtype=np.int64)]
    cols += [S[:, i] * S[:, j] for i, j in combinations(range(r), 2)]
    return np.column_stack(cols)


def binary_schur_family(Z) -> np.ndarray:
    """Columns ``e``, every ``z_i`` and ``z_i * z_j`` for ``i < j``."""
    Z = as_binary_matrix(Z)
    n, r = Z.shape
    cols = [np.ones(n, dtype=np.int64)]
    cols += [Z[:, i] for i in range(r)]
    cols += [Z[:, i] * Z[:, j] for i, j in combinations(range(r), 2)]
    return np.column_stack(cols)


def is_schur_sign(S) -> bool:
    F = sign_schur_family(S)
    if F.shape[1] > F.shape[0]:
        return False
    return exact_rank(F) == F.shape[1]


def is_schur_binary(Z) -> bool:
    F = binary_schur_family(Z)
    if F.shape[1] > F.shape[0]:
        return False
    return exact_rank(F) == F.shape[1]


def max_sign_cardinality(n: int) -> int:
    """Largest r with ``r <= (1 + sqrt(8n - 7)) / 2``."""
    if n < 1:
        raise PreconditionError(f"n must be at least 1, got {n}")
    r = (1 + math.isqrt(8 * n - 7)) // 2
    # isqrt floors the root; floor((1 + floor(x)) / 2) == floor((1 + x) / 2)
    return r


def binary_to_sign(Z) -> np.ndarray:
    """Entrywise ``z -> 2z - e``."""
    return 2 * as_binary_matrix(Z) - 1


def sign_to_binary(S) -> np.ndarray:
    """Entrywise ``s -> (s + e) / 2``."""
    return (as_sign_matrix(S) + 1) // 2


def correspondence_holds(Z) -> bool:
    """Whether ``Z`` and the sign matrix ``[2Z - E | e]`` agree on Schur independence."""
    Z = as_binary_matrix(Z)
    S = np.column_stack([binary_to_sign(Z), np.ones(Z.shape[0], dtype=np.int64)])
    return is_schur_binary(Z) == is_schur_sign(S)


def _check_count(n: int, r: int, binary: bool):
    if n < 1 or r < 1:
        raise PreconditionError(f"n and r must be positive, got n={n}, r={r}")
    bound = max_sign_cardinality(n)
    need = r + 1 if binary else r
    if need > bound:
        what = "r + 1" if binary else "r"
        raise CardinalityError(
            f"{what} = {need} exceeds the Schur independence bound "
            f"floor((1 + sqrt(8n - 7)) / 2) = {bound} for n = {n}"
        )


def random_schur_sign(n: int, r: int, seed=None) -> np.ndarray:
    """Rejection-sample a Schur independent n x r sign matrix."""
    _check_count(n, r, binary=False)
    rng = np.random.default_rng(seed)
    for _ in range(MAX_DRAWS):
        S = rng.choice(np.array([-1, 1], dtype=np.int64), size=(n, r))
        if is_schur_sign(S):
            return S
    raise SamplingError(f"no Schur independent {n}x{r} sign matrix in {MAX_DRAWS} draws")


def random_schur_binary(n: int, r: int, seed=None) -> np.ndarray:
    """Rejection-sample a Schur independent n x r binary matrix."""
    _check_count(n, r, binary=True)
    rng = np.random.default_rng(seed)
    for _ in range(MAX_DRAWS):
        Z = rng.integers(0, 2, size=(n, r), dtype=np.int64)
        if is_schur_binary(Z):
            return Z
    raise SamplingError(f"no Schur independent {n}x{r} binary matrix in {MAX_DRAWS} draws")


def is_signed_permutation(Q, atol: float = 0.0) -> bool:
    """Whether ``Q`` has exactly one nonzero per row and column, each +-1."""
    Q = np.asarray(Q, dtype=float)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        return False
    nz = np.abs(Q) > atol
    if not (np.all(nz.sum(axis=0) == 1) and np.all(nz.sum(axis=1) == 1)):
        return False
    return bool(np.all(np.abs(np.abs(Q[nz]) - 1.0) <= atol))


def is_permutation_matrix(Q, atol: float = 0.0) -> bool:
    Q = np.asarray(Q, dtype=float)
    return is_signed_permutation(Q, atol) and bool(np.all(Q[np.abs(Q) > atol] > 0))


def entries_are_signs(M, atol: float = 1e-9) -> bool:
    return bool(np.all(np.abs(np.abs(np.asarray(M, dtype=float)) - 1.0) <= atol))


def entries_are_binary(M, atol: float = 1e-9) -> bool:
    M = np.asarray(M, dtype=float)
    return bool(np.all(np.minimum(np.abs(M), np.abs(M - 1.0)) <= atol))


def column_subsets(r: int) -> List[Sequence[int]]:
    """All nonempty column subsets of ``range(r)``."""
    return [c for k in range(1, r + 1) for c in combinations(range(r), k)]
