"""Small dense semidefinite programming.

``solve_linear_sdp`` is a primal-dual interior point method (HKM search
direction, Mehrotra predictor-corrector) for

    minimize/maximize  <C, X>   subject to  <A_k, X> = b_k,  X >= 0

with a single dense symmetric matrix variable.  Linearly dependent equality
constraints are pruned before the iteration starts, so callers may pass
redundant families such as ``diag(X) = e`` together with ``trace(X) = n``.

The builders below assemble the programs used by the decomposition
algorithms.  Both sign-related programs carry the constraint
``trace(P X) = n`` with ``P`` the projector onto a subspace of dimension r;
together with ``diag(X) = e`` this forces ``X = U X~ U^t`` for an orthonormal
basis ``U`` of the subspace, so the programs are posed directly in the r x r
variable ``X~`` (the full-size formulation has no strictly feasible point).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as sla

from .errors import (
    HypothesisViolation,
    InfeasibleError,
    PreconditionError,
    UnboundedPencilError,
)
from .linalg import DEFAULT_TOL, Tolerances, as_matrix, as_symmetric, numerical_rank

DEFAULT_SDP_TOL = 1e-8


@dataclass
class LinearSdpProblem:
    """``sense <C, X>`` subject to ``<A_k, X> = b_k`` and ``X >= 0``."""

    objective: np.ndarray
    constraints: Sequence[Tuple[np.ndarray, float]]
    sense: str = "min"

    def __post_init__(self):
        self.objective = as_symmetric(self.objective, "objective")
        if self.sense not in ("min", "max"):
            raise PreconditionError(f"sense must be 'min' or 'max', got {self.sense!r}")
        if len(self.constraints) == 0:
            raise PreconditionError("constraint list must be nonempty")
        cons = []
        for k, (A, b) in enumerate(self.constraints):
            A = as_symmetric(A, f"constraint {k}")
            if A.shape != self.objective.shape:
                raise PreconditionError(
                    f"constraint {k} has shape {A.shape}, expected {self.objective.shape}"
                )
            cons.append((A, float(b)))
        self.constraints = cons

    @property
    def dim(self) -> int:
        return self.objective.shape[0]


@dataclass
class SdpSolution:
    X: np.ndarray
    objective_value: float
    primal_residual: float
    min_eig: float
    iterations: int
    converged: bool
    y: np.ndarray = field(repr=False, default=None)
    Z: np.ndarray = field(repr=False, default=None)
    gap: float = float("nan")
    dual_residual: float = float("nan")
    status: str = ""


def _max_step(V: np.ndarray, D: np.ndarray) -> float:
    """Largest alpha with V + alpha D >= 0, for V positive definite."""
    L = np.linalg.cholesky(V)
    Li = sla.solve_triangular(L, np.eye(V.shape[0]), lower=True)
    W = Li @ D @ Li.T
    lam = np.linalg.eigvalsh(0.5 * (W + W.T))[0]
    return math.inf if lam >= 0 else -1.0 / lam


def _sym(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.T)


def _prune_constraints(A_rows: np.ndarray, b: np.ndarray, dependency_tol: float):
    """Replace the constraint rows by an orthonormal basis of their row space."""
    norms = np.linalg.norm(A_rows, axis=1)
    zero = norms == 0.0
    if np.any(np.abs(b[zero]) > 0.0):
        raise InfeasibleError("a constraint reads 0 = b with b != 0")
    A_rows = A_rows[~zero] / norms[~zero, None]
    b = b[~zero] / norms[~zero]
    U, s, Vt = np.linalg.svd(A_rows, full_matrices=False)
    rho = int(np.count_nonzero(s > dependency_tol * s[0]))
    coef = U[:, :rho].T @ b
    inconsistency = np.linalg.norm(b - U[:, :rho] @ coef)
    if inconsistency > 1e-7 * (1.0 + np.linalg.norm(b)):
        raise InfeasibleError(
            f"equality constraints are inconsistent (residual {inconsistency:.3e})"
        )
    return Vt[:rho], coef / s[:rho]


def solve_linear_sdp(
    problem: LinearSdpProblem,
    tol: float = DEFAULT_SDP_TOL,
    max_iter: int = 100,
    dependency_tol: float = 1e-10,
) -> SdpSolution:
    """Solve a linear SDP by a primal-dual interior point method.

    Convergence means relative primal/dual infeasibility and relative duality
    gap below ``tol`` and ``max_k |<A_k, X> - b_k| <= tol * max(1, max|b|)``.
    Exhausting ``max_iter`` returns a non-converged solution; detected
    infeasibility raises ``InfeasibleError``.
    """
    N = problem.dim
    sign = 1.0 if problem.sense == "min" else -1.0
    C0 = sign * problem.objective
    A0 = np.array([A.ravel() for A, _ in problem.constraints])
    b0 = np.array([b for _, b in problem.constraints])
    A, b = _prune_constraints(A0, b0, dependency_tol)

    bscale = max(1.0, float(np.linalg.norm(b)))
    cscale = max(1.0, float(np.linalg.norm(C0)))
    b = b / bscale
    C = C0 / cscale
    abs_tol = tol * max(1.0, float(np.abs(b0).max()))

    xi = max(10.0, math.sqrt(N), N * float(np.max(1.0 + np.abs(b))) / 2.0)
    eta = max(10.0, math.sqrt(N), float(np.linalg.norm(C)))
    X = xi * np.eye(N)
    Z = eta * np.eye(N)
    y = np.zeros(A.shape[0])
    nb = 1.0 + np.linalg.norm(b)
    nc = 1.0 + np.linalg.norm(C)

    converged = False
    status = "max_iter"
    stalls = 0
    it = 0
    pinf = dinf = relgap = math.inf
    for it in range(1, max_iter + 1):
        rp = b - A @ X.ravel()
        Rd = C - Z - (A.T @ y).reshape(N, N)
        pobj = float(np.vdot(C, X))
        dobj = float(b @ y)
        gap = float(np.vdot(X, Z))
        pinf = np.linalg.norm(rp) / nb
        dinf = np.linalg.norm(Rd) / nc
        relgap = max(gap, abs(pobj - dobj)) / (1.0 + abs(pobj) + abs(dobj))
        if pinf < tol and dinf < tol and relgap < tol:
            resid = np.abs(A0 @ (bscale * X).ravel() - b0).max()
            if resid <= abs_tol:
                converged = True
                status = "converged"
                it -= 1
                break
        if dobj > 1e10 and dinf < 1e-6:
            raise InfeasibleError("primal infeasible: dual objective diverges")
        if pobj < -1e10 and pinf < 1e-6:
            raise InfeasibleError("dual infeasible: primal objective is unbounded below")

        try:
            Lz = sla.cho_factor(Z, lower=True)
            Zi = sla.cho_solve(Lz, np.eye(N))
            Zi = _sym(Zi)
            M = A @ np.kron(X, Zi) @ A.T
            M = _sym(M)
            Mf = sla.cho_factor(M, lower=True)
        except (np.linalg.LinAlgError, sla.LinAlgError):
            status = "numerical breakdown"
            break
        mu = gap / N
        XRdZi = X @ Rd @ Zi

        def direction(sigma, corr):
            R = sigma * mu * Zi - X - XRdZi
            if corr is not None:
                R = R - corr
            dy = sla.cho_solve(Mf, rp - A @ _sym(R).ravel())
            dZ = Rd - (A.T @ dy).reshape(N, N)
            dX = sigma * mu * Zi - X - _sym(X @ dZ @ Zi)
            if corr is not None:
                dX = dX - _sym(corr)
            return _sym(dX), dy, _sym(dZ)

        try:
            dXp, dyp, dZp = direction(0.0, None)
            ap = min(1.0, _max_step(X, dXp))
            ad = min(1.0, _max_step(Z, dZp))
            ratio = float(np.vdot(X + ap * dXp, Z + ad * dZp)) / gap
            sigma = min(1.0, max(ratio, 0.0)) ** 3
            dX, dy, dZ = direction(sigma, dXp @ dZp @ Zi)
            gamma = 0.9 + 0.09 * min(ap, ad)
            aP = min(1.0, gamma * _max_step(X, dX))
            aD = min(1.0, gamma * _max_step(Z, dZ))
        except np.linalg.LinAlgError:
            status = "numerical breakdown"
            break
        X = _sym(X + aP * dX)
        y = y + aD * dy
        Z = _sym(Z + aD * dZ)
        stalls = stalls + 1 if max(aP, aD) < 1e-8 else 0
        if stalls >= 3:
            status = "stalled"
            break

    X = bscale * X
    y = cscale * y
    Z = cscale * Z
    residual = float(np.abs(A0 @ X.ravel() - b0).max())
    return SdpSolution(
        X=X,
        objective_value=float(np.vdot(problem.objective, X)),
        primal_residual=residual,
        min_eig=float(np.linalg.eigvalsh(X)[0]),
        iterations=it,
        converged=converged,
        y=y,
        Z=Z,
        gap=float(relgap),
        dual_residual=float(dinf),
        status=status,
    )


# --------------------------------------------------------------------------
# problem builders


def _embed(block: np.ndarray, N: int, offset: int = 0) -> np.ndarray:
    out = np.zeros((N, N))
    k = block.shape[0]
    out[offset:offset + k, offset:offset + k] = block
    return out


@dataclass
class DiagConstraints:
    """``diag(U X~ U^t) = e`` restated as an independent family in X~."""

    matrices: List[np.ndarray]
    rhs: np.ndarray
    # smallest kept singular value over the largest one; tiny values signal a
    # sign family that is not Schur independent
    conditioning: float
    # relative least-squares inconsistency of the dropped part
    inconsistency: float


def diag_constraints(U: np.ndarray, keep: Optional[int] = None) -> DiagConstraints:
    """Independent form of ``diag(U X~ U^t) = e`` for orthonormal ``U`` (n x r).

    When ``range(U)`` is spanned by a Schur independent sign family the
    constraint map has rank exactly ``1 + r(r-1)/2``; that is the default
    ``keep``.
    """
    n, r = U.shape
    if keep is None:
        keep = 1 + r * (r - 1) // 2
    rows = np.einsum("ki,kj->kij", U, U).reshape(n, r * r)
    e = np.ones(n)
    Uc, s, Vt = np.linalg.svd(rows, full_matrices=False)
    keep = min(keep, s.size)
    coef = Uc[:, :keep].T @ e
    inconsistency = float(np.linalg.norm(e - Uc[:, :keep] @ coef) / math.sqrt(n))
    mats = [_sym(Vt[j].reshape(r, r)) for j in range(keep)]
    rhs = coef / s[:keep]
    conditioning = float(s[keep - 1] / s[0]) if s[0] > 0 else 0.0
    return DiagConstraints(mats, rhs, conditioning, inconsistency)


def _check_diag(dc: DiagConstraints, tolerances: Tolerances):
    if dc.conditioning < 1e-8:
        raise HypothesisViolation(
            "the diagonal constraints are degenerate: the range is not spanned by a "
            "Schur independent sign family",
            residual=dc.conditioning,
        )
    if dc.inconsistency > tolerances.entry_round:
        raise HypothesisViolation(
            "no correlation matrix with this range has a unit diagonal: the range is "
            "not spanned by sign vectors",
            residual=dc.inconsistency,
        )


@dataclass
class FactorizationSdpResult:
    X: np.ndarray
    Y: np.ndarray
    rank: int
    solution: SdpSolution
    U: np.ndarray = field(repr=False, default=None)
    V: np.ndarray = field(repr=False, default=None)


def factorization_sdp(
    B,
    rank: Optional[int] = None,
    tol: float = DEFAULT_SDP_TOL,
    tolerances: Tolerances = DEFAULT_TOL,
    max_iter: int = 100,
) -> FactorizationSdpResult:
    """Minimize ``trace(Y)`` subject to ``trace(P X) = n``, ``diag(X) = e`` and
    ``[[X, B], [B^t, Y]] >= 0``, with ``P`` the projector onto ``range(B)``.

    Solved in the coordinates ``X = U X~ U^t`` and ``Y = V Y~ V^t`` where
    ``U``/``V`` span the column/row space of ``B``; the optimal ``Y`` always
    lives on the row space, so nothing is lost.
    """
    B = as_matrix(B, "B")
    n, m = B.shape
    Uf, s, Vt = np.linalg.svd(B, full_matrices=False)
    r = numerical_rank(B, tolerances) if rank is None else int(rank)
    if r == 0:
        raise PreconditionError("B is the zero matrix")
    U = Uf[:, :r]
    V = Vt[:r].T
    scale = float(np.linalg.norm(s[:r])) / math.sqrt(n)
    Bhat = np.diag(s[:r]) / scale

    dc = diag_constraints(U)
    _check_diag(dc, tolerances)
    N = 2 * r
    cons = [(_embed(Ad, N), bd) for Ad, bd in zip(dc.matrices, dc.rhs)]
    cons.append((_embed(np.eye(r), N), float(n)))
    for i in range(r):
        for j in range(r):
            E = np.zeros((N, N))
            E[i, r + j] = E[r + j, i] = 0.5
            cons.append((E, Bhat[i, j]))
    C = _embed(np.eye(r), N, offset=r)
    sol = solve_linear_sdp(LinearSdpProblem(C, cons, "min"), tol=tol, max_iter=max_iter)
    Xt = sol.X[:r, :r]
    Yt = sol.X[r:, r:]
    if sol.converged:
        polished = _polish_factorization(Xt, Bhat, dc)
        if polished is not None:
            Xt, Yt = polished
    X = U @ Xt @ U.T
    Y = (scale ** 2) * (V @ Yt @ V.T)
    return FactorizationSdpResult(_sym(X), _sym(Y), r, sol, U, V)


def _polish_factorization(Xt: np.ndarray, Bhat: np.ndarray, dc: DiagConstraints):
    """Newton refinement of an interior point solution of the factorization SDP.

    At the optimum ``X~`` is positive definite and ``Y~`` is the Schur
    complement ``Bhat^t X~^{-1} Bhat``, so the program is the smooth convex
    minimization of ``trace(Bhat^t X~^{-1} Bhat)`` over the affine slice cut
    out by the diagonal constraints (r - 1 free parameters).  Returns ``None``
    when the warm start is not positive definite or the refinement fails to
    improve the objective.
    """
    r = Xt.shape[0]
    G = np.array([A.ravel() for A in dc.matrices])
    X0 = Xt - (G.T @ (G @ Xt.ravel() - dc.rhs)).reshape(r, r)
    X0 = _sym(X0)
    # orthonormal directions in the symmetric matrices orthogonal to every constraint
    iu = np.triu_indices(r)
    basis = []
    for i, j in zip(*iu):
        E = np.zeros((r, r))
        E[i, j] = E[j, i] = 1.0 if i == j else math.sqrt(0.5)
        basis.append(E.ravel())
    basis = np.array(basis)
    basis -= (basis @ G.T) @ G
    Ub, sb, Vb = np.linalg.svd(basis, full_matrices=False)
    free = Vb[sb > 1e-8 * max(sb[0], 1.0)]
    dirs = [_sym(v.reshape(r, r)) for v in free]
    Mb = Bhat @ Bhat.T

    def value(X):
        try:
            L = np.linalg.cholesky(X)
        except np.linalg.LinAlgError:
            return math.inf
        T = sla.solve_triangular(L, Bhat, lower=True)
        return float(np.sum(T * T))

    f = value(X0)
    if not math.isfinite(f):
        return None
    start = f
    X = X0
    for _ in range(60):
        if not dirs:
            break
        Xi = np.linalg.inv(X)
        K = Xi @ Mb @ Xi
        grad = np.array([-np.vdot(K, D) for D in dirs])
        H = np.empty((len(dirs), len(dirs)))
        for a in range(len(dirs)):
            KD = K @ dirs[a] @ Xi
            for c in range(a, len(dirs)):
                H[a, c] = H[c, a] = 2.0 * np.vdot(KD, dirs[c])
        H = _sym(H)
        try:
            step = -np.linalg.solve(H, grad)
        except np.linalg.LinAlgError:
            break
        dec = float(-grad @ step)
        if dec <= 1e-24 * max(1.0, f):
            break
        Dm = sum(c * D for c, D in zip(step, dirs))
        t = 1.0
        while t > 1e-12:
            cand = _sym(X + t * Dm)
            fc = value(cand)
            if fc <= f - 0.25 * t * dec:
                break
            t *= 0.5
        else:
            break
        X, f = cand, fc
    if f > start:
        return None
    T = np.linalg.solve(X, Bhat)
    return X, _sym(Bhat.T @ T)


def sign_vertex_sdp(
    U: np.ndarray,
    g: np.ndarray,
    tol: float = DEFAULT_SDP_TOL,
    tolerances: Tolerances = DEFAULT_TOL,
    max_iter: int = 100,
) -> Tuple[np.ndarray, SdpSolution]:
    """Maximize ``g^t X g`` subject to ``trace(U^t X U) = n``, ``diag(X) = e``
    and ``X >= 0``; returns the full n x n maximizer."""
    n, r = U.shape
    dc = diag_constraints(U)
    _check_diag(dc, tolerances)
    h = U.T @ g
    cons = list(zip(dc.matrices, dc.rhs))
    cons.append((np.eye(r), float(n)))
    sol = solve_linear_sdp(LinearSdpProblem(np.outer(h, h), cons, "max"), tol=tol,
                           max_iter=max_iter)
    return _sym(U @ sol.X @ U.T), sol


def nuclear_norm_sdp(B, tol: float = DEFAULT_SDP_TOL, max_iter: int = 100):
    """Minimize ``(trace X + trace Y) / 2`` subject to ``[[X, B], [B^t, Y]] >= 0``.

    The optimal value is the sum of the singular values of ``B``.  Returns
    ``(value, X, Y, solution)``.
    """
    B = as_matrix(B, "B")
    n, m = B.shape
    N = n + m
    cons = []
    for i in range(n):
        for j in range(m):
            E = np.zeros((N, N))
            E[i, n + j] = E[n + j, i] = 0.5
            cons.append((E, B[i, j]))
    sol = solve_linear_sdp(LinearSdpProblem(0.5 * np.eye(N), cons, "min"), tol=tol,
                           max_iter=max_iter)
    return sol.objective_value, sol.X[:n, :n], sol.X[n:, n:], sol


# --------------------------------------------------------------------------
# pencil


def solve_pencil_max(A, X, tolerances: Tolerances = DEFAULT_TOL, accuracy: float = 1e-10) -> float:
    """Largest ``z`` with ``z A + (1 - z) X >= 0`` for psd ``A`` and ``X``.

    Bisection on the sign of the smallest eigenvalue, restricted to
    ``range(A + X)`` where the pencil is positive definite for ``z`` in (0, 1).
    The upper end of the bracket starts at 2 and doubles; passing ``2**60``
    means the pencil is psd for every ``z >= 0``.
    """
    A = as_symmetric(A, "A")
    X = as_symmetric(X, "X")
    if A.shape != X.shape:
        raise PreconditionError("A and X must have the same shape")
    for name, M in (("A", A), ("X", X)):
        lam = np.linalg.eigvalsh(M)[0]
        if lam < -tolerances.psd_slack * (1.0 + np.abs(M).max()):
            raise PreconditionError(f"{name} is not psd (min eigenvalue {lam:.3e})")
    S = A + X
    w, Q = np.linalg.eigh(S)
    if w[-1] <= 0.0:
        raise UnboundedPencilError("A = X = 0: the pencil is psd for every z")
    Q = Q[:, w > 1e-12 * w[-1]]
    Ar = Q.T @ A @ Q
    Xr = Q.T @ X @ Q
    D = Ar - Xr
    eps = 1e-13 * (np.abs(Ar).max() + np.abs(Xr).max())

    def feasible(z):
        return np.linalg.eigvalsh(Xr + z * D)[0] >= -eps * (1.0 + z)

    lo, hi = 1.0, 2.0
    while feasible(hi):
        lo = hi
        hi *= 2.0
        if hi > 2.0 ** 60:
            raise UnboundedPencilError("z A + (1 - z) X stays psd for all z >= 0")
    for _ in range(400):
        if hi - lo <= accuracy:
            break
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return lo
