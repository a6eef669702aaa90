"""Summary statistics of sign matrices and loading matrices, with Monte-Carlo
harnesses for the probability bounds that govern denoising.

Every harness returns a ``BoundCheck``.  Frequencies are compared with their
bound using a three-sigma binomial slack computed at the bound itself, so a
verdict is a deterministic pass/fail given the seed.  With a single trial no
verdict is issued.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, Optional

import numpy as np

from .errors import PreconditionError
from .linalg import DEFAULT_TOL, Tolerances, as_matrix, as_symmetric, numerical_rank
from .models import glm_draw
from .rng import substream
from .schur import as_sign_matrix

EXACT_SUBSET_LIMIT = 200_000


def permeance(S) -> float:
    """``lambda_min(S^t S) / n``."""
    S = as_sign_matrix(S).astype(float)
    return float(np.linalg.eigvalsh(S.T @ S)[0] / S.shape[0])


@dataclass
class IncoherenceReport:
    mu_left: float
    mu_right: float
    mu_tilde: float
    mu: float
    rank: int


def incoherence(L, tol: Tolerances = DEFAULT_TOL) -> IncoherenceReport:
    """Leverage-based incoherence parameters of ``L``."""
    L = as_matrix(L, "L")
    n, m = L.shape
    r = numerical_rank(L, tol)
    if r == 0:
        raise PreconditionError("L is the zero matrix")
    U, _, Vt = np.linalg.svd(L, full_matrices=False)
    U = U[:, :r]
    V = Vt[:r].T
    mu_l = n / r * float(np.max(np.sum(U * U, axis=1)))
    mu_r = m / r * float(np.max(np.sum(V * V, axis=1)))
    mu_t = n * m / r * float(np.max(np.abs(U @ V.T)) ** 2)
    return IncoherenceReport(mu_l, mu_r, mu_t, max(mu_l, mu_r, mu_t), r)


# --------------------------------------------------------------------------
# permeance statistic


@dataclass
class PermeanceBracket:
    lower: float
    upper: float
    exact: bool
    method: str


def _range_coordinates(L0, tol: Tolerances):
    L0 = as_matrix(L0, "L0")
    r = numerical_rank(L0, tol)
    if r == 0:
        raise PreconditionError("L0 is the zero matrix")
    U, _, _ = np.linalg.svd(L0, full_matrices=False)
    # row i holds the coordinates of column l_i in the basis U
    return L0.T @ U[:, :r], r


def _vertex_values(C: np.ndarray, subsets: np.ndarray) -> np.ndarray:
    """``||C a||_1`` for ``a`` orthogonal to the rows of C indexed by each subset."""
    rows = C[subsets]  # (K, r-1, r)
    _, s, Vt = np.linalg.svd(rows, full_matrices=True)
    a = Vt[:, -1, :]  # (K, r)
    vals = np.abs(a @ C.T).sum(axis=1)
    # subsets whose rows are dependent do not pin down a direction
    degenerate = s[:, -1] <= 1e-12 * np.maximum(s[:, 0], 1e-300)
    vals[degenerate] = np.inf
    return vals


def _exact_minimum(C: np.ndarray) -> float:
    m, r = C.shape
    best = math.inf
    chunk = []
    for sub in combinations(range(m), r - 1):
        chunk.append(sub)
        if len(chunk) == 20_000:
            best = min(best, float(_vertex_values(C, np.array(chunk)).min()))
            chunk = []
    if chunk:
        best = min(best, float(_vertex_values(C, np.array(chunk)).min()))
    return best


def _subgradient_minimum(C: np.ndarray, restarts: int, rng: np.random.Generator,
                         iters: int = 400) -> float:
    m, r = C.shape
    best = math.inf
    for _ in range(max(1, restarts)):
        a = rng.standard_normal(r)
        a /= np.linalg.norm(a)
        f = float(np.abs(C @ a).sum())
        step = 0.5
        for k in range(iters):
            g = C.T @ np.sign(C @ a)
            g -= (g @ a) * a  # tangent component on the sphere
            gn = np.linalg.norm(g)
            if gn == 0.0:
                break
            cand = a - (step / math.sqrt(k + 1)) * g / gn
            cand /= np.linalg.norm(cand)
            fc = float(np.abs(C @ cand).sum())
            a = cand
            f = min(f, fc)
        best = min(best, f)
    # a vertex walk finish from random subsets of rows
    if r > 1:
        K = min(4000, math.comb(m, r - 1))
        subsets = np.array([rng.choice(m, size=r - 1, replace=False) for _ in range(K)])
        best = min(best, float(_vertex_values(C, subsets).min()))
    return best


def permeance_statistic(L0, tol: Tolerances = DEFAULT_TOL, restarts: int = 20, seed=None,
                        method: str = "auto") -> PermeanceBracket:
    """Bracket for ``inf_u sum_i |<u, l_i>|`` over unit ``u`` in ``range(L0)``.

    In basis coordinates the objective is ``||C a||_1`` on the unit sphere.  It
    is linear on each cone of constant sign pattern and positive, so its
    minimum is attained on a ray orthogonal to ``r - 1`` rows of ``C``.
    ``method="exact"`` enumerates those rays (used automatically when there
    are at most 200000 of them); otherwise the upper end comes from projected
    subgradient descent with restarts plus sampled rays and the lower end is
    ``sigma_min(C)``, valid because ``||x||_1 >= ||x||_2``.
    """
    if method not in ("auto", "exact", "subgradient"):
        raise PreconditionError(f"unknown method {method!r}")
    C, r = _range_coordinates(L0, tol)
    m = C.shape[0]
    if r == 1:
        v = float(np.abs(C[:, 0]).sum())
        return PermeanceBracket(v, v, True, "closed form")
    count = math.comb(m, r - 1)
    if method == "exact" or (method == "auto" and count <= EXACT_SUBSET_LIMIT):
        v = _exact_minimum(C)
        return PermeanceBracket(v, v, True, "vertex enumeration")
    upper = _subgradient_minimum(C, restarts, substream(seed, 3))
    lower = float(np.linalg.svd(C, compute_uv=False)[-1])
    return PermeanceBracket(min(lower, upper), upper, False, "subgradient")


def spherical_stat(P_perp, Omega0, tol: float = 1e-6) -> float:
    """Top singular value of the unit-normalized columns of ``P_perp Omega0``.

    Columns annihilated by ``P_perp`` (norm at most ``1e-12 (1 + ||w_i||)``)
    are dropped.
    """
    P = as_symmetric(P_perp, "P_perp", rtol=tol)
    if np.abs(P @ P - P).max() > tol * (1.0 + np.abs(P).max()):
        raise PreconditionError("P_perp is not idempotent")
    Om = as_matrix(Omega0, "Omega0")
    if Om.shape[0] != P.shape[0]:
        raise PreconditionError("P_perp and Omega0 have incompatible shapes")
    Y = P @ Om
    norms = np.linalg.norm(Y, axis=0)
    keep = norms > 1e-12 * (1.0 + np.linalg.norm(Om, axis=0))
    if not np.any(keep):
        return 0.0
    Y = Y[:, keep] / norms[keep]
    return float(np.linalg.svd(Y, compute_uv=False)[0])


# --------------------------------------------------------------------------
# Monte-Carlo harnesses


def binomial_slack(p: float, trials: int) -> float:
    """Three binomial standard deviations of a frequency with success rate ``p``."""
    p = min(max(p, 0.0), 1.0)
    return 3.0 * math.sqrt(p * (1.0 - p) / trials)


@dataclass
class BoundCheck:
    name: str
    value: float
    bound: float
    slack: float
    trials: int
    passed: Optional[bool]
    relation: str = "<="
    details: Dict[str, float] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "value": self.value,
            "bound": self.bound,
            "slack": self.slack,
            "trials": self.trials,
            "relation": self.relation,
            "passed": self.passed,
            "details": dict(self.details),
        }


def _frequency_check(name, hits, trials, bound, **details) -> BoundCheck:
    freq = hits / trials
    if trials < 2:
        return BoundCheck(name, freq, bound, float("nan"), trials, None, "<=", details)
    slack = binomial_slack(bound, trials)
    return BoundCheck(name, freq, bound, slack, trials, bool(freq <= bound + slack), "<=",
                      details)


def _require(cond, message):
    if not cond:
        raise PreconditionError(message)


def verify_tail_bound(r: int, m: int, t: float, trials: int, seed=None,
                      batch: int = 10_000) -> BoundCheck:
    """Frequency of ``sum_i <u_i, v>^2 >= 4 r t / m`` for uniform unit ``v`` in R^m
    and fixed orthonormal ``u_1..u_r``, against ``2 exp(-t)``."""
    _require(1 <= r <= m, "need 1 <= r <= m")
    _require(t > 0, "t must be positive")
    _require(trials >= 1, "trials must be positive")
    U, _ = np.linalg.qr(substream(seed, 10).standard_normal((m, r)))
    thresh = 4.0 * r * t / m
    hits = 0
    done = 0
    k = 0
    while done < trials:
        b = min(batch, trials - done)
        V = substream(seed, 11, k).standard_normal((b, m))
        V /= np.linalg.norm(V, axis=1, keepdims=True)
        q = np.sum((V @ U) ** 2, axis=1)
        hits += int(np.count_nonzero(q >= thresh))
        done += b
        k += 1
    return _frequency_check("tail-bound", hits, trials, 2.0 * math.exp(-t), r=r, m=m, t=t)


def verify_coherence_bounds(S, m: int, alpha: float, trials: int, seed=None) -> dict:
    """Coherence of Gaussian loading matrices: a deterministic left bound and two
    tail bounds.  Returns a dict of ``BoundCheck`` values keyed by name."""
    S = as_sign_matrix(S)
    n, r = S.shape
    _require(m >= r, "m must be at least r")
    _require(alpha > 0, "alpha must be positive")
    _require(trials >= 1, "trials must be positive")
    nu = permeance(S)
    _require(nu > 0, "S has zero permeance")
    Sf = S.astype(float)
    log_term = math.log(n + m)
    thr_r = 4.0 * (alpha + 1.0) * log_term
    thr_t = 4.0 * (alpha + 1.0) / nu * log_term
    left_bound = 1.0 / nu
    left_viol = 0
    hits_r = hits_t = 0
    max_left = 0.0
    values = {}
    for k in range(trials):
        L0, _ = glm_draw(Sf, m, substream(seed, 20, k))
        inc = incoherence(L0)
        max_left = max(max_left, inc.mu_left)
        left_viol += inc.mu_left > left_bound * (1.0 + 1e-9)
        hits_r += inc.mu_right >= thr_r
        hits_t += inc.mu_tilde >= thr_t
        if trials == 1:
            values = {"mu_left": inc.mu_left, "mu_right": inc.mu_right,
                      "mu_tilde": inc.mu_tilde}
    left = BoundCheck("mu-left", max_left, left_bound, 0.0, trials, left_viol == 0, "<=",
                      {"violations": float(left_viol), "permeance": nu})
    right = _frequency_check("mu-right-tail", hits_r, trials,
                             2.0 * (n * m) ** (-alpha) / n, threshold=thr_r)
    tilde = _frequency_check("mu-tilde-tail", hits_t, trials,
                             2.0 * (n * m) ** (-alpha), threshold=thr_t)
    for chk in (right, tilde):
        chk.details.update(values)
    return {"mu-left": left, "mu-right-tail": right, "mu-tilde-tail": tilde}


def verify_gaussian_norm(n: int, m_prime: int, t: float, trials: int, seed=None) -> BoundCheck:
    """Frequency of ``||Omega||_op > sqrt(n) + sqrt(m') + t`` for standard normal
    n x m' matrices, against ``exp(-t^2)``."""
    _require(n >= 1 and m_prime >= 1, "dimensions must be positive")
    _require(trials >= 1, "trials must be positive")
    thresh = math.sqrt(n) + math.sqrt(m_prime) + t
    hits = 0
    for k in range(trials):
        Om = substream(seed, 30, k).standard_normal((n, m_prime))
        hits += np.linalg.norm(Om, 2) > thresh
    return _frequency_check("gaussian-norm", int(hits), trials, math.exp(-t * t),
                            n=n, m_prime=m_prime, t=t)


def verify_empirical_width(S, m: int, trials: int, seed=None) -> BoundCheck:
    """Mean of ``||m^{-1/2} sum_i eps_i S g_i / sqrt(r)||`` against ``sqrt(n)``.

    ``eps_i`` are Rademacher signs and ``g_i`` standard normal r-vectors, so
    ``S g_i / sqrt(r)`` are the columns of a Gaussian loading matrix.  The
    vector lies in ``range(S)``, so its norm is the supremum of its inner
    product with unit vectors there.
    """
    S = as_sign_matrix(S).astype(float)
    n, r = S.shape
    _require(trials >= 1 and m >= 1, "trials and m must be positive")
    widths = np.empty(trials)
    for k in range(trials):
        rng = substream(seed, 40, k)
        G = rng.standard_normal((m, r))
        eps = rng.choice(np.array([-1.0, 1.0]), size=m)
        h = S @ (G.T @ eps) / math.sqrt(m * r)
        widths[k] = np.linalg.norm(h)
    mean = float(widths.mean())
    bound = math.sqrt(n)
    if trials < 2:
        return BoundCheck("empirical-width", mean, bound, float("nan"), trials, None)
    slack = 3.0 * float(widths.std(ddof=1)) / math.sqrt(trials)
    return BoundCheck("empirical-width", mean, bound, slack, trials,
                      bool(mean <= bound + slack), "<=", {"m": m})


def verify_marginal_tail(S, directions: int, trials: int, seed=None) -> BoundCheck:
    """For random unit ``u`` in ``range(S)``: frequency of
    ``|<u, S g>| >= (2/3) sqrt(nu n)`` with ``g`` standard normal, which must be
    at least 1/2.  Reports the smallest frequency over the directions."""
    S = as_sign_matrix(S).astype(float)
    n, r = S.shape
    _require(directions >= 1 and trials >= 1, "directions and trials must be positive")
    nu = permeance(S)
    Q, _ = np.linalg.qr(S)
    thresh = 2.0 / 3.0 * math.sqrt(nu * n)
    freqs = np.empty(directions)
    for d in range(directions):
        rng = substream(seed, 50, d)
        a = rng.standard_normal(Q.shape[1])
        u = Q @ (a / np.linalg.norm(a))
        G = rng.standard_normal((trials, r))
        proj = np.abs(G @ (S.T @ u))
        freqs[d] = np.count_nonzero(proj >= thresh) / trials
    worst = float(freqs.min())
    if trials < 2:
        return BoundCheck("marginal-tail", worst, 0.5, float("nan"), trials, None, ">=")
    slack = binomial_slack(0.5, trials)
    return BoundCheck("marginal-tail", worst, 0.5, slack, trials, bool(worst >= 0.5 - slack),
                      ">=", {"directions": directions, "failing_directions":
                             float(np.count_nonzero(freqs < 0.5 - slack))})


def verify_spherical_bound(n: int, r: int, m_prime: int, t: float, trials: int,
                           seed=None) -> BoundCheck:
    """Frequency of ``spherical_stat > (sqrt(m') + sqrt(n - r) + t) / sqrt(n - r - 0.5)``
    for standard normal outliers and a random r-dimensional inlier subspace,
    against ``1.5 exp(-t^2 / 2)``."""
    _require(1 <= r < n and m_prime >= 1, "need 1 <= r < n and m' >= 1")
    _require(trials >= 1, "trials must be positive")
    d = n - r
    thresh = (math.sqrt(m_prime) + math.sqrt(d) + t) / math.sqrt(d - 0.5)
    hits = 0
    for k in range(trials):
        rng = substream(seed, 60, k)
        Q, _ = np.linalg.qr(rng.standard_normal((n, r)))
        P_perp = np.eye(n) - Q @ Q.T
        Om = rng.standard_normal((n, m_prime))
        hits += spherical_stat(P_perp, Om) > thresh
    return _frequency_check("spherical-bound", int(hits), trials,
                            1.5 * math.exp(-t * t / 2.0), n=n, r=r, m_prime=m_prime, t=t)


def permeance_stat_bound(n: int, m: int, r: int, nu: float, t: float) -> float:
    """Lower bound ``(1/6) sqrt(nm/r) (sqrt(m nu) - 12 sqrt(r) - 2 sqrt(nu) t)``."""
    return math.sqrt(n * m / r) / 6.0 * (math.sqrt(m * nu) - 12.0 * math.sqrt(r)
                                         - 2.0 * math.sqrt(nu) * t)


def verify_permeance_stat_bound(S, m: int, t: float, trials: int, seed=None) -> BoundCheck:
    """Frequency with which the permeance statistic of a Gaussian loading matrix
    falls below ``permeance_stat_bound``, against ``exp(-t^2 / 2)``.  When the
    bound is not positive it holds trivially and no statistic is computed."""
    S = as_sign_matrix(S)
    n, r = S.shape
    nu = permeance(S)
    bound = permeance_stat_bound(n, m, r, nu, t)
    fail_rate = math.exp(-t * t / 2.0)
    if bound <= 0.0:
        return BoundCheck("permeance-stat", 0.0, fail_rate, 0.0, trials, True, "<=",
                          {"lower_bound": bound, "trivial": 1.0})
    misses = 0
    for k in range(trials):
        L0, _ = glm_draw(S.astype(float), m, substream(seed, 70, k))
        br = permeance_statistic(L0, seed=substream(seed, 71, k))
        misses += br.upper < bound
    chk = _frequency_check("permeance-stat", int(misses), trials, fail_rate,
                           lower_bound=bound, trivial=0.0)
    return chk
