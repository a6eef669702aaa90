"""Command-line interface.

Every subcommand prints a JSON run report to stdout (or writes it to
``--report``).  Exit codes: 0 success, 2 usage, 3 unreadable or malformed
input, 4 precondition violation, 5 solver non-convergence or sampling
failure, 6 the input violates the hypotheses of the decomposition.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np

from . import plotting
from .decompose import (
    asym_scd,
    bcd,
    match_permutation,
    match_signed_permutation,
    planted_binary_basis,
    planted_sign_basis,
    sym_scd,
)
from .errors import PreconditionError, SignCompError, SolverError
from .io import atomic_write_text, read_matrix, write_matrix
from .linalg import DEFAULT_TOL, Tolerances
from .models import sample_glm, sample_inlier_outlier, sample_sparse_corruption
from .report import RunReport
from .robust import (
    INLIER_TOL,
    PCP_MAX_ITER,
    PCP_TOL,
    REAPER_MAX_ITER,
    REAPER_TOL,
    denoise_factorize_outliers,
    denoise_factorize_sparse,
    pcp_denoise,
    reaper,
    select_inliers,
)
from .schur import (
    correspondence_holds,
    is_schur_binary,
    is_schur_sign,
    max_sign_cardinality,
    random_schur_binary,
    random_schur_sign,
)
from .stats import (
    incoherence,
    permeance,
    permeance_statistic,
    spherical_stat,
    verify_coherence_bounds,
    verify_gaussian_norm,
    verify_tail_bound,
)

EXIT_USAGE = 2
EXIT_PARSE = 3


class CliError(SignCompError):
    """Bad flag combination detected after argument parsing."""

    exit_code = EXIT_USAGE


class Context:
    def __init__(self, args: argparse.Namespace, report: RunReport):
        self.args = args
        self.report = report

    @property
    def tolerances(self) -> Tolerances:
        if self.args.tol is None:
            return DEFAULT_TOL
        return DEFAULT_TOL.with_(residual_rel=self.args.tol)

    def read(self, key: str, path: Optional[str]) -> np.ndarray:
        if path is None:
            raise CliError(f"missing required input --{key.replace('_', '-')}")
        self.report.input_files[key] = str(path)
        return read_matrix(path, self.args.format)

    def write(self, key: str, path: Optional[str], M) -> None:
        if path is None:
            return
        write_matrix(np.asarray(M, dtype=float), path, self.args.format)
        self.report.output_files[key] = str(path)

    def figure(self, name: str, draw: Callable[[Path], str]) -> None:
        if not self.args.plot_dir:
            return
        target = Path(self.args.plot_dir) / f"{self.report.command.replace(' ', '-')}-{name}.png"
        self.report.figures.append(draw(target))

    @property
    def metrics(self) -> dict:
        return self.report.metrics


def _max_iter(args, default: int) -> int:
    return default if args.max_iter is None else args.max_iter


# --------------------------------------------------------------------------
# handlers


def cmd_check_schur(ctx: Context) -> int:
    M = ctx.read("input", ctx.args.input)
    n, r = M.shape
    if ctx.args.kind == "sign":
        ok = is_schur_sign(M)
    else:
        ok = is_schur_binary(M)
        ctx.metrics["correspondence_holds"] = correspondence_holds(M)
    ctx.metrics.update(schur_independent=ok, rows=n, cols=r,
                       max_cardinality=max_sign_cardinality(n))
    return 0


def _decomposition_metrics(ctx, M, S, W, residual):
    ctx.metrics.update(rows=M.shape[0], cols=M.shape[1], rank=int(S.shape[1]),
                       residual=residual)


def cmd_sym_scd(ctx: Context) -> int:
    A = ctx.read("input", ctx.args.input)
    res = sym_scd(A, ctx.tolerances, seed=ctx.args.seed)
    ctx.write("s", ctx.args.out_s, res.S)
    ctx.write("tau", ctx.args.out_tau, res.tau.reshape(-1, 1))
    ctx.metrics.update(rank=int(res.S.shape[1]), residual=res.residual, tau=res.tau,
                       redraws=res.redraws)
    ctx.figure("factors", lambda p: plotting.plot_factors(res.S, res.tau.reshape(-1, 1).T, p,
                                                          "symmetric decomposition"))
    return 0


def cmd_scd(ctx: Context) -> int:
    B = ctx.read("input", ctx.args.input)
    dec = asym_scd(B, ctx.tolerances, seed=ctx.args.seed)
    ctx.write("s", ctx.args.out_s, dec.S)
    ctx.write("w", ctx.args.out_w, dec.W)
    _decomposition_metrics(ctx, B, dec.S, dec.W, dec.residual)
    ctx.figure("factors", lambda p: plotting.plot_factors(dec.S, dec.W, p,
                                                          "sign component decomposition"))
    return 0


def cmd_bcd(ctx: Context) -> int:
    C = ctx.read("input", ctx.args.input)
    dec = bcd(C, ctx.tolerances, seed=ctx.args.seed)
    ctx.write("z", ctx.args.out_z, dec.Z)
    ctx.write("w", ctx.args.out_w, dec.Wplus)
    _decomposition_metrics(ctx, C, dec.Z, dec.Wplus, dec.residual)
    ctx.figure("factors", lambda p: plotting.plot_factors(
        dec.Z, dec.Wplus, p, "binary component decomposition", sign_label="Z"))
    return 0


def cmd_planted_basis(ctx: Context) -> int:
    B = ctx.read("input", ctx.args.input)
    if ctx.args.kind == "sign":
        basis = planted_sign_basis(B, ctx.tolerances, seed=ctx.args.seed)
    else:
        basis = planted_binary_basis(B, ctx.tolerances, seed=ctx.args.seed)
    ctx.write("basis", ctx.args.out, basis)
    ctx.metrics.update(rank=int(basis.shape[1]), rows=int(basis.shape[0]), kind=ctx.args.kind)
    return 0


def _not_converged(what: str, iterations: int) -> SolverError:
    return SolverError(f"{what} did not converge within {iterations} iterations")


def cmd_denoise_pcp(ctx: Context) -> int:
    B = ctx.read("input", ctx.args.input)
    tol = PCP_TOL if ctx.args.tol is None else ctx.args.tol
    res = pcp_denoise(B, lam=ctx.args.lam, tol=tol, max_iter=_max_iter(ctx.args, PCP_MAX_ITER))
    ctx.write("l", ctx.args.out_l, res.L)
    ctx.write("omega", ctx.args.out_omega, res.Omega)
    ctx.metrics.update(objective=res.objective, split_residual=res.split_residual,
                       iterations=res.iterations, converged=res.converged, lam=res.lam,
                       rank_l=int(np.linalg.matrix_rank(res.L)) if np.any(res.L) else 0,
                       nonzeros_omega=int(np.count_nonzero(res.Omega)))
    ctx.figure("spectra", lambda p: plotting.plot_spectra({"B": B, "L": res.L}, p,
                                                          "principal component pursuit"))
    if not res.converged:
        raise _not_converged("principal component pursuit", res.iterations)
    return 0


def cmd_denoise_reaper(ctx: Context) -> int:
    B = ctx.read("input", ctx.args.input)
    tol = REAPER_TOL if ctx.args.tol is None else ctx.args.tol
    res = reaper(B, ctx.args.r, tol=tol, max_iter=_max_iter(ctx.args, REAPER_MAX_ITER))
    inliers = select_inliers(B, res.P, ctx.args.inlier_tol)
    ctx.write("p", ctx.args.out_p, res.P)
    if ctx.args.out_labels:
        labels = np.zeros((B.shape[1], 1))
        labels[inliers] = 1.0
        ctx.write("labels", ctx.args.out_labels, labels)
    ctx.metrics.update(objective=res.objective, iterations=res.iterations,
                       converged=res.converged, inliers=inliers, n_inliers=len(inliers),
                       constraint_residuals=list(res.constraint_residuals))
    resid = np.linalg.norm(B - res.P @ B, axis=0)
    ctx.figure("residuals", lambda p: plotting.plot_residuals(resid, p, inliers, "REAPER fit"))
    ctx.figure("objective", lambda p: plotting.plot_history(res.history, p))
    if not res.converged:
        raise _not_converged("REAPER", res.iterations)
    return 0


def cmd_pipeline_sparse(ctx: Context) -> int:
    B = ctx.read("input", ctx.args.input)
    res = denoise_factorize_sparse(B, lam=ctx.args.lam,
                                   max_iter=_max_iter(ctx.args, 5000),
                                   tol=ctx.tolerances, seed=ctx.args.seed)
    ctx.write("s", ctx.args.out_s, res.S)
    ctx.write("w", ctx.args.out_w, res.W)
    ctx.write("l", ctx.args.out_l, res.denoised.L)
    _decomposition_metrics(ctx, B, res.S, res.W, res.decomposition.residual)
    ctx.metrics.update(pcp_iterations=res.denoised.iterations,
                       pcp_split_residual=res.denoised.split_residual)
    ctx.figure("spectra", lambda p: plotting.plot_spectra({"B": B, "L": res.denoised.L}, p))
    ctx.figure("factors", lambda p: plotting.plot_factors(res.S, res.W, p))
    return 0


def cmd_pipeline_outliers(ctx: Context) -> int:
    B = ctx.read("input", ctx.args.input)
    res = denoise_factorize_outliers(B, ctx.args.r, max_iter=_max_iter(ctx.args, REAPER_MAX_ITER),
                                     inlier_tol=ctx.args.inlier_tol, tol=ctx.tolerances,
                                     seed=ctx.args.seed)
    ctx.write("s", ctx.args.out_s, res.S)
    ctx.write("w", ctx.args.out_w, res.W)
    _decomposition_metrics(ctx, B, res.S, res.W, res.decomposition.residual)
    ctx.metrics.update(inliers=res.inliers, n_inliers=len(res.inliers),
                       reaper_iterations=res.denoised.iterations)
    resid = np.linalg.norm(B - res.denoised.P @ B, axis=0)
    ctx.figure("residuals", lambda p: plotting.plot_residuals(resid, p, res.inliers))
    ctx.figure("factors", lambda p: plotting.plot_factors(res.S, res.W, p))
    return 0


def cmd_gen(ctx: Context) -> int:
    a = ctx.args
    seed = a.seed
    if a.model == "schur-sign":
        M = random_schur_sign(a.n, a.r, seed)
        ctx.write("matrix", a.out, M)
    elif a.model == "schur-binary":
        M = random_schur_binary(a.n, a.r, seed)
        ctx.write("matrix", a.out, M)
    elif a.model == "sparse-noise":
        M = sample_sparse_corruption(a.n, a.m, a.omega, a.magnitude, seed)
        ctx.write("matrix", a.out, M)
    elif a.model == "glm":
        S = random_schur_sign(a.n, a.r, seed)
        inst = sample_glm(S, a.m, seed)
        M = inst.L0
        if a.omega:
            M = M + sample_sparse_corruption(a.n, a.m, a.omega, a.magnitude, seed)
            ctx.write("low_rank", a.out_low_rank, inst.L0)
        ctx.write("matrix", a.out, M)
        ctx.write("truth", a.out_truth, S)
        ctx.metrics["permeance"] = permeance(S)
    else:  # outlier-mix
        S = random_schur_sign(a.n, a.r, seed)
        inst = sample_inlier_outlier(S, a.m, a.m_prime, seed)
        M = inst.B
        ctx.write("matrix", a.out, M)
        ctx.write("truth", a.out_truth, S)
        if a.out_labels:
            labels = np.zeros((M.shape[1], 1))
            labels[inst.inliers] = 1.0
            ctx.write("labels", a.out_labels, labels)
        ctx.metrics["inliers"] = inst.inliers
    ctx.metrics.update(model=a.model, rows=int(M.shape[0]), cols=int(M.shape[1]))
    return 0


def cmd_stats(ctx: Context) -> int:
    a = ctx.args
    if a.stat == "permeance":
        ctx.metrics["permeance"] = permeance(ctx.read("input", a.input))
    elif a.stat == "incoherence":
        rep = incoherence(ctx.read("input", a.input), ctx.tolerances)
        ctx.metrics.update(mu_left=rep.mu_left, mu_right=rep.mu_right, mu_tilde=rep.mu_tilde,
                           mu=rep.mu, rank=rep.rank)
    elif a.stat == "permeance-stat":
        L = ctx.read("input", a.input)
        br = permeance_statistic(L, ctx.tolerances, restarts=a.restarts, seed=a.seed)
        ctx.metrics.update(lower=br.lower, upper=br.upper, exact=br.exact, method=br.method)
    else:
        P = ctx.read("projector", a.projector)
        Om = ctx.read("input", a.input)
        ctx.metrics["spherical_stat"] = spherical_stat(P, Om)
    return 0


def cmd_verify(ctx: Context) -> int:
    a = ctx.args
    if a.bound == "tail-bound":
        checks = [verify_tail_bound(a.r, a.m, a.t, a.trials, a.seed)]
    elif a.bound == "gaussian-norm":
        checks = [verify_gaussian_norm(a.n, a.m_prime, a.t, a.trials, a.seed)]
    else:
        if a.input:
            S = ctx.read("input", a.input)
        else:
            if a.n is None or a.r is None:
                raise CliError("coherence needs --input or both --n and --r")
            S = random_schur_sign(a.n, a.r, a.seed)
        checks = list(verify_coherence_bounds(S, a.m, a.alpha, a.trials, a.seed).values())
    ctx.metrics["checks"] = [c.as_dict() for c in checks]
    verdicts = [c.passed for c in checks if c.passed is not None]
    ctx.metrics["all_passed"] = all(verdicts) if verdicts else None
    ctx.figure("bounds", lambda p: plotting.plot_bound_checks(checks, p, a.bound))
    return 0


def cmd_match(ctx: Context) -> int:
    A = ctx.read("a", ctx.args.a)
    B = ctx.read("b", ctx.args.b)
    if A.shape != B.shape:
        raise PreconditionError(f"shape mismatch: {A.shape} vs {B.shape}")
    if ctx.args.kind == "signed":
        found = match_signed_permutation(A, B)
    else:
        found = match_permutation(A, B)
    ctx.metrics["match_present"] = found is not None
    if found is not None:
        ctx.metrics["perm"] = list(found.perm)
        ctx.metrics["signs"] = list(found.signs)
    return 0


# --------------------------------------------------------------------------
# parser


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--tol", type=float, default=None,
                   help="relative reconstruction tolerance for decompositions (default 1e-6); "
                        "stopping tolerance for denoise-pcp (default 1e-7) and denoise-reaper "
                        "(default 1e-9)")
    g.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    g.add_argument("--format", choices=("auto", "csv", "matrixmarket"), default="auto",
                   help="matrix file format; auto picks MatrixMarket for .mtx/.mm files and "
                        "CSV otherwise (default auto)")
    g.add_argument("--report", default=None, help="write the JSON report here instead of stdout")
    g.add_argument("--max-iter", type=int, default=None,
                   help="iteration cap for iterative solvers (defaults: PCP 2000, "
                        "pipeline-sparse 5000, REAPER 500)")
    g.add_argument("--plot-dir", default=None,
                   help="render PNG figures into this directory and list them in the report")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(
        prog="signcomp",
        description="Sign and binary component decompositions, denoising and diagnostics.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, func, help_text):
        sp = sub.add_parser(name, parents=[common], help=help_text, description=help_text)
        sp.set_defaults(func=func)
        return sp

    sp = add("check-schur", cmd_check_schur, "decide Schur independence of a sign or binary matrix")
    sp.add_argument("--input", required=True)
    sp.add_argument("--kind", choices=("sign", "binary"), default="sign")

    sp = add("sym-scd", cmd_sym_scd, "split a correlation matrix as S diag(tau) S^t")
    sp.add_argument("--input", required=True)
    sp.add_argument("--out-s")
    sp.add_argument("--out-tau")

    sp = add("scd", cmd_scd, "minimal sign component decomposition B = S W^t")
    sp.add_argument("--input", required=True)
    sp.add_argument("--out-s")
    sp.add_argument("--out-w")

    sp = add("bcd", cmd_bcd, "minimal binary component decomposition C = Z W^t")
    sp.add_argument("--input", required=True)
    sp.add_argument("--out-z")
    sp.add_argument("--out-w")

    sp = add("planted-basis", cmd_planted_basis, "sign or binary basis spanning the column space")
    sp.add_argument("--input", required=True)
    sp.add_argument("--kind", choices=("sign", "binary"), default="sign")
    sp.add_argument("--out")

    sp = add("denoise-pcp", cmd_denoise_pcp, "split B into low-rank plus sparse parts")
    sp.add_argument("--input", required=True)
    sp.add_argument("--lambda", dest="lam", type=float, default=None,
                    help="sparsity weight (default 1/sqrt(max(n, m)))")
    sp.add_argument("--out-l")
    sp.add_argument("--out-omega")

    sp = add("denoise-reaper", cmd_denoise_reaper, "robust subspace fit with column outliers")
    sp.add_argument("--input", required=True)
    sp.add_argument("--r", type=int, required=True)
    sp.add_argument("--inlier-tol", type=float, default=INLIER_TOL)
    sp.add_argument("--out-p")
    sp.add_argument("--out-labels", help="column vector with 1 for inlier columns")

    sp = add("pipeline-sparse", cmd_pipeline_sparse, "PCP followed by sign decomposition")
    sp.add_argument("--input", required=True)
    sp.add_argument("--lambda", dest="lam", type=float, default=None)
    sp.add_argument("--out-s")
    sp.add_argument("--out-w")
    sp.add_argument("--out-l")

    sp = add("pipeline-outliers", cmd_pipeline_outliers,
             "REAPER, inlier selection, then sign decomposition")
    sp.add_argument("--input", required=True)
    sp.add_argument("--r", type=int, required=True)
    sp.add_argument("--inlier-tol", type=float, default=INLIER_TOL)
    sp.add_argument("--out-s")
    sp.add_argument("--out-w")

    sp = add("gen", cmd_gen, "generate random instances")
    sp.add_argument("model", choices=("glm", "sparse-noise", "outlier-mix", "schur-sign",
                                      "schur-binary"))
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--m", type=int)
    sp.add_argument("--r", type=int)
    sp.add_argument("--m-prime", type=int, default=0)
    sp.add_argument("--omega", type=int, default=0, help="number of corrupted entries")
    sp.add_argument("--magnitude", type=float, default=1.0)
    sp.add_argument("--out", required=True)
    sp.add_argument("--out-truth", help="ground-truth sign factor")
    sp.add_argument("--out-low-rank", help="uncorrupted low-rank part (glm with --omega)")
    sp.add_argument("--out-labels", help="inlier indicator column (outlier-mix)")

    sp = add("stats", cmd_stats, "summary statistics")
    sp.add_argument("stat", choices=("permeance", "incoherence", "permeance-stat",
                                     "spherical-stat"))
    sp.add_argument("--input", required=True)
    sp.add_argument("--projector", help="orthogonal projector (spherical-stat)")
    sp.add_argument("--restarts", type=int, default=20)

    sp = add("verify", cmd_verify, "Monte-Carlo checks of probability bounds")
    sp.add_argument("bound", choices=("tail-bound", "coherence", "gaussian-norm"))
    sp.add_argument("--input", help="sign matrix (coherence)")
    sp.add_argument("--n", type=int)
    sp.add_argument("--m", type=int, default=30)
    sp.add_argument("--r", type=int)
    sp.add_argument("--m-prime", type=int, default=30)
    sp.add_argument("--t", type=float, default=2.0)
    sp.add_argument("--alpha", type=float, default=1.0)
    sp.add_argument("--trials", type=int, default=1000)

    sp = add("match", cmd_match, "equivalence of two factors up to (signed) column permutation")
    sp.add_argument("kind", choices=("signed", "plain"))
    sp.add_argument("--a", required=True)
    sp.add_argument("--b", required=True)
    return parser


_REQUIRED = {
    ("gen", "glm"): ("m", "r"),
    ("gen", "outlier-mix"): ("m", "r"),
    ("gen", "schur-sign"): ("r",),
    ("gen", "schur-binary"): ("r",),
    ("gen", "sparse-noise"): ("m",),
    ("verify", "tail-bound"): ("r", "m"),
    ("verify", "gaussian-norm"): ("n",),
    ("stats", "spherical-stat"): ("projector",),
}


def _check_required(parser, args) -> None:
    key = (args.command, getattr(args, "model", None) or getattr(args, "bound", None)
           or getattr(args, "stat", None))
    missing = [f"--{k.replace('_', '-')}" for k in _REQUIRED.get(key, ()) if getattr(args, k) is None]
    if missing:
        parser.error(f"{' '.join(k for k in key if k)} requires {', '.join(missing)}")


def _emit(report: RunReport, path: Optional[str]) -> None:
    text = report.to_json() + "\n"
    if path:
        atomic_write_text(path, text)
    else:
        sys.stdout.write(text)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _check_required(parser, args)
    name = args.command
    for extra in ("model", "bound", "stat", "kind"):
        if args.command in ("gen", "verify", "stats", "match") and getattr(args, extra, None):
            name = f"{args.command} {getattr(args, extra)}"
            break
    params: Dict[str, object] = {k: v for k, v in vars(args).items() if k not in ("func",)}
    report = RunReport(command=name, parameters=params)
    ctx = Context(args, report)
    start = time.perf_counter()
    code = 0
    try:
        code = args.func(ctx)
    except SignCompError as exc:
        code = exc.exit_code
        report.fail(exc, code)
    except OSError as exc:
        code = 1
        report.fail(exc, code)
    report.wall_time = time.perf_counter() - start
    if report.status == "error":
        print(f"signcomp: error: {report.error['message']}", file=sys.stderr)
    _emit(report, args.report)
    return code


if __name__ == "__main__":
    sys.exit(main())
