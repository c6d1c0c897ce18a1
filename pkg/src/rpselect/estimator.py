"""MLE and minimum Renyi pseudodistance (MRPE) fits for Gaussian linear models."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import (Dataset, Theta, _gradient, _hessian, _objective, _robust_weights,
                   check_alpha)
from .exceptions import (DegenerateWeightsError, InsufficientDataError,
                         InvalidInputError, SingularDesignError)

MAX_HALVINGS = 30


@dataclass(frozen=True)
class FitOptions:
    """Solver settings.

    ``init`` is ``None`` for a start at the MLE, or a :class:`Theta` for a warm
    start.  ``sigma_floor`` defaults to ``1e-8`` times the sample standard
    deviation of ``y``.  With ``robust_restart`` the solver is also run from a
    least-absolute-deviations start and the lower-objective solution is kept.
    """

    max_iterations: int = 500
    param_tolerance: float = 1e-10
    grad_tolerance: float = 1e-8
    sigma_floor: Optional[float] = None
    init: Optional[Theta] = None
    robust_restart: bool = False

    def __post_init__(self):
        if self.max_iterations < 1:
            raise InvalidInputError("max_iterations must be >= 1")
        if not (self.param_tolerance > 0 and self.grad_tolerance > 0):
            raise InvalidInputError("tolerances must be > 0")
        if self.sigma_floor is not None and not self.sigma_floor > 0:
            raise InvalidInputError("sigma_floor must be > 0")


@dataclass(frozen=True)
class FitResult:
    theta: Theta
    iterations: int
    converged: bool
    grad_norm: float
    objective: float
    alpha: float = 0.0
    degenerate: bool = False
    message: str = ""
    trace: tuple = field(default=(), repr=False, compare=False)


def _sigma_floor(y, opts: FitOptions) -> float:
    if opts.sigma_floor is not None:
        return float(opts.sigma_floor)
    sd = float(np.std(y))
    return 1e-8 * sd if sd > 0 else 1e-8


def _check_design(X):
    n, p = X.shape
    if n <= p:
        raise InsufficientDataError(f"need more observations ({n}) than coefficients ({p})")
    if np.linalg.matrix_rank(X) < p:
        raise SingularDesignError("design matrix is rank deficient")


def _wls(X, y, w):
    sw = np.sqrt(w)
    beta, *_ = np.linalg.lstsq(X * sw[:, None], y * sw, rcond=None)
    return beta


def fit_mle(data: Dataset, opts: Optional[FitOptions] = None) -> FitResult:
    """Closed-form Gaussian maximum likelihood fit (least squares, RSS/n variance)."""
    opts = opts or FitOptions()
    X, y = data.X, data.y
    _check_design(X)
    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ beta
    sigma = math.sqrt(float(resid @ resid) / data.n)
    floor = _sigma_floor(y, opts)
    degenerate = sigma < floor
    if degenerate:
        sigma = floor
    g = _gradient(y, X, beta, sigma, 0.0)
    return FitResult(
        theta=Theta(beta, sigma),
        iterations=0,
        converged=not degenerate,
        grad_norm=float(np.max(np.abs(g))),
        objective=_objective(y, X, beta, sigma, 0.0),
        alpha=0.0,
        degenerate=degenerate,
        message="perfect fit; sigma clamped to floor" if degenerate else "closed form",
    )


def _lad_start(X, y, iterations=50):
    """Least-absolute-deviations coefficients by IRLS, with a MAD-based scale."""
    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    for _ in range(iterations):
        res = np.abs(y - X @ beta)
        eps = max(1e-6 * float(np.median(res)), 1e-12)
        beta = _wls(X, y, 1.0 / np.maximum(res, eps))
    resid = y - X @ beta
    mad = 1.4826 * float(np.median(np.abs(resid - np.median(resid))))
    return beta, mad


def _slack(f):
    return 16.0 * np.finfo(float).eps * max(1.0, abs(f))


def _solve(y, X, alpha, beta, sigma, opts, floor, record_trace=False):
    tol = opts.param_tolerance
    f = _objective(y, X, beta, sigma, alpha)
    trace = [f] if record_trace else None
    it = 0
    degenerate = False
    message = "max iterations reached"
    for it in range(1, opts.max_iterations + 1):
        r = (y - X @ beta) / sigma
        w = _robust_weights(r, alpha)
        if not np.sum(w) > 0:
            raise DegenerateWeightsError(
                "all robust weights underflowed; try a smaller alpha or a warm start")
        # fixed-point sweep: beta first, then sigma with refreshed weights
        b_fp = _wls(X, y, w)
        res = y - X @ b_fp
        w2 = _robust_weights(res / sigma, alpha)
        if not np.sum(w2) > 0:
            w2 = w
        s_fp = math.sqrt((1.0 + alpha) * float(np.sum(w2 * res * res)) / float(np.sum(w2)))
        s_fp = max(s_fp, floor)
        cand_b, cand_s = b_fp, s_fp
        cand_f = _objective(y, X, b_fp, s_fp, alpha)

        # Newton step, used only where the objective is locally convex
        Hm = _hessian(y, X, beta, sigma, alpha)
        try:
            L = np.linalg.cholesky(Hm)
        except np.linalg.LinAlgError:
            L = None
        if L is not None:
            g = _gradient(y, X, beta, sigma, alpha)
            step = -np.linalg.solve(L.T, np.linalg.solve(L, g))
            s_nt = sigma + step[-1]
            if s_nt > floor:
                b_nt = beta + step[:-1]
                f_nt = _objective(y, X, b_nt, s_nt, alpha)
                # near the optimum objective differences sit at roundoff level,
                # so Newton wins ties there
                if f_nt <= cand_f + _slack(cand_f):
                    cand_b, cand_s, cand_f = b_nt, s_nt, f_nt

        db, ds = cand_b - beta, cand_s - sigma
        # convergence is judged on the undamped step, not the backtracked one
        full_step = max(float(np.max(np.abs(db))), abs(ds))
        scale = 1.0 + max(float(np.max(np.abs(beta))), sigma)
        t = 1.0
        accepted = cand_f <= f + _slack(f)
        halvings = 0
        while not accepted and halvings < MAX_HALVINGS:
            t *= 0.5
            halvings += 1
            cand_b, cand_s = beta + t * db, sigma + t * ds
            cand_f = _objective(y, X, cand_b, cand_s, alpha)
            accepted = cand_f <= f + _slack(f)
        if not accepted:
            message = "no descent step found"
            break
        beta, sigma, f = cand_b, cand_s, cand_f
        if record_trace:
            trace.append(f)
        if sigma <= floor:
            degenerate = True
            message = "scale collapsed to sigma floor"
            break
        if full_step <= tol * scale:
            message = "parameter change below tolerance"
            break
    g = _gradient(y, X, beta, sigma, alpha)
    grad_norm = float(np.max(np.abs(g)))
    converged = (not degenerate) and grad_norm <= opts.grad_tolerance
    return FitResult(
        theta=Theta(beta, sigma),
        iterations=it,
        converged=converged,
        grad_norm=grad_norm,
        objective=f,
        alpha=alpha,
        degenerate=degenerate,
        message=message,
        trace=tuple(trace) if record_trace else (),
    )


def fit_mrpe(data: Dataset, alpha: float, opts: Optional[FitOptions] = None,
             record_trace: bool = False) -> FitResult:
    """Minimum Renyi pseudodistance estimate of ``(beta, sigma)``.

    For ``alpha = 0`` this is the MLE.  Otherwise the estimating equations

        sum_i w_i r_i x_i = 0,   sum_i w_i (r_i**2 - 1/(1+alpha)) = 0,
        w_i = exp(-alpha/2 * r_i**2),

    are solved by a reweighted fixed-point iteration (weighted least squares
    for ``beta``, weighted residual variance times ``1+alpha`` for ``sigma``),
    safeguarded by backtracking so the objective never increases.  Where the
    Hessian is positive definite a Newton step is tried as well and kept when
    it lowers the objective further.

    Non-convergence is reported through ``FitResult.converged``; it is never
    raised.
    """
    alpha = check_alpha(alpha)
    opts = opts or FitOptions()
    if alpha == 0:
        return fit_mle(data, opts)
    X, y = data.X, data.y
    _check_design(X)
    floor = _sigma_floor(y, opts)
    if opts.init is not None:
        if opts.init.beta.shape[0] != data.p:
            raise InvalidInputError("warm start has the wrong number of coefficients")
        beta0, sigma0 = opts.init.beta.copy(), max(opts.init.sigma, floor)
    else:
        mle = fit_mle(data, opts)
        beta0, sigma0 = mle.theta.beta.copy(), mle.theta.sigma
    best = _solve(y, X, alpha, beta0, sigma0, opts, floor, record_trace)
    if opts.robust_restart:
        b_lad, s_lad = _lad_start(X, y)
        alt = _solve(y, X, alpha, b_lad, max(s_lad, floor), opts, floor, record_trace)
        if _better(alt, best):
            best = alt
    return best


def _better(a: FitResult, b: FitResult) -> bool:
    if a.degenerate != b.degenerate:
        return not a.degenerate
    return a.objective < b.objective
