"""Restricted MRPE under zero constraints and the nested-model overfitting probability."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import special

from .core import Dataset, ModelSpec, Theta, check_alpha, rp_constants, _check_sigma
from .criterion import rp_nh, score_fit
from .estimator import FitOptions, FitResult, fit_mrpe
from .exceptions import InvalidInputError, SingularDesignError


@dataclass(frozen=True)
class ZeroConstraints:
    """Coefficient indices (into ``beta``) that are forced to zero.  ``sigma`` is never constrained."""

    constrained_indices: tuple
    p: int

    def __post_init__(self):
        idx = tuple(sorted(int(i) for i in self.constrained_indices))
        if len(set(idx)) != len(idx):
            raise InvalidInputError("constrained indices must be unique")
        if not idx or len(idx) >= self.p:
            raise InvalidInputError(f"need 1 <= r < p constraints, got r={len(idx)}, p={self.p}")
        if idx[0] < 0 or idx[-1] >= self.p:
            raise InvalidInputError(f"constrained index out of range for p={self.p}")
        object.__setattr__(self, "constrained_indices", idx)

    @classmethod
    def trailing(cls, p: int, r: int) -> "ZeroConstraints":
        """The last ``r`` of ``p`` coefficients set to zero."""
        return cls(tuple(range(p - r, p)), p)

    @property
    def r(self) -> int:
        return len(self.constrained_indices)

    @property
    def free_indices(self) -> tuple:
        fixed = set(self.constrained_indices)
        return tuple(i for i in range(self.p) if i not in fixed)


def constraint_jacobian(constraints: ZeroConstraints) -> np.ndarray:
    """``(p+1) x r`` derivative of the constraint map; identity rows on constrained indices."""
    M = np.zeros((constraints.p + 1, constraints.r))
    for j, i in enumerate(constraints.constrained_indices):
        M[i, j] = 1.0
    return M


def fit_rmrpe(data: Dataset, constraints: ZeroConstraints, alpha: float,
              opts: Optional[FitOptions] = None) -> FitResult:
    """MRPE subject to zero constraints.

    Zero constraints reduce exactly to a fit on the unconstrained columns;
    the constrained coefficients are re-embedded as zeros.
    """
    if constraints.p != data.p:
        raise InvalidInputError("constraints do not match the design")
    free = list(constraints.free_indices)
    reduced = Dataset(data.y, data.X[:, free])
    if opts is not None and opts.init is not None and opts.init.beta.shape[0] == data.p:
        opts = FitOptions(**{**opts.__dict__, "init": Theta(opts.init.beta[free], opts.init.sigma)})
    fit = fit_mrpe(reduced, alpha, opts)
    beta = np.zeros(data.p)
    beta[free] = fit.theta.beta
    return FitResult(theta=Theta(beta, fit.theta.sigma), iterations=fit.iterations,
                     converged=fit.converged, grad_norm=fit.grad_norm, objective=fit.objective,
                     alpha=fit.alpha, degenerate=fit.degenerate, message=fit.message)


def pstar_q(psi: np.ndarray, M: np.ndarray):
    """Return ``(P*, Q)`` with ``Q = Psi^-1 M (M' Psi^-1 M)^-1`` and ``P* = Q M' Psi^-1 - Psi^-1``."""
    psi = np.asarray(psi, dtype=float)
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or psi.shape != (M.shape[0], M.shape[0]):
        raise InvalidInputError("psi and M have incompatible shapes")
    try:
        psi_inv = np.linalg.inv(psi)
    except np.linalg.LinAlgError as exc:
        raise SingularDesignError("psi is singular") from exc
    A = M.T @ psi_inv @ M
    if np.linalg.matrix_rank(A) < M.shape[1]:
        raise SingularDesignError("M' Psi^-1 M is rank deficient")
    Q = psi_inv @ M @ np.linalg.inv(A)
    P = Q @ M.T @ psi_inv - psi_inv
    return P, Q


def overfit_eigenvalues(alpha: float, sigma: float, r: int) -> np.ndarray:
    """Common magnitude ``(alpha+1)^1.5 K1 sigma^2 / (2 alpha+1)^1.5`` repeated ``r`` times.

    These are the absolute values of the nonzero eigenvalues of
    ``-Q M' Psi^-1 Omega``; see :func:`constraint_eigenvalues`.  The value is 1 at
    ``alpha = 0``.
    """
    alpha = check_alpha(alpha)
    sigma = _check_sigma(sigma)
    if int(r) < 1:
        raise InvalidInputError("r must be >= 1")
    K1 = rp_constants(alpha, sigma).K1
    lam = (alpha + 1.0) ** 1.5 * K1 * sigma ** 2 / (2.0 * alpha + 1.0) ** 1.5
    return np.full(int(r), lam)


def constraint_eigenvalues(psi: np.ndarray, omega: np.ndarray, M: np.ndarray) -> np.ndarray:
    """The ``r`` largest-magnitude eigenvalues of ``-Q M' Psi^-1 Omega``, sorted by magnitude."""
    _, Q = pstar_q(psi, M)
    A = -Q @ M.T @ np.linalg.solve(psi, omega)
    ev = np.linalg.eigvals(A)
    ev = ev[np.argsort(-np.abs(ev))][: M.shape[1]]
    return np.real_if_close(ev, tol=1e6)


def chi2_cdf(x: float, dof: int) -> float:
    """Chi-square CDF, the regularized lower incomplete gamma ``P(dof/2, x/2)``."""
    x = float(x)
    if math.isnan(x) or x < 0:
        raise InvalidInputError("x must be >= 0")
    if int(dof) != dof or dof < 1:
        raise InvalidInputError("dof must be a positive integer")
    if math.isinf(x):
        return 1.0
    return float(special.gammainc(0.5 * dof, 0.5 * x))


def prob_select_restricted(r: int) -> float:
    """Asymptotic probability that RP_NH prefers a true restricted model: ``Pr(chi2_r < 2r)``.

    It does not depend on ``alpha`` or ``sigma``: the common eigenvalue
    cancels between the statistic and its threshold.
    """
    if int(r) != r or r < 1:
        raise InvalidInputError("r must be a positive integer")
    return chi2_cdf(2.0 * r, int(r))


@dataclass(frozen=True)
class NestedReport:
    full_fit: FitResult
    restricted_fit: FitResult
    rp_nh_full: float
    rp_nh_restricted: float
    statistic_L: float
    eigenvalues: np.ndarray
    prob_select_restricted: float

    @property
    def restricted_selected(self) -> bool:
        return self.rp_nh_restricted < self.rp_nh_full


def compare_nested(data: Dataset, full: ModelSpec, constraints: ZeroConstraints,
                   alpha: float, opts: Optional[FitOptions] = None) -> NestedReport:
    """Score a full model against its zero-constrained sub-model.

    ``constraints`` index the coefficients of ``full``'s design (intercept
    first when present).  ``statistic_L = 2n (RP_NH(full) - RP_NH(restricted))``.
    """
    alpha = check_alpha(alpha)
    sub = data.subset(full)
    cv_full = rp_nh(data, full, alpha, opts)
    rfit = fit_rmrpe(sub, constraints, alpha, opts)
    reduced = Dataset(sub.y, sub.X[:, list(constraints.free_indices)])
    cv_restricted = score_fit(reduced, rfit, alpha)
    L = 2.0 * sub.n * (cv_full.total - cv_restricted.total)
    return NestedReport(
        full_fit=cv_full.fit,
        restricted_fit=rfit,
        rp_nh_full=cv_full.total,
        rp_nh_restricted=cv_restricted.total,
        statistic_L=L,
        eigenvalues=overfit_eigenvalues(alpha, rfit.theta.sigma, constraints.r),
        prob_select_restricted=prob_select_restricted(constraints.r),
    )
