"""RP_NH model-selection criterion, its sandwich-matrix penalty and classical baselines."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import Dataset, ModelSpec, Theta, check_alpha, rp_constants
from .estimator import FitOptions, FitResult, fit_mle, fit_mrpe
from .exceptions import (InvalidInputError, NoValidModelError, RpSelectError,
                         SingularDesignError)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SandwichMatrices:
    psi: np.ndarray
    omega: np.ndarray


@dataclass(frozen=True)
class CriterionValue:
    """Score of one candidate model; smaller is better."""

    goodness: float
    penalty: float
    total: float
    model: Optional[ModelSpec]
    alpha: float
    converged: bool = True
    fit: Optional[FitResult] = None


@dataclass(frozen=True)
class Criterion:
    """A selection rule: ``kind`` is one of ``"rp_nh"``, ``"aic"``, ``"bic"``, ``"aicc"``."""

    kind: str
    alpha: float = 0.0

    def __post_init__(self):
        kind = self.kind.lower()
        if kind not in ("rp_nh", "aic", "bic", "aicc"):
            raise InvalidInputError(f"unknown criterion {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "alpha", check_alpha(self.alpha))

    @classmethod
    def parse(cls, text: str) -> "Criterion":
        """Parse ``AIC``, ``BIC``, ``AICC`` or ``RPNH_<alpha>`` (case-insensitive)."""
        t = text.strip().upper().replace("-", "_")
        if t in ("AIC", "BIC", "AICC"):
            return cls(t.lower())
        for prefix in ("RPNH_", "RP_NH_", "RPNH"):
            if t.startswith(prefix):
                try:
                    return cls("rp_nh", float(t[len(prefix):]))
                except ValueError:
                    break
        raise InvalidInputError(f"cannot parse criterion {text!r}")

    @property
    def label(self) -> str:
        if self.kind == "rp_nh":
            return f"RPNH_{self.alpha:g}"
        return {"aic": "AIC", "bic": "BIC", "aicc": "AICc"}[self.kind]


def _xtx_over_n(X):
    return X.T @ X / X.shape[0]


def sandwich_matrices(data: Dataset, theta: Theta, alpha: float) -> SandwichMatrices:
    """Expected Hessian ``psi`` and score covariance ``omega`` of the loss, per observation.

    Block-diagonal in ``(beta, sigma)``; at ``alpha = 0`` both reduce to the
    Fisher information ``blockdiag(X'X/(n sigma^2), 2/sigma^2)``.
    """
    alpha = check_alpha(alpha)
    if data.p != theta.beta.shape[0]:
        raise InvalidInputError("theta does not match the design")
    K1 = rp_constants(alpha, theta.sigma).K1
    G = _xtx_over_n(data.X)
    p = data.p
    a1 = alpha + 1.0
    a2 = 2.0 * alpha + 1.0
    psi = np.zeros((p + 1, p + 1))
    omega = np.zeros((p + 1, p + 1))
    psi_scale = K1 * a1 ** -1.5
    psi[:p, :p] = psi_scale * G
    psi[p, p] = psi_scale * 2.0 / a1
    om_scale = K1 ** 2 * theta.sigma ** 2 * a2 ** -1.5
    omega[:p, :p] = om_scale * G
    omega[p, p] = om_scale * (3 * alpha ** 2 + 4 * alpha + 2) / (a1 ** 2 * a2)
    return SandwichMatrices(psi=psi, omega=omega)


def penalty_closed_form(n: int, p: int, sigma: float, alpha: float) -> float:
    """``trace(Omega Psi^-1) / n`` for a Gaussian linear model with ``p`` coefficients."""
    alpha = check_alpha(alpha)
    K1 = rp_constants(alpha, sigma).K1
    a1 = alpha + 1.0
    a2 = 2.0 * alpha + 1.0
    bracket = (p * a1 ** 1.5 / a2 ** 1.5
               + a1 ** 0.5 * (3 * alpha ** 2 + 4 * alpha + 2) / (2.0 * a2 ** 2.5))
    return sigma ** 2 * K1 * bracket / n


def penalty_trace(data: Dataset, theta: Theta, alpha: float) -> float:
    """Bias-correction term ``trace(Omega Psi^-1) / n`` computed from the matrices."""
    sm = sandwich_matrices(data, theta, alpha)
    try:
        L = np.linalg.cholesky(sm.psi)
    except np.linalg.LinAlgError as exc:
        raise SingularDesignError("psi is not positive definite") from exc
    # trace(Omega Psi^-1) = trace(L^-1 Omega L^-T)
    Z = np.linalg.solve(L, np.linalg.solve(L, sm.omega).T)
    return float(np.trace(Z)) / data.n


def rp_nh(data: Dataset, model: ModelSpec, alpha: float,
          opts: Optional[FitOptions] = None, strict: bool = False) -> CriterionValue:
    """Fit the MRPE on ``model``'s design and return its RP_NH score.

    ``goodness`` is the pooled objective at the fit and ``penalty`` the trace
    term.  An unconverged fit is returned with ``converged=False``; with
    ``strict=True`` it raises instead.
    """
    alpha = check_alpha(alpha)
    sub = data.subset(model)
    fit = fit_mrpe(sub, alpha, opts)
    if strict and not fit.converged:
        raise RpSelectError(f"fit for model {model.label} did not converge: {fit.message}")
    return score_fit(sub, fit, alpha, model)


def score_fit(data: Dataset, fit: FitResult, alpha: float,
              model: Optional[ModelSpec] = None) -> CriterionValue:
    """RP_NH score of an existing fit on ``data`` (``data`` is the model's own design)."""
    goodness = float(fit.objective)
    penalty = penalty_closed_form(data.n, data.p, fit.theta.sigma, alpha)
    return CriterionValue(goodness=goodness, penalty=penalty, total=goodness + penalty,
                          model=model, alpha=alpha, converged=fit.converged, fit=fit)


def gaussian_loglik(data: Dataset, theta: Theta) -> float:
    r = (data.y - data.X @ theta.beta) / theta.sigma
    return float(-data.n * (0.5 * math.log(2 * math.pi) + math.log(theta.sigma))
                 - 0.5 * np.sum(r * r))


def _mle_on(data, model):
    sub = data.subset(model) if model is not None else data
    return sub, fit_mle(sub)


def aic(data: Dataset, model: Optional[ModelSpec] = None) -> float:
    """``-2 loglik + 2 k`` at the MLE, where ``k`` counts the coefficients and sigma."""
    sub, fit = _mle_on(data, model)
    return -2.0 * gaussian_loglik(sub, fit.theta) + 2.0 * (sub.p + 1)


def bic(data: Dataset, model: Optional[ModelSpec] = None) -> float:
    sub, fit = _mle_on(data, model)
    return -2.0 * gaussian_loglik(sub, fit.theta) + (sub.p + 1) * math.log(sub.n)


def aicc(data: Dataset, model: Optional[ModelSpec] = None) -> float:
    """Small-sample corrected AIC; undefined unless ``n > p + 2``."""
    sub, fit = _mle_on(data, model)
    k = sub.p + 1
    if sub.n - sub.p - 2 <= 0:
        raise InvalidInputError("AICc needs n > p + 2")
    return -2.0 * gaussian_loglik(sub, fit.theta) + 2.0 * k + 2.0 * k * (k + 1) / (sub.n - sub.p - 2)


def score(data: Dataset, model: ModelSpec, criterion: Criterion,
          opts: Optional[FitOptions] = None) -> CriterionValue:
    """Score a candidate under any criterion; classical ones report ``goodness = -2 loglik``."""
    if criterion.kind == "rp_nh":
        return rp_nh(data, model, criterion.alpha, opts)
    sub, fit = _mle_on(data, model)
    goodness = -2.0 * gaussian_loglik(sub, fit.theta)
    total = {"aic": aic, "bic": bic, "aicc": aicc}[criterion.kind](sub)
    return CriterionValue(goodness=goodness, penalty=total - goodness, total=total,
                          model=model, alpha=0.0, converged=fit.converged, fit=fit)


def select_best(data: Dataset, candidates: Sequence[ModelSpec], criterion: Criterion,
                opts: Optional[FitOptions] = None, strict: bool = False):
    """Return ``(best_model, scores)`` where ``scores`` follows candidate order.

    Candidates whose fit fails or does not converge are excluded (with a
    logged warning) and appear as ``None`` in ``scores``; ``strict=True``
    raises instead.  Ties go to fewer coefficients, then the earlier candidate.
    """
    if not candidates:
        raise InvalidInputError("no candidate models")
    scores = []
    for model in candidates:
        try:
            cv = score(data, model, criterion, opts)
        except RpSelectError as exc:
            if strict:
                raise
            logger.warning("skipping model %s: %s", model.label, exc)
            scores.append(None)
            continue
        if not cv.converged:
            if strict:
                raise RpSelectError(f"fit for model {model.label} did not converge")
            logger.warning("skipping unconverged model %s", model.label)
        scores.append(cv)
    valid = [(cv.total, model.n_params, i)
             for i, (model, cv) in enumerate(zip(candidates, scores))
             if cv is not None and cv.converged and math.isfinite(cv.total)]
    if not valid:
        raise NoValidModelError("every candidate model failed to fit")
    best = min(valid)[2]
    return candidates[best], scores


def expected_objective(X: np.ndarray, beta_true: np.ndarray, sigma_true: float,
                       theta: Theta, alpha: float) -> float:
    """Population objective at ``theta`` when ``y ~ N(X beta_true, sigma_true^2)``.

    Closed-form Gaussian expectation of the pooled loss; used to check the
    bias correction of RP_NH by simulation.
    """
    alpha = check_alpha(alpha)
    X = np.asarray(X, dtype=float)
    d = X @ (np.asarray(beta_true, dtype=float) - theta.beta)
    s2 = theta.sigma ** 2
    t2 = float(sigma_true) ** 2
    if alpha == 0:
        return (0.5 * math.log(2 * math.pi) + math.log(theta.sigma)
                + float(np.mean(d * d + t2)) / (2 * s2))
    c = rp_constants(alpha, theta.sigma).c_alpha
    q = alpha / (alpha + 1.0)
    v = s2 + alpha * t2
    ew = math.sqrt(s2 / v) * np.exp(-alpha * d * d / (2 * v))
    return (1.0 - c * theta.sigma ** (-q) * float(np.mean(ew))) / alpha
