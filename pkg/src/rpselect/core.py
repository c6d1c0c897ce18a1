"""Gaussian linear-model building blocks for Renyi pseudodistance estimation.

The per-observation loss for a Gaussian regression model with tuning
parameter ``alpha > 0`` is

    V_i(theta) = (1/alpha) * (1 - c_alpha * sigma**(-alpha/(alpha+1))
                              * exp(-alpha/2 * r_i**2)),

with ``r_i = (y_i - x_i @ beta) / sigma`` and
``c_alpha = ((1+alpha)/(2*pi))**(alpha/(2*(alpha+1)))``.  At ``alpha = 0`` the
loss is the Gaussian negative log-density.  The pooled objective is the mean
of the per-observation losses; its minimiser is the minimum Renyi
pseudodistance estimator (MRPE).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .exceptions import InvalidInputError

#: exp() underflows to exactly 0.0 below this argument.
EXP_FLOOR = -745.0

HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not math.isfinite(alpha) or alpha < 0:
        raise InvalidInputError(f"alpha must be a finite number >= 0, got {alpha!r}")
    return alpha


def _check_sigma(sigma: float) -> float:
    sigma = float(sigma)
    if not math.isfinite(sigma) or sigma <= 0:
        raise InvalidInputError(f"sigma must be finite and > 0, got {sigma!r}")
    return sigma


@dataclass(frozen=True)
class Dataset:
    """Response vector ``y`` (length n) and fixed design matrix ``X`` (n x p)."""

    y: np.ndarray
    X: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        X = np.asarray(self.X, dtype=float)
        if y.ndim != 1:
            raise InvalidInputError(f"y must be one-dimensional, got shape {y.shape}")
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2:
            raise InvalidInputError(f"X must be two-dimensional, got shape {X.shape}")
        if y.shape[0] < 1:
            raise InvalidInputError("dataset has no observations")
        if X.shape[0] != y.shape[0]:
            raise InvalidInputError(
                f"X has {X.shape[0]} rows but y has {y.shape[0]} entries")
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(X))):
            raise InvalidInputError("dataset contains non-finite entries")
        y.flags.writeable = False
        X.flags.writeable = False
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def subset(self, model: "ModelSpec") -> "Dataset":
        """Dataset restricted to the design of a candidate model."""
        return Dataset(self.y, model.design(self.X))


@dataclass(frozen=True)
class ModelSpec:
    """A candidate model: a subset of master design columns plus an optional intercept.

    ``columns`` index into the master design matrix.  When ``include_intercept``
    is true an all-ones column is prepended to the selected columns.
    """

    columns: tuple = ()
    include_intercept: bool = True
    name: Optional[str] = None

    def __post_init__(self):
        cols = tuple(int(c) for c in self.columns)
        if len(set(cols)) != len(cols):
            raise InvalidInputError(f"duplicate column indices in {cols}")
        if any(c < 0 for c in cols):
            raise InvalidInputError(f"negative column index in {cols}")
        object.__setattr__(self, "columns", cols)
        if self.n_params < 1:
            raise InvalidInputError("a model needs at least one regression coefficient")

    @property
    def n_params(self) -> int:
        """Number of regression coefficients (sigma excluded)."""
        return len(self.columns) + int(self.include_intercept)

    def design(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if self.columns and max(self.columns) >= X.shape[1]:
            raise InvalidInputError(
                f"column index {max(self.columns)} out of range for {X.shape[1]} columns")
        parts = [X[:, list(self.columns)]]
        if self.include_intercept:
            parts.insert(0, np.ones((X.shape[0], 1)))
        return np.hstack(parts)

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        inner = ",".join(f"X{c + 1}" for c in self.columns)
        return f"({inner})" if inner else "(1)"


@dataclass(frozen=True)
class Theta:
    """Regression coefficients ``beta`` and error scale ``sigma``."""

    beta: np.ndarray
    sigma: float

    def __post_init__(self):
        beta = np.atleast_1d(np.asarray(self.beta, dtype=float)).copy()
        if beta.ndim != 1 or not np.all(np.isfinite(beta)):
            raise InvalidInputError("beta must be a finite vector")
        beta.flags.writeable = False
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "sigma", _check_sigma(self.sigma))

    @property
    def vector(self) -> np.ndarray:
        """Stacked parameter vector ``(beta, sigma)``."""
        return np.append(self.beta, self.sigma)

    @classmethod
    def from_vector(cls, v: Sequence[float]) -> "Theta":
        v = np.asarray(v, dtype=float)
        return cls(v[:-1], float(v[-1]))


@dataclass(frozen=True)
class RpConstants:
    c_alpha: float
    k_obj: Optional[float]
    K1: float


def c_alpha(alpha: float) -> float:
    """``((1+alpha)/(2 pi))**(alpha/(2(alpha+1)))``; equals 1 at ``alpha = 0``."""
    alpha = check_alpha(alpha)
    return ((1.0 + alpha) / (2.0 * math.pi)) ** (alpha / (2.0 * (alpha + 1.0)))


def rp_constants(alpha: float, sigma: float) -> RpConstants:
    """Scale constants used by the objective and the sandwich matrices.

    ``K1`` deliberately carries no ``1/alpha`` factor: with it the sandwich
    matrices would not reduce to the Fisher information at ``alpha = 0``.
    ``k_obj = c_alpha / alpha`` is the factor in front of the exponential term
    of the objective and is ``None`` at ``alpha = 0``.
    """
    alpha = check_alpha(alpha)
    sigma = _check_sigma(sigma)
    c = c_alpha(alpha)
    k_obj = c / alpha if alpha > 0 else None
    K1 = c * sigma ** (-(3.0 * alpha + 2.0) / (alpha + 1.0))
    return RpConstants(c_alpha=c, k_obj=k_obj, K1=K1)


def _residuals(y, X, beta, sigma):
    return (np.asarray(y, dtype=float) - np.asarray(X, dtype=float) @ beta) / sigma


def _stable_loss(mean_wm1, sigma, alpha):
    # (1 - c sigma^-q (1 + mean_wm1)) / alpha in log/expm1 form, so that small
    # alpha does not lose digits to cancellation
    if mean_wm1 <= -1.0:
        return 1.0 / alpha
    log_c = alpha / (2.0 * (alpha + 1.0)) * math.log((1.0 + alpha) / (2.0 * math.pi))
    L = log_c - alpha / (alpha + 1.0) * math.log(sigma) + math.log1p(mean_wm1)
    return -math.expm1(L) / alpha


def _robust_weights(r, alpha):
    return np.exp(np.maximum(-0.5 * alpha * r * r, EXP_FLOOR))


def vhat(y_i: float, x_i, theta: Theta, alpha: float) -> float:
    """Per-observation loss for ``alpha > 0``; bounded above by ``1/alpha``."""
    alpha = check_alpha(alpha)
    if alpha == 0:
        raise InvalidInputError("vhat requires alpha > 0; use vhat0 for alpha = 0")
    x_i = np.atleast_1d(np.asarray(x_i, dtype=float))
    if not (math.isfinite(float(y_i)) and np.all(np.isfinite(x_i))):
        raise InvalidInputError("non-finite observation")
    if x_i.shape[0] != theta.beta.shape[0]:
        raise InvalidInputError("x_i and beta have different lengths")
    r = (float(y_i) - float(x_i @ theta.beta)) / theta.sigma
    return _stable_loss(math.expm1(max(-0.5 * alpha * r * r, EXP_FLOOR)), theta.sigma, alpha)


def vhat0(y_i: float, x_i, theta: Theta) -> float:
    """Gaussian negative log-density ``-log phi(y_i; x_i @ beta, sigma**2)``."""
    x_i = np.atleast_1d(np.asarray(x_i, dtype=float))
    if x_i.shape[0] != theta.beta.shape[0]:
        raise InvalidInputError("x_i and beta have different lengths")
    r = (float(y_i) - float(x_i @ theta.beta)) / theta.sigma
    return HALF_LOG_2PI + math.log(theta.sigma) + 0.5 * r * r


def _check_dims(data: Dataset, theta: Theta):
    if data.p != theta.beta.shape[0]:
        raise InvalidInputError(
            f"design has {data.p} columns but beta has {theta.beta.shape[0]} entries")


def objective_h(data: Dataset, theta: Theta, alpha: float) -> float:
    """Mean per-observation loss ``H_n`` at ``theta``."""
    alpha = check_alpha(alpha)
    _check_dims(data, theta)
    return _objective(data.y, data.X, theta.beta, theta.sigma, alpha)


def _objective(y, X, beta, sigma, alpha):
    r = _residuals(y, X, beta, sigma)
    if alpha == 0:
        return HALF_LOG_2PI + math.log(sigma) + 0.5 * float(np.mean(r * r))
    wm1 = np.expm1(np.maximum(-0.5 * alpha * r * r, EXP_FLOOR))
    return _stable_loss(float(np.mean(wm1)), sigma, alpha)


def gradient_h(data: Dataset, theta: Theta, alpha: float) -> np.ndarray:
    """Analytic gradient of ``objective_h`` with respect to ``(beta, sigma)``."""
    alpha = check_alpha(alpha)
    _check_dims(data, theta)
    return _gradient(data.y, data.X, theta.beta, theta.sigma, alpha)


def _gradient(y, X, beta, sigma, alpha):
    n = X.shape[0]
    r = _residuals(y, X, beta, sigma)
    if alpha == 0:
        g_beta = -(X.T @ r) / (n * sigma)
        g_sigma = (1.0 - float(np.mean(r * r))) / sigma
        return np.append(g_beta, g_sigma)
    A = c_alpha(alpha) * sigma ** (-alpha / (alpha + 1.0))
    w = _robust_weights(r, alpha)
    g_beta = -(A / sigma) * (X.T @ (w * r)) / n
    g_sigma = -(A / sigma) * float(np.mean(w * (r * r - 1.0 / (1.0 + alpha))))
    return np.append(g_beta, g_sigma)


def hessian_h(data: Dataset, theta: Theta, alpha: float) -> np.ndarray:
    """Analytic Hessian of ``objective_h`` with respect to ``(beta, sigma)``."""
    alpha = check_alpha(alpha)
    _check_dims(data, theta)
    return _hessian(data.y, data.X, theta.beta, theta.sigma, alpha)


def _hessian(y, X, beta, sigma, alpha):
    n, p = X.shape
    r = _residuals(y, X, beta, sigma)
    H = np.empty((p + 1, p + 1))
    if alpha == 0:
        H[:p, :p] = X.T @ X / (n * sigma ** 2)
        H[:p, p] = 2.0 * (X.T @ r) / (n * sigma ** 2)
        H[p, p] = (3.0 * float(np.mean(r * r)) - 1.0) / sigma ** 2
    else:
        q = alpha / (alpha + 1.0)
        kappa = 1.0 / (alpha + 1.0)
        A = c_alpha(alpha) * sigma ** (-q)
        w = _robust_weights(r, alpha)
        r2 = r * r
        scale = A / (n * sigma ** 2)
        H[:p, :p] = scale * (X.T * (w * (1.0 - alpha * r2))) @ X
        H[:p, p] = scale * (X.T @ (w * r * (q + 2.0 - alpha * r2)))
        H[p, p] = scale * float(np.sum(
            w * ((q + 1.0) * (r2 - kappa) + 2.0 * r2 - alpha * r2 * (r2 - kappa))))
    H[p, :p] = H[:p, p]
    return H
