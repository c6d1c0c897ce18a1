"""Polynomial-regression selection study under clean and contaminated errors."""
from __future__ import annotations

import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import Dataset
from .criterion import Criterion, aic, aicc, bic, penalty_closed_form
from .estimator import FitOptions, fit_mrpe
from .exceptions import ConfigError, RpSelectError

DEFAULT_ALPHAS = (0.01, 0.02, 0.04, 0.07, 0.1, 0.2, 0.4, 0.5, 0.7, 1.0)


def _default_criteria():
    return (Criterion("aic"), Criterion("bic"), Criterion("aicc")) + tuple(
        Criterion("rp_nh", a) for a in DEFAULT_ALPHAS)


@dataclass(frozen=True)
class StudyConfig:
    """Settings of one selection study.

    ``beta_true`` holds the generator coefficients on powers ``0, 1, ...`` of
    ``x``.  ``robust_restart=None`` turns the estimator's second (LAD) start
    on whenever the data are contaminated.
    """

    n: int = 100
    degrees: tuple = (0, 1, 2, 3, 4, 5)
    beta_true: tuple = (0.0, 1.0, 2.0, -1.0, 1.0)
    replicates: int = 1000
    contamination_proportion: float = 0.0
    contamination_r: float = 10.0
    criteria: tuple = field(default_factory=_default_criteria)
    seed: int = 0
    robust_restart: Optional[bool] = None
    n_jobs: int = 1

    def __post_init__(self):
        object.__setattr__(self, "degrees", tuple(int(d) for d in self.degrees))
        object.__setattr__(self, "beta_true", tuple(float(b) for b in self.beta_true))
        object.__setattr__(self, "criteria", tuple(
            Criterion.parse(c) if isinstance(c, str) else c for c in self.criteria))
        if self.replicates < 1:
            raise ConfigError("replicates must be >= 1")
        if not self.degrees or min(self.degrees) < 0 or len(set(self.degrees)) != len(self.degrees):
            raise ConfigError("degrees must be distinct non-negative integers")
        if self.n < max(self.degrees) + 2:
            raise ConfigError("n must be at least max degree + 2")
        if not self.beta_true:
            raise ConfigError("beta_true is empty")
        if not 0.0 <= self.contamination_proportion < 1.0:
            raise ConfigError("contamination proportion must lie in [0, 1)")
        if not (math.isfinite(self.contamination_r) and self.contamination_r >= 0):
            raise ConfigError("contamination r must be finite and >= 0")
        if not self.criteria:
            raise ConfigError("no criteria configured")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.n_jobs < 1:
            raise ConfigError("n_jobs must be >= 1")

    @property
    def n_contaminated(self) -> int:
        return int(round(self.contamination_proportion * self.n))

    @property
    def true_degree(self) -> int:
        nz = np.flatnonzero(np.asarray(self.beta_true))
        return int(nz[-1]) if nz.size else 0

    def describe(self) -> str:
        crit = ",".join(c.label for c in self.criteria)
        return (f"n={self.n} degrees={','.join(map(str, self.degrees))} "
                f"beta_true={','.join(f'{b:g}' for b in self.beta_true)} "
                f"replicates={self.replicates} contamination={self.contamination_proportion:g} "
                f"r={self.contamination_r:g} seed={self.seed} criteria={crit}")


@dataclass(frozen=True)
class SelectionTable:
    """Selection counts: ``counts[i, j]`` is how often criterion ``i`` picked ``degrees[j]``."""

    labels: tuple
    degrees: tuple
    counts: np.ndarray
    failed: np.ndarray
    replicates: int

    def frequency(self, label: str, degree: int) -> float:
        i = self.labels.index(label)
        return self.counts[i, self.degrees.index(degree)] / self.replicates

    def row(self, label: str) -> np.ndarray:
        return self.counts[self.labels.index(label)]

    def to_text(self, delimiter: str = "\t") -> str:
        out = io.StringIO()
        out.write(delimiter.join(["criterion"] + [f"p={d}" for d in self.degrees] + ["failed"]) + "\n")
        for label, row, nf in zip(self.labels, self.counts, self.failed):
            out.write(delimiter.join([label] + [str(int(c)) for c in row] + [str(int(nf))]) + "\n")
        return out.getvalue()


def abscissas(n: int) -> np.ndarray:
    """Equally spaced design points ``-2 + 4 (i+1)/(n+2)`` for ``i = 1..n``."""
    if n < 1:
        raise ConfigError("n must be >= 1")
    i = np.arange(1, n + 1)
    return -2.0 + 4.0 * (i + 1) / (n + 2)


def polynomial_design(n: int, max_degree: int) -> dict:
    """Map each degree ``0..max_degree`` to its design ``(1, x, ..., x^d)``."""
    if n < max_degree + 2:
        raise ConfigError("n must be at least max_degree + 2")
    x = abscissas(n)
    V = np.vander(x, max_degree + 1, increasing=True)
    return {d: V[:, : d + 1] for d in range(max_degree + 1)}


def true_mean(config: StudyConfig) -> np.ndarray:
    x = abscissas(config.n)
    return np.vander(x, len(config.beta_true), increasing=True) @ np.asarray(config.beta_true)


def _replicate_rng(seed: int, replicate_index: int) -> np.random.Generator:
    # Philox is counter based; the key depends only on (seed, replicate)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(replicate_index)])))


def sample_errors(config: StudyConfig, replicate_index: int):
    """Errors of one replicate and the sorted indices that received contamination.

    A uniformly chosen set of ``round(proportion * n)`` observations gets an
    error drawn from ``U(min m - r, max m + r)`` instead of ``N(0, 1)``.
    """
    rng = _replicate_rng(config.seed, replicate_index)
    m = true_mean(config)
    eps = rng.standard_normal(config.n)
    k = config.n_contaminated
    idx = np.sort(rng.choice(config.n, size=k, replace=False)) if k else np.empty(0, dtype=int)
    if k:
        lo, hi = m.min() - config.contamination_r, m.max() + config.contamination_r
        eps[idx] = rng.uniform(lo, hi, size=k)
    return eps, idx


def generate_sample(config: StudyConfig, replicate_index: int) -> Dataset:
    """One replicate ``y = m(x) + eps`` on the degree-``max(degrees)`` design."""
    eps, _ = sample_errors(config, replicate_index)
    X = np.vander(abscissas(config.n), max(config.degrees) + 1, increasing=True)
    return Dataset(true_mean(config) + eps, X)


def _score_replicate(config: StudyConfig, replicate_index: int) -> np.ndarray:
    """Selected degree per criterion, or -1 where every candidate failed."""
    data = generate_sample(config, replicate_index)
    restart = config.robust_restart
    if restart is None:
        restart = config.n_contaminated > 0
    opts = FitOptions(robust_restart=restart)
    n_deg = len(config.degrees)
    values = np.full((len(config.criteria), n_deg), np.nan)
    for j, d in enumerate(config.degrees):
        sub = Dataset(data.y, data.X[:, : d + 1])
        for i, crit in enumerate(config.criteria):
            try:
                if crit.kind == "aic":
                    values[i, j] = aic(sub)
                elif crit.kind == "bic":
                    values[i, j] = bic(sub)
                elif crit.kind == "aicc":
                    values[i, j] = aicc(sub)
                else:
                    fit = fit_mrpe(sub, crit.alpha, opts)
                    if fit.converged:
                        values[i, j] = fit.objective + penalty_closed_form(
                            sub.n, sub.p, fit.theta.sigma, crit.alpha)
            except RpSelectError:
                pass
    chosen = np.full(len(config.criteria), -1, dtype=int)
    # candidates are ordered by size, so argmin's first-index rule prefers fewer parameters
    order = np.argsort(config.degrees, kind="stable")
    for i in range(len(config.criteria)):
        row = values[i, order]
        if np.any(np.isfinite(row)):
            chosen[i] = order[int(np.nanargmin(row))]
    return chosen


def _score_block(args):
    config, start, stop = args
    return np.array([_score_replicate(config, k) for k in range(start, stop)], dtype=int)


def run_study(config: StudyConfig, progress=None) -> SelectionTable:
    """Run every replicate and tabulate which degree each criterion selects.

    Results do not depend on ``n_jobs``: every replicate draws from its own
    RNG stream and counts are merged in replicate order.
    """
    R = config.replicates
    if config.n_jobs == 1:
        rows = []
        for k in range(R):
            rows.append(_score_replicate(config, k))
            if progress is not None:
                progress(k + 1, R)
        chosen = np.array(rows, dtype=int)
    else:
        step = max(1, math.ceil(R / (4 * config.n_jobs)))
        blocks = [(config, s, min(s + step, R)) for s in range(0, R, step)]
        with ProcessPoolExecutor(max_workers=config.n_jobs) as pool:
            chosen = np.vstack(list(pool.map(_score_block, blocks)))
    n_crit = len(config.criteria)
    counts = np.zeros((n_crit, len(config.degrees)), dtype=int)
    failed = np.zeros(n_crit, dtype=int)
    for i in range(n_crit):
        sel = chosen[:, i]
        failed[i] = int(np.sum(sel < 0))
        counts[i] = np.bincount(sel[sel >= 0], minlength=len(config.degrees))
    return SelectionTable(labels=tuple(c.label for c in config.criteria),
                          degrees=config.degrees, counts=counts, failed=failed,
                          replicates=R)
