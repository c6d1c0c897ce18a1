import logging
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rpselect.core import Dataset, ModelSpec, Theta, rp_constants
from rpselect.criterion import (Criterion, aic, aicc, bic, expected_objective,
                                penalty_closed_form, penalty_trace, rp_nh, sandwich_matrices,
                                score, select_best)
from rpselect.estimator import fit_mrpe
from rpselect.exceptions import InvalidInputError, NoValidModelError
from rpselect.hald import hald_candidates, load_hald

from oracles import HALD_BEST, HALD_COLS, HALD_ROWS, HALD_TABLE, gaussian_aic


def _random_design(rng, n, p):
    return np.column_stack([np.ones(n), rng.normal(size=(n, p - 1))])


def test_sandwich_at_zero_is_fisher():
    rng = np.random.default_rng(0)
    X = _random_design(rng, 30, 3)
    th = Theta([0.0, 1.0, 2.0], 1.7)
    sm = sandwich_matrices(Dataset(rng.normal(size=30), X), th, 0.0)
    fisher = np.zeros((4, 4))
    fisher[:3, :3] = X.T @ X / 30 / 1.7 ** 2
    fisher[3, 3] = 2 / 1.7 ** 2
    np.testing.assert_allclose(sm.psi, fisher, rtol=1e-14)
    np.testing.assert_allclose(sm.omega, fisher, rtol=1e-14)


@pytest.mark.parametrize("alpha", [0.1, 0.5, 1.3])
def test_sandwich_symmetric_positive_definite(alpha):
    rng = np.random.default_rng(1)
    d = Dataset(rng.normal(size=25), _random_design(rng, 25, 4))
    sm = sandwich_matrices(d, Theta(np.zeros(4), 0.8), alpha)
    for A in (sm.psi, sm.omega):
        np.testing.assert_allclose(A, A.T, atol=1e-12)
        assert np.linalg.eigvalsh(A).min() > 0


def test_sandwich_orthonormal_design_entries():
    n, alpha, sigma = 4, 0.5, 1.0
    X = np.eye(n) * math.sqrt(n)  # X'X/n = I
    sm = sandwich_matrices(Dataset(np.zeros(n), X), Theta(np.zeros(n), sigma), alpha)
    c = ((1 + alpha) / (2 * math.pi)) ** (alpha / (2 * (alpha + 1)))
    assert sm.psi[0, 0] == pytest.approx(c * 1.5 ** -1.5, rel=1e-14)
    assert sm.psi[n, n] == pytest.approx(c * 1.5 ** -1.5 * 2 / 1.5, rel=1e-14)
    assert sm.omega[0, 0] == pytest.approx(c ** 2 * 2.0 ** -1.5, rel=1e-14)
    assert sm.omega[n, n] == pytest.approx(c ** 2 * 2.0 ** -1.5 * (0.75 + 2 + 2) / (2.25 * 2), rel=1e-14)
    assert np.count_nonzero(sm.psi[:n, n]) == 0


def test_sigma_corner_ratio():
    alpha, sigma = 0.7, 1.9
    d = Dataset(np.zeros(5), np.ones((5, 1)))
    sm = sandwich_matrices(d, Theta([0.0], sigma), alpha)
    K1 = rp_constants(alpha, sigma).K1
    expected = (K1 * sigma ** 2 * (alpha + 1) ** 0.5 * (3 * alpha ** 2 + 4 * alpha + 2)
                / (2 * (2 * alpha + 1) ** 2.5))
    assert sm.omega[1, 1] / sm.psi[1, 1] == pytest.approx(expected, rel=1e-13)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2 ** 31), p=st.integers(1, 6), alpha=st.floats(0.0, 2.0),
       sigma=st.floats(0.05, 20.0))
def test_penalty_closed_form_matches_trace(seed, p, alpha, sigma):
    rng = np.random.default_rng(seed)
    n = p + 5
    d = Dataset(rng.normal(size=n), _random_design(rng, n, p))
    th = Theta(np.zeros(p), sigma)
    assert penalty_trace(d, th, alpha) == pytest.approx(
        penalty_closed_form(n, p, sigma, alpha), rel=1e-10)


def test_penalty_at_zero_counts_parameters():
    assert penalty_closed_form(50, 3, 2.3, 0.0) == pytest.approx(4 / 50, rel=1e-14)


def test_penalty_example_value():
    # p = 4, alpha = 0.5, sigma = 1, n = 100 evaluated term by term
    c = (1.5 / (2 * math.pi)) ** (0.5 / 3)
    first = 4 * 1.5 ** 1.5 / 2 ** 1.5
    second = 1.5 ** 0.5 * (0.75 + 2 + 2) / (2 * 2 ** 2.5)
    assert penalty_closed_form(100, 4, 1.0, 0.5) == pytest.approx(c * (first + second) / 100,
                                                                  rel=1e-14)


def test_hald_decomposition_x1x2():
    cv = rp_nh(load_hald(), ModelSpec((0, 1)), 0.01)
    assert cv.total == cv.goodness + cv.penalty
    assert cv.goodness == pytest.approx(HALD_TABLE[0.01][0] - cv.penalty, abs=1e-2)
    assert cv.total == pytest.approx(2.4179, abs=1e-4)


def test_hald_first_column_reproduced():
    data = load_hald()
    for label, cols, ref in zip(HALD_ROWS, HALD_COLS, HALD_TABLE[0.01]):
        assert rp_nh(data, ModelSpec(cols), 0.01).total == pytest.approx(ref, abs=2e-4), label


@pytest.mark.parametrize("alpha", [0.5, 0.1])
def test_hald_best_model(alpha):
    best, scores = select_best(load_hald(), hald_candidates(), Criterion("rp_nh", alpha))
    assert "X" + "".join(str(c + 1) for c in best.columns) == HALD_BEST[alpha]
    assert len(scores) == 11


def test_hald_collapsed_models_are_skipped(caplog):
    with caplog.at_level(logging.WARNING):
        best, scores = select_best(load_hald(), hald_candidates(), Criterion("rp_nh", 0.7))
    assert best.columns == (0, 1, 2)
    skipped = [m.label for m, s in zip(hald_candidates(), scores) if not s.converged]
    assert skipped == ["(X1,X3,X4)", "(X2,X3,X4)"]
    assert "unconverged" in caplog.text


@pytest.mark.parametrize("seed", range(5))
def test_aic_bridge(seed):
    rng = np.random.default_rng(seed)
    n = 40
    X = rng.normal(size=(n, 3))
    y = 1 + X[:, 0] - 0.5 * X[:, 1] + rng.normal(size=n)
    data = Dataset(y, X)
    for model in [ModelSpec(()), ModelSpec((0,)), ModelSpec((0, 1)), ModelSpec((0, 1, 2))]:
        ref = gaussian_aic(y, model.design(X)) / (2 * n)
        assert rp_nh(data, model, 1e-5).total == pytest.approx(ref, rel=1e-3)
        assert aic(data, model) / (2 * n) == pytest.approx(ref, rel=1e-12)


def test_classical_criteria_by_hand():
    y = np.array([1.0, 2.0, 4.0])
    d = Dataset(y, np.ones((3, 1)))
    s2 = np.var(y)
    loglik = -1.5 * math.log(2 * math.pi * s2) - 1.5
    assert aic(d) == pytest.approx(-2 * loglik + 4, rel=1e-14)
    assert bic(d) == pytest.approx(-2 * loglik + 2 * math.log(3), rel=1e-14)
    with pytest.raises(InvalidInputError):
        aicc(d)
    d4 = Dataset(np.array([1.0, 2.0, 4.0, 3.5]), np.ones((4, 1)))
    assert aicc(d4) == pytest.approx(aic(d4) + 2 * 2 * 3 / 1, rel=1e-14)


def test_identical_fit_penalises_larger_model():
    rng = np.random.default_rng(3)
    x = rng.normal(size=20)
    A = np.column_stack([np.ones(20), x])
    y = 1 + x + rng.normal(size=20)
    # an extra column orthogonal to both the design and the residuals leaves the fit unchanged
    resid = y - A @ np.linalg.lstsq(A, y, rcond=None)[0]
    z = rng.normal(size=20)
    z -= A @ np.linalg.lstsq(A, z, rcond=None)[0]
    z -= resid * (z @ resid) / (resid @ resid)
    data = Dataset(y, np.column_stack([x, z]))
    small, big = ModelSpec((0,)), ModelSpec((0, 1))
    assert score(data, small, Criterion("aic")).goodness == pytest.approx(
        score(data, big, Criterion("aic")).goodness, rel=1e-12)
    for f in (aic, bic, aicc):
        assert f(data, big) > f(data, small)


def test_select_best_single_and_ties():
    data = load_hald()
    m = ModelSpec((0, 1))
    best, scores = select_best(data, [m], Criterion("aic"))
    assert best is m
    # duplicated candidates tie exactly; the earlier one wins
    a, b = ModelSpec((0, 1), name="first"), ModelSpec((0, 1), name="second")
    assert select_best(data, [a, b], Criterion("bic"))[0].name == "first"
    with pytest.raises(InvalidInputError):
        select_best(data, [], Criterion("aic"))


def test_select_best_tie_prefers_fewer_parameters(monkeypatch):
    import rpselect.criterion as crit_mod
    from rpselect.criterion import CriterionValue

    def fake_score(data, model, criterion, opts=None):
        return CriterionValue(1.0, 0.5, 1.5, model, 0.0)
    monkeypatch.setattr(crit_mod, "score", fake_score)
    cands = [ModelSpec((0, 1, 2)), ModelSpec((3,)), ModelSpec((0, 1)), ModelSpec((2,))]
    best, _ = select_best(load_hald(), cands, Criterion("aic"))
    assert best is cands[1]


def test_select_best_all_failures():
    X = np.column_stack([np.arange(4.0), 2 * np.arange(4.0)])
    data = Dataset(np.array([1.0, 0.0, 2.0, 1.0]), X)
    with pytest.raises(NoValidModelError):
        select_best(data, [ModelSpec((0, 1))], Criterion("rp_nh", 0.3))


def test_permutation_invariance():
    data = load_hald()
    perm = np.random.default_rng(5).permutation(data.n)
    shuffled = Dataset(data.y[perm], data.X[perm])
    for alpha in (0.05, 0.5):
        crit = Criterion("rp_nh", alpha)
        b1, s1 = select_best(data, hald_candidates(), crit)
        b2, s2 = select_best(shuffled, hald_candidates(), crit)
        assert b1 == b2
        for u, v in zip(s1, s2):
            if u.converged:
                assert u.total == pytest.approx(v.total, abs=1e-12)


def test_ranking_invariant_to_response_shift():
    data = load_hald()
    shifted = Dataset(data.y + 1000.0, data.X)
    crit = Criterion("rp_nh", 0.2)
    assert select_best(data, hald_candidates(), crit)[0] == select_best(
        shifted, hald_candidates(), crit)[0]


def test_criterion_parsing():
    assert Criterion.parse("rpnh_0.4") == Criterion("rp_nh", 0.4)
    assert Criterion.parse("AICc").kind == "aicc"
    assert Criterion("rp_nh", 0.5).label == "RPNH_0.5"
    for bad in ("GIC", "RPNH_x"):
        with pytest.raises(InvalidInputError):
            Criterion.parse(bad)
    with pytest.raises(InvalidInputError):
        Criterion("rp_nh", -1)


def test_score_classical_decomposition():
    cv = score(load_hald(), ModelSpec((0, 1)), Criterion("bic"))
    assert cv.total == cv.goodness + cv.penalty


@pytest.mark.parametrize("alpha", [0.0, 0.4])
def test_expected_objective_by_monte_carlo(alpha):
    rng = np.random.default_rng(9)
    X = _random_design(rng, 10, 2)
    beta_true, sigma_true = np.array([1.0, -2.0]), 1.5
    th = Theta([1.2, -1.8], 1.3)
    reps = 20000
    Y = X @ beta_true + sigma_true * rng.normal(size=(reps, 10))
    from rpselect.core import objective_h
    mc = np.mean([objective_h(Dataset(y, X), th, alpha) for y in Y[:4000]])
    ref = expected_objective(X, beta_true, sigma_true, th, alpha)
    assert mc == pytest.approx(ref, abs=4e-3)


def test_penalty_uses_fitted_scale():
    data = load_hald().subset(ModelSpec((0, 1)))
    fit = fit_mrpe(data, 0.3)
    cv = rp_nh(load_hald(), ModelSpec((0, 1)), 0.3)
    assert cv.penalty == pytest.approx(penalty_trace(data, fit.theta, 0.3), rel=1e-10)
