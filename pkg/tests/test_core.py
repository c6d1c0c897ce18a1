import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rpselect.core import (Dataset, ModelSpec, Theta, c_alpha, gradient_h, hessian_h,
                           objective_h, rp_constants, vhat, vhat0)
from rpselect.exceptions import InvalidInputError

from oracles import density_power_integral, fd_gradient, loss_oracle


def _instance(seed, n=15, p=3):
    rng = np.random.default_rng(seed)
    X = np.column_stack([np.ones(n), rng.normal(size=(n, p - 1))])
    y = X @ rng.normal(size=p) + rng.normal(size=n)
    return Dataset(y, X), Theta(rng.normal(size=p), float(rng.uniform(0.5, 2.0)))


def test_c_alpha_values():
    assert c_alpha(0) == 1.0
    assert math.isclose(c_alpha(1.0), (2 / (2 * math.pi)) ** 0.25, rel_tol=1e-15)


def test_k1_reduces_to_inverse_variance_at_zero():
    assert math.isclose(rp_constants(0.0, 2.0).K1, 0.25, rel_tol=1e-15)
    assert rp_constants(0.0, 2.0).k_obj is None


def test_vhat_matches_density_construction():
    th = Theta([0.5, -1.0], 1.3)
    for alpha in (0.1, 0.5, 1.0):
        ref = loss_oracle([2.0], [[1.0, 0.7]], th.beta, th.sigma, alpha)
        assert math.isclose(vhat(2.0, [1.0, 0.7], th, alpha), ref, rel_tol=1e-10)


def test_vhat_bounded_by_inverse_alpha():
    th = Theta([0.0], 1.0)
    assert vhat(1e6, [1.0], th, 0.5) == pytest.approx(2.0)
    assert vhat(1e6, [1.0], th, 0.5) <= 2.0


def test_vhat_rejects_zero_alpha_and_bad_input():
    th = Theta([0.0], 1.0)
    with pytest.raises(InvalidInputError):
        vhat(1.0, [1.0], th, 0.0)
    with pytest.raises(InvalidInputError):
        vhat(float("nan"), [1.0], th, 0.5)
    with pytest.raises(InvalidInputError):
        vhat(1.0, [1.0, 2.0], th, 0.5)
    with pytest.raises(InvalidInputError):
        Theta([0.0], 0.0)


def test_vhat0_is_negative_log_density():
    th = Theta([1.0], 2.0)
    assert math.isclose(vhat0(3.0, [1.0], th),
                        0.5 * math.log(2 * math.pi) + math.log(2.0) + 0.5, rel_tol=1e-15)


def test_small_alpha_approaches_log_loss():
    data, th = _instance(0)
    assert objective_h(data, th, 1e-7) == pytest.approx(objective_h(data, th, 0.0), rel=1e-5)


def test_density_integral_closed_form():
    # the constant in front of the exponential comes from this integral
    for alpha, sigma in [(0.3, 0.8), (1.0, 2.0)]:
        ref = (2 * math.pi) ** (-alpha / 2) * sigma ** (-alpha) / math.sqrt(1 + alpha)
        assert math.isclose(density_power_integral(sigma, alpha), ref, rel_tol=1e-10)


@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("alpha", [0.0, 0.2, 0.7])
def test_gradient_and_hessian_by_finite_differences(seed, alpha):
    data, th = _instance(seed)
    f = lambda v: objective_h(data, Theta.from_vector(v), alpha)
    g = gradient_h(data, th, alpha)
    np.testing.assert_allclose(g, fd_gradient(f, th.vector), rtol=1e-6, atol=1e-8)
    gfun = lambda v: gradient_h(data, Theta.from_vector(v), alpha)
    H_fd = np.column_stack([
        fd_gradient(lambda v, k=k: gfun(v)[k], th.vector) for k in range(th.vector.size)]).T
    H = hessian_h(data, th, alpha)
    np.testing.assert_allclose(H, H.T, atol=1e-12)
    np.testing.assert_allclose(H, H_fd, rtol=1e-5, atol=1e-7)


def test_dataset_validation():
    with pytest.raises(InvalidInputError):
        Dataset([1.0, 2.0], np.ones((3, 1)))
    with pytest.raises(InvalidInputError):
        Dataset([1.0, np.inf], np.ones((2, 1)))
    d = Dataset([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    assert d.X.shape == (3, 1)
    with pytest.raises(ValueError):
        d.y[0] = 5.0


def test_model_spec_design_and_label():
    X = np.arange(12.0).reshape(4, 3)
    m = ModelSpec((0, 2))
    D = m.design(X)
    assert D.shape == (4, 3)
    np.testing.assert_array_equal(D[:, 0], 1.0)
    np.testing.assert_array_equal(D[:, 2], X[:, 2])
    assert m.label == "(X1,X3)"
    assert m.n_params == 3
    with pytest.raises(InvalidInputError):
        ModelSpec((0, 0))
    with pytest.raises(InvalidInputError):
        ModelSpec((), include_intercept=False)
    with pytest.raises(InvalidInputError):
        ModelSpec((5,)).design(X)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), alpha=st.floats(0.01, 1.5))
def test_objective_matches_oracle(seed, alpha):
    data, th = _instance(seed, n=8, p=2)
    ref = loss_oracle(data.y, data.X, th.beta, th.sigma, alpha)
    assert objective_h(data, th, alpha) == pytest.approx(ref, rel=1e-9, abs=1e-12)
