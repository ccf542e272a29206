import math

import numpy as np
import pytest

from difftest.models import ParamVector, make_builtin_model
from difftest.quasilik import (RateMatrix, _contrast_terms_generic, contrast,
                               contrast_gradient, contrast_terms,
                               make_contrast_fn, score_matrix)
from difftest.sampling import Sample, SamplingScheme, simulate


def _ou_sample(n=200, seed=5):
    ou = make_builtin_model("OU")
    sch = SamplingScheme.rapidly_increasing(n)
    return ou, simulate(ou, ou.theta0, ou.x0, sch, seed)


def test_contrast_matches_hand_formula():
    # three observations, constant sigma: H_i = 0.5[log s^2 + xbar^2/(d s^2)]
    ou = make_builtin_model("OU")
    obs = np.array([[1.0], [0.9], [1.05], [0.95]])
    sch = SamplingScheme(n=3, delta_n=0.1)
    sample = Sample(observations=obs, scheme=sch, model_name="OU", seed=0)
    theta = ParamVector([0.5, 0.5], [0.25])
    terms = contrast_terms(ou, sample, theta)
    for i in range(3):
        xl = obs[i, 0]
        xbar = obs[i + 1, 0] - xl - 0.1 * (0.5 - 0.5 * xl)
        expect = 0.5 * (math.log(0.0625) + xbar**2 / (0.1 * 0.0625))
        assert terms[i] == pytest.approx(expect, rel=1e-12)


@pytest.mark.parametrize("name", ["OU", "GBM", "CIR", "MOU"])
def test_kernel_matches_generic(name):
    model = make_builtin_model(name)
    sch = SamplingScheme.rapidly_increasing(100)
    sample = simulate(model, model.theta0, model.x0, sch, 3)
    fast = contrast_terms(model, sample, model.theta0)
    slow = _contrast_terms_generic(model, sample, model.theta0)
    assert np.allclose(fast, slow, atol=1e-12)


def test_contrast_fn_closure_agrees():
    model, sample = _ou_sample()
    fn = make_contrast_fn(model, sample)
    theta = np.array([0.4, 0.6, 0.3])
    direct = contrast(model, sample, ParamVector.from_theta(theta, 2, 1)).total
    assert fn(theta) == pytest.approx(direct, rel=1e-12)


def test_rate_matrix():
    # drift scaled by 1/(n delta), diffusion by 1/n
    rate = RateMatrix(p=2, q=1, n=100, delta_n=100 ** (-2.0 / 3.0))
    diag = rate.diagonal()
    assert diag[0] == pytest.approx(1.0 / 100 ** (1.0 / 3.0))
    assert diag[2] == pytest.approx(0.01)
    # inverse sqrt of the drift rate at n=100: sqrt(n^(1/3)) = 2.1544^... scaled
    assert 0.1 * rate.sqrt_diagonal()[0] == pytest.approx(0.1 / math.sqrt(100 ** (1 / 3)))
    assert np.allclose(rate.sqrt_diagonal() * rate.inv_sqrt_diagonal(), 1.0)


def test_gradient_small_at_minimizer():
    model, sample = _ou_sample(n=500)
    # closed-form minimizer: OLS of increments on (delta, -delta*x)
    x = sample.observations[:, 0]
    d = sample.scheme.delta_n
    a = np.column_stack([np.full(sample.n, d), -d * x[:-1]])
    coef, *_ = np.linalg.lstsq(a, np.diff(x), rcond=None)
    sig = math.sqrt(np.mean((np.diff(x) - a @ coef) ** 2) / d)
    theta_hat = ParamVector(coef, [sig])
    grad = contrast_gradient(model, sample, theta_hat)
    scale = np.abs(contrast_gradient(model, sample, model.theta0)) + 1.0
    assert np.all(np.abs(grad) / scale < 1e-3)


def test_score_matrix_symmetric_psd():
    model, sample = _ou_sample(n=300)
    sm = score_matrix(model, sample, model.theta0)
    assert np.array_equal(sm.lambda_n, sm.lambda_n.T)
    eig = np.linalg.eigvalsh(sm.normalized)
    assert np.all(eig > -1e-10)
    assert sm.normalized.shape == (3, 3)
