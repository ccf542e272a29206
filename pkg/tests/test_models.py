import numpy as np
import pytest

from difftest.errors import ConfigurationError, NumericDomainError
from difftest.models import (BETA_LOWER, ParamVector, make_builtin_model,
                             sigma_ops)


def test_param_vector_split_and_roundtrip():
    pv = ParamVector([0.5, 0.5], [0.25])
    assert pv.p == 2 and pv.q == 1
    assert np.allclose(pv.theta, [0.5, 0.5, 0.25])
    back = ParamVector.from_theta(pv.theta, 2, 1)
    assert np.array_equal(back.alpha, pv.alpha)
    assert np.array_equal(back.beta, pv.beta)


def test_param_vector_length_mismatch():
    with pytest.raises(ConfigurationError):
        ParamVector.from_theta([1.0, 2.0], 2, 1)


def test_builtin_defaults():
    ou = make_builtin_model("OU")
    assert np.allclose(ou.theta0.theta, [0.5, 0.5, 0.25])
    assert np.allclose(ou.x0, [1.0])
    cir = make_builtin_model("CIR")
    assert np.allclose(cir.theta0.theta, [0.5, 0.5, 0.125])
    mou = make_builtin_model("MOU")
    assert mou.state_dim == 2 and mou.p == 2 and mou.q == 2
    assert np.allclose(mou.theta0.theta, [1.0, 1.0, 0.3, 0.5])
    with pytest.raises(ConfigurationError):
        make_builtin_model("heston")


def test_bounds_checking():
    ou = make_builtin_model("OU")
    ou.check_bounds(ou.theta0)
    with pytest.raises(ConfigurationError):
        ou.check_bounds(ParamVector([0.5, 0.5], [0.0]))  # sigma below floor
    with pytest.raises(ConfigurationError):
        ou.check_bounds(ParamVector([0.5], [0.25]))  # wrong block sizes
    assert ou.lower[2] == BETA_LOWER


def test_ou_sigma_ops_closed_form():
    # constant diffusion sigma = 0.25: Sigma = 0.0625, Xi = 16
    ou = make_builtin_model("OU")
    so = sigma_ops(ou, [0.25], [1.7])
    assert so.sigma_mat[0, 0] == pytest.approx(0.0625)
    assert so.xi_mat[0, 0] == pytest.approx(16.0)
    assert so.log_det == pytest.approx(np.log(0.0625))


def test_gbm_cir_sigma_state_dependence():
    gbm = make_builtin_model("GBM")
    so = sigma_ops(gbm, [0.25], [2.0])
    assert so.sigma_mat[0, 0] == pytest.approx(0.25)  # (0.25*2)^2
    cir = make_builtin_model("CIR")
    so = sigma_ops(cir, [0.125], [4.0])
    assert so.sigma_mat[0, 0] == pytest.approx(0.125**2 * 4.0)


def test_cir_diffusion_truncates_negative_state():
    cir = make_builtin_model("CIR")
    val = cir.diffusion(np.array([0.125]), np.array([-0.3]))
    assert val[0][0] == 0.0


def test_sigma_ops_rejects_degenerate():
    cir = make_builtin_model("CIR")
    with pytest.raises(NumericDomainError):
        sigma_ops(cir, [0.125], [0.0])  # Sigma = 0 at the boundary state


def test_mou_sigma_ops_diagonal():
    mou = make_builtin_model("MOU")
    so = sigma_ops(mou, [0.3, 0.5], [1.0, 1.0])
    assert np.allclose(so.sigma_mat, np.diag([0.09, 0.25]))
    assert np.allclose(so.xi_mat, np.diag([1 / 0.09, 4.0]))
    assert so.log_det == pytest.approx(np.log(0.09) + np.log(0.25))


def test_sigma_ops_inverse_property():
    rng = np.random.default_rng(0)
    mou = make_builtin_model("MOU")
    for _ in range(25):
        beta = rng.uniform(0.05, 2.0, size=2)
        x = rng.normal(size=2)
        so = sigma_ops(mou, beta, x)
        assert np.allclose(so.sigma_mat @ so.xi_mat, np.eye(2), atol=1e-10)
