import numpy as np
import pytest

from difftest.errors import ConfigurationError, SimulationBlowupError
from difftest.models import Model, ParamVector, make_builtin_model
from difftest.sampling import (SamplingScheme, read_sample_csv, simulate,
                               validate_conditional_moments, write_sample_csv)


def test_rapidly_increasing_scheme():
    sch = SamplingScheme.rapidly_increasing(100)
    assert sch.delta_n == pytest.approx(100 ** (-2.0 / 3.0))
    assert sch.horizon == pytest.approx(100 ** (1.0 / 3.0))
    assert sch.sub_delta == pytest.approx(sch.delta_n / 10)


def test_scheme_validation():
    with pytest.raises(ConfigurationError):
        SamplingScheme(n=0, delta_n=0.1)
    with pytest.raises(ConfigurationError):
        SamplingScheme(n=10, delta_n=-1.0)


def test_simulate_shape_and_start():
    ou = make_builtin_model("OU")
    sch = SamplingScheme.rapidly_increasing(200)
    s = simulate(ou, ou.theta0, ou.x0, sch, 1)
    assert s.observations.shape == (201, 1)
    assert s.observations[0, 0] == 1.0
    assert s.n == 200
    mou = make_builtin_model("MOU")
    s2 = simulate(mou, mou.theta0, mou.x0, sch, 1)
    assert s2.observations.shape == (201, 2)


def test_simulate_deterministic():
    ou = make_builtin_model("OU")
    sch = SamplingScheme.rapidly_increasing(100)
    a = simulate(ou, ou.theta0, ou.x0, sch, 7)
    b = simulate(ou, ou.theta0, ou.x0, sch, 7)
    assert np.array_equal(a.observations, b.observations)
    c = simulate(ou, ou.theta0, ou.x0, sch, 8)
    assert not np.array_equal(a.observations, c.observations)


def test_burn_in_moves_start():
    ou = make_builtin_model("OU")
    sch = SamplingScheme.rapidly_increasing(100)
    s = simulate(ou, ou.theta0, ou.x0, sch, 7, burn_in=50)
    assert s.observations[0, 0] != 1.0


def test_blowup_detected():
    # super-linear drift explodes in finite time
    def drift(alpha, x):
        return np.array([alpha[0] * x[0] ** 3])

    def diffusion(beta, x):
        return np.array([[beta[0]]])

    inf = np.inf
    model = Model(name="cubic", state_dim=1, noise_dim=1, p=1, q=1,
                  drift=drift, diffusion=diffusion,
                  lower=np.array([-inf, 1e-6]), upper=np.array([inf, inf]))
    sch = SamplingScheme(n=200, delta_n=0.05)
    with pytest.raises(SimulationBlowupError):
        simulate(model, ParamVector([5.0], [0.1]), [2.0], sch, 0)


def test_conditional_moment_validation():
    # one-step moments: E xbar = O(delta^2), E xbar^2 = delta Sigma + O(delta^2),
    # E xbar^4 close to 3 sigma^4 delta^2 for constant diffusion
    ou = make_builtin_model("OU")
    sch = SamplingScheme.rapidly_increasing(500)
    rep = validate_conditional_moments(ou, ou.theta0, sch, reps=40000, seed=2)
    assert rep.second_moment_error_ratio < 1.0
    assert rep.fourth_moment / sch.delta_n**2 == pytest.approx(3 * 0.25**4, rel=0.1)
    with pytest.raises(ConfigurationError):
        validate_conditional_moments(ou, ou.theta0, sch, reps=10, seed=2)


def test_csv_roundtrip(tmp_path):
    mou = make_builtin_model("MOU")
    sch = SamplingScheme.rapidly_increasing(50)
    s = simulate(mou, mou.theta0, mou.x0, sch, 3)
    path = tmp_path / "sample.csv"
    write_sample_csv(s, path)
    header = path.read_text().splitlines()[0]
    assert header == "t,x1,x2"
    back = read_sample_csv(path, model_name="MOU")
    assert back.n == s.n
    assert np.allclose(back.observations, s.observations)
    assert back.scheme.delta_n == pytest.approx(sch.delta_n)


def test_csv_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n1,2\n3,4\n")
    with pytest.raises(ConfigurationError):
        read_sample_csv(path)
