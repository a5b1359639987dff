"""Tests for the semi-implicit polar particle update."""

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from polarpic.ensemble import ParticleEnsemble
from polarpic.errors import IntegrationInstabilityError
from polarpic.geometry import AnnulusDomain, TWO_PI
from polarpic.pusher import push


def single(r, theta, v_r, v_theta):
    return ParticleEnsemble(np.array([r]), np.array([theta]),
                            np.array([v_r]), np.array([v_theta]))


@pytest.fixture
def domain():
    return AnnulusDomain()


WIDE = AnnulusDomain(0.5, 50.0)  # keeps hand examples clear of the walls


def test_hand_worked_step():
    # h=1, E=0, B=0.25, state (r, theta, v_r, v_theta) = (4, 0, 1, 1):
    # a = 1 * (0.25 + 1/4) = 0.5
    # v_theta' = (1 - 0.5 * 1) / (1 + 0.25) = 0.4
    # v_r' = 1 + 0.5 * 0.4 = 1.2
    # r' = 4 + 1.2 = 5.2, theta' = 0 + 0.4 / 5.2
    out = push(single(4.0, 0.0, 1.0, 1.0), 0.0, 0.0, 0.25, 1.0, WIDE)
    assert out.v_theta[0] == pytest.approx(0.4, abs=1e-15)
    assert out.v_r[0] == pytest.approx(1.2, abs=1e-15)
    assert out.r[0] == pytest.approx(5.2, abs=1e-15)
    assert out.theta[0] == pytest.approx(0.4 / 5.2, abs=1e-15)


def test_free_flight_without_fields():
    # B = 0 and E = 0 gives a = h v_theta / r and pure inertial motion; the
    # velocity rotation then matches transport of a straight line in polars
    out = push(single(6.0, 0.0, 0.0, 1.0), 0.0, 0.0, 0.0, 1e-4, WIDE)
    # angular momentum r * v_theta of straight-line motion is conserved
    assert out.r[0] * out.v_theta[0] == pytest.approx(6.0, rel=1e-8)


def test_update_order_identity(domain):
    # theta advances with the new v_theta / new r, exactly
    rng = np.random.default_rng(6)
    n = 200
    ens = ParticleEnsemble(rng.uniform(5.5, 7.5, n),
                           rng.uniform(0.0, TWO_PI, n),
                           0.1 * rng.standard_normal(n),
                           0.1 * rng.standard_normal(n))
    h = 0.05
    out = push(ens, 0.01, -0.02, 3.0, h, domain)
    # reconstruct pre-wrap theta; no particle reflects at this step size
    predicted = np.mod(ens.theta + h * out.v_theta / out.r, TWO_PI)
    np.testing.assert_array_equal(out.theta, predicted)


def test_velocity_contraction_exact():
    # without E the scheme contracts speed by exactly 1 / sqrt(1 + a^2)
    r, v_r, v_theta, b, h = 6.0, 0.7, -0.3, 2.0, 0.1
    a = h * (b + v_theta / r)
    out = push(single(r, 1.0, v_r, v_theta), 0.0, 0.0, b, h, WIDE)
    before = v_r ** 2 + v_theta ** 2
    after = out.v_r[0] ** 2 + out.v_theta[0] ** 2
    assert after * (1.0 + a * a) == pytest.approx(before, rel=1e-14)


def test_first_order_against_ode_oracle(domain):
    # global error against a tight solve_ivp reference halves with h
    b = 2.0
    e_r, e_theta = 0.3, -0.1

    def rhs(_, y):
        r, theta, v_r, v_theta = y
        w = b + v_theta / r
        return [v_r, v_theta / r, e_r + v_theta * w, e_theta - v_r * w]

    y0 = [6.5, 1.0, 0.2, 0.1]
    t_f = 0.5
    ref = solve_ivp(rhs, (0.0, t_f), y0, rtol=1e-12, atol=1e-12).y[:, -1]

    errs = []
    for n_t in (256, 512, 1024):
        h = t_f / n_t
        ens = single(*y0)
        for _ in range(n_t):
            ens = push(ens, e_r, e_theta, b, h, domain)
        state = np.array([ens.r[0], ens.theta[0], ens.v_r[0], ens.v_theta[0]])
        errs.append(np.abs(state - ref).max())
    ratios = [errs[i] / errs[i + 1] for i in range(2)]
    assert all(1.8 < q < 2.2 for q in ratios), ratios


def test_scalar_fields_broadcast(domain):
    ens = ParticleEnsemble(np.array([6.0, 7.0]), np.array([0.0, 1.0]),
                           np.array([0.1, 0.2]), np.array([0.3, 0.4]))
    out_scalar = push(ens, 0.5, -0.25, 10.0, 0.01, domain)
    out_array = push(ens, np.full(2, 0.5), np.full(2, -0.25),
                     np.full(2, 10.0), 0.01, domain)
    np.testing.assert_array_equal(out_scalar.r, out_array.r)
    np.testing.assert_array_equal(out_scalar.v_theta, out_array.v_theta)


def test_input_not_modified(domain):
    ens = single(6.5, 0.0, 0.5, 0.5)
    push(ens, 1.0, 1.0, 1.0, 0.1, domain)
    assert ens.r[0] == 6.5 and ens.v_r[0] == 0.5


def test_nonpositive_step_raises(domain):
    with pytest.raises(ValueError):
        push(single(6.5, 0.0, 0.0, 0.0), 0.0, 0.0, 0.0, 0.0, domain)
    with pytest.raises(ValueError):
        push(single(6.5, 0.0, 0.0, 0.0), 0.0, 0.0, 0.0, -0.1, domain)


def test_overshoot_raises(domain):
    # a huge kick throws the particle far beyond the annulus in one step
    with pytest.raises(IntegrationInstabilityError):
        push(single(6.5, 0.0, 0.0, 0.0), 500.0, 0.0, 0.0, 1.0, domain)
