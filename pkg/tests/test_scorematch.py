"""스코어 매칭 목적함수/기울기 테스트"""
import math

import numpy as np
import pytest

from errors import DomainError
from models.parameters import Location, ThetaMatrix
from models.weights import LOG_WEIGHT, WeightFunction, get_weight
from services.conversions import lambda_to_theta, theta_to_lambda
from services.density import log_density_generalized
from services.scorematch import (
    as_batch,
    batch_stats,
    curvature_residual,
    gradient,
    model_score,
    objective_o,
    objective_sum,
    per_sample_objective,
    sample_stats,
)

E = math.e


def _symmetric(gen, d, scale=1.0):
    a = gen.standard_normal((d, d)) * scale
    return 0.5 * (a + a.T)


def test_log_weight_derivative_matches_finite_difference():
    x = np.array([0.3, 1.0, 2.5, 40.0])
    h = 1e-6
    numeric = (LOG_WEIGHT.eval(x + h) - LOG_WEIGHT.eval(x - h)) / (2 * h)
    np.testing.assert_allclose(LOG_WEIGHT.deriv(x), numeric, rtol=1e-7)


def test_get_weight_unknown_name():
    from errors import ConfigError

    with pytest.raises(ConfigError):
        get_weight("sqrt")


def test_sample_stats_at_ones_and_e():
    s = sample_stats([1.0, 1.0])
    np.testing.assert_array_equal(s.f1, [0.0, 0.0])
    np.testing.assert_array_equal(s.f2, [0.0, 0.0])
    np.testing.assert_array_equal(s.fdiag, [0.0, 0.0])

    s = sample_stats([E, E, E])
    np.testing.assert_allclose(s.f1, [1.0, 1.0, 1.0], rtol=1e-15)
    np.testing.assert_allclose(s.f2, [6.0, 6.0, 6.0], rtol=1e-15)
    np.testing.assert_allclose(s.fdiag, [2.0, 2.0, 2.0], rtol=1e-15)


def test_sample_stats_custom_weight():
    w = WeightFunction(name="ratio", eval=lambda x: x / (1.0 + x), deriv=lambda x: 1.0 / (1.0 + x) ** 2)
    x = np.array([0.5, 3.0])
    s = sample_stats(x, w)
    wx = x / (1.0 + x)
    np.testing.assert_allclose(s.f1, wx)
    np.testing.assert_allclose(s.f2, 2 * wx**2 + 4 * x * wx / (1.0 + x) ** 2)
    np.testing.assert_allclose(s.fdiag, 2 * wx**2)


def test_sample_stats_rejects_non_positive():
    with pytest.raises(DomainError):
        sample_stats([1.0, -2.0])


def test_model_score_zero_parameters():
    x = np.array([0.5, 2.0, 4.0])
    score = model_score(x, Location.zeros(3), ThetaMatrix(np.zeros((3, 3))))
    np.testing.assert_allclose(score, -1.0 / x, rtol=1e-15)


def test_model_score_at_ones(gen, random_mu, random_theta):
    mu, theta = random_mu(4, gen), random_theta(4, gen)
    np.testing.assert_allclose(model_score(np.ones(4), mu, theta), mu.entries - 1.0, rtol=0, atol=1e-15)


def test_model_score_matches_density_gradient(gen, random_mu, random_theta):
    mu, theta = random_mu(5, gen), random_theta(5, gen)
    for _ in range(5):
        x = np.exp(0.5 * gen.standard_normal(5))
        score = model_score(x, mu, theta)
        numeric = np.empty(5)
        for j in range(5):
            h = 1e-6 * x[j]
            up, down = x.copy(), x.copy()
            up[j] += h
            down[j] -= h
            numeric[j] = (log_density_generalized(up, mu, theta) - log_density_generalized(down, mu, theta)) / (2 * h)
        np.testing.assert_allclose(score, numeric, rtol=1e-6, atol=1e-8)


def test_objective_zero_at_mu_one_theta_zero(gen):
    x = np.exp(gen.standard_normal(4))
    assert objective_o(np.ones(4), np.zeros((4, 4)), sample_stats(x)) == 0.0


def test_objective_at_zero_parameters(gen):
    x = np.exp(gen.standard_normal(4))
    z = np.log(x)
    expected = -np.sum(z**2 + 4.0 * z)
    assert objective_o(np.zeros(4), np.zeros((4, 4)), sample_stats(x)) == pytest.approx(expected, rel=1e-13)


def test_objective_matches_lambda_form(gen, random_lambda, random_mu):
    d = 4
    lam = random_lambda(d, gen)
    mu = random_mu(d, gen)
    theta = lambda_to_theta(lam).entries
    x = np.exp(gen.standard_normal(d))
    s = sample_stats(x)
    z = s.logx
    expected = 0.0
    for j in range(d):
        # (Θz)_j = Σ_k Λ_{jk∨kj}(z_k − z_j)
        coupling = sum(
            (lam.entries[min(j, k), max(j, k)]) * (z[k] - z[j]) for k in range(d) if k != j
        )
        r = mu.entries[j] - 1.0 - coupling
        expected += (r * s.f1[j]) ** 2 + r * s.f2[j] - theta[j, j] * s.fdiag[j]
    assert objective_o(mu, lambda_to_theta(lam), s) == pytest.approx(expected, rel=1e-12, abs=1e-12)


def test_objective_sum_reductions(gen, random_mu, random_theta):
    mu, theta = random_mu(3, gen), random_theta(3, gen)
    items = [sample_stats(x) for x in np.exp(gen.standard_normal((6, 3)))]

    first = objective_o(mu, theta, items[0])
    assert objective_sum(mu, theta, items[:1]) == pytest.approx(first, rel=1e-12, abs=1e-12)
    assert objective_sum(mu, theta, [items[0]] * 4) == pytest.approx(4 * first, rel=1e-12, abs=1e-12)
    forward = objective_sum(mu, theta, items)
    backward = objective_sum(mu, theta, items[::-1])
    assert abs(forward - backward) <= 1e-10 * max(1.0, abs(forward))


def test_objective_sum_empty_batch(gen, random_mu, random_theta):
    with pytest.raises(DomainError):
        objective_sum(random_mu(3, gen), random_theta(3, gen), [])


def test_parameter_representation_does_not_change_objective(gen, random_lambda, random_mu, positive_samples):
    lam, mu = random_lambda(5, gen), random_mu(5, gen)
    batch = batch_stats(positive_samples(20, 5, gen))
    first = lambda_to_theta(lam)
    second = lambda_to_theta(theta_to_lambda(first))
    assert objective_sum(mu, first, batch) == objective_sum(mu, second, batch)


def test_per_sample_matches_single(gen, random_mu, random_theta, positive_samples):
    mu, theta = random_mu(4, gen), random_theta(4, gen)
    samples = positive_samples(5, 4, gen)
    values = per_sample_objective(mu, theta, batch_stats(samples))
    for x, value in zip(samples, values):
        assert value == pytest.approx(objective_o(mu, theta, sample_stats(x)), rel=1e-12, abs=1e-12)


def test_gradient_at_mu_one_theta_zero(gen, positive_samples):
    samples = positive_samples(8, 3, gen)
    batch = batch_stats(samples)
    grad = gradient(np.ones(3), np.zeros((3, 3)), batch)
    np.testing.assert_allclose(grad.d_mu, batch.f2.sum(axis=0), rtol=1e-13)
    raw = -batch.f2.T @ batch.logx - np.diag(batch.fdiag.sum(axis=0))
    np.testing.assert_allclose(grad.d_theta, 0.5 * (raw + raw.T), rtol=1e-13, atol=1e-13)


@pytest.mark.parametrize("d", [2, 3, 5])
def test_gradient_matches_finite_differences(d, gen, positive_samples):
    for _ in range(7):
        n = int(gen.integers(1, 12))
        batch = batch_stats(positive_samples(n, d, gen))
        mu = gen.standard_normal(d)
        theta = _symmetric(gen, d)
        grad = gradient(mu, theta, batch)
        h = 1e-4

        for j in range(d):
            step = np.zeros(d)
            step[j] = h
            numeric = (objective_sum(mu + step, theta, batch) - objective_sum(mu - step, theta, batch)) / (2 * h)
            assert grad.d_mu[j] == pytest.approx(numeric, rel=1e-5, abs=1e-6)

        for j in range(d):
            for k in range(j, d):
                step = np.zeros((d, d))
                step[j, k] += h
                if j != k:
                    step[k, j] += h
                numeric = (
                    objective_sum(mu, theta + step, batch) - objective_sum(mu, theta - step, batch)
                ) / (2 * h)
                expected = grad.d_theta[j, k] * (2.0 if j != k else 1.0)
                assert expected == pytest.approx(numeric, rel=1e-5, abs=1e-6)


def test_curvature_identity_zero_displacement(gen, positive_samples):
    batch = batch_stats(positive_samples(5, 3, gen))
    mu, theta = gen.standard_normal(3), _symmetric(gen, 3)
    assert curvature_residual(mu, theta, mu, theta, batch) == 0.0


@pytest.mark.parametrize("scale", [1.0, 100.0])
def test_curvature_identity_random(scale, gen, positive_samples):
    for _ in range(10):
        d = int(gen.integers(2, 9))
        n = int(gen.integers(1, 31))
        batch = batch_stats(positive_samples(n, d, gen))
        mu, theta = gen.standard_normal(d), _symmetric(gen, d)
        mu2, theta2 = mu + scale * gen.standard_normal(d), theta + _symmetric(gen, d, scale)
        size = 1.0 + abs(objective_sum(mu, theta, batch)) + abs(objective_sum(mu2, theta2, batch))
        assert curvature_residual(mu, theta, mu2, theta2, batch) <= 1e-10 * size


def test_objective_is_convex_along_chords(gen, positive_samples):
    batch = batch_stats(positive_samples(15, 4, gen))
    for _ in range(10):
        a = (gen.standard_normal(4), _symmetric(gen, 4))
        b = (gen.standard_normal(4), _symmetric(gen, 4))
        t = float(gen.random())
        mid = (t * a[0] + (1 - t) * b[0], t * a[1] + (1 - t) * b[1])
        lhs = objective_sum(*mid, batch)
        rhs = t * objective_sum(*a, batch) + (1 - t) * objective_sum(*b, batch)
        assert lhs <= rhs + 1e-9 * max(1.0, abs(rhs))


def test_as_batch_stacks_samples(gen):
    items = [sample_stats(x) for x in np.exp(gen.standard_normal((3, 2)))]
    batch = as_batch(items)
    assert (batch.n, batch.d) == (3, 2)
