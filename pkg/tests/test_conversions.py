"""파라미터 변환 테스트"""
import math

import numpy as np
import pytest

from errors import InvalidParameterError, SingularMatrixError
from models.parameters import LambdaUpper, ThetaMatrix
from models.variogram import CovarianceAt, Variogram
from services.conversions import (
    gamma_m_spread,
    gamma_to_sigma,
    hr_to_mu_lambda,
    lambda_to_theta,
    sigma_to_gamma,
    theta_to_gamma,
    theta_to_lambda,
)
from services.simulate import brownian_variogram, tridiagonal_theta


def test_gamma_to_sigma_two_dimensions():
    sigma = gamma_to_sigma(Variogram([[0.0, 1.0], [1.0, 0.0]]), 0)
    np.testing.assert_array_equal(sigma.entries, [[1.0]])


def test_gamma_to_sigma_brownian_d3():
    h = 1.0 / math.sqrt(3.0)
    sigma = gamma_to_sigma(brownian_variogram(3), 0)
    np.testing.assert_allclose(sigma.entries, [[h, h], [h, 2 * h]], rtol=0, atol=1e-15)


def test_sigma_to_gamma_two_dimensions():
    gamma = sigma_to_gamma(CovarianceAt(m=0, entries=[[1.0]]), 0)
    np.testing.assert_array_equal(gamma.entries, [[0.0, 1.0], [1.0, 0.0]])


@pytest.mark.parametrize("d", [2, 3, 5, 8, 12])
def test_gamma_sigma_round_trip_every_anchor(d, gen, random_variogram):
    gamma = random_variogram(d, gen)
    scale = np.max(np.abs(gamma.entries))
    for m in range(d):
        back = sigma_to_gamma(gamma_to_sigma(gamma, m), m)
        np.testing.assert_allclose(back.entries, gamma.entries, rtol=0, atol=1e-10 * scale)


def test_sigma_gamma_round_trip(gen):
    a = gen.standard_normal((4, 6))
    sigma = CovarianceAt(m=2, entries=a @ a.T + np.eye(4))
    back = gamma_to_sigma(sigma_to_gamma(sigma, 2), 2)
    np.testing.assert_allclose(back.entries, sigma.entries, rtol=0, atol=1e-12)


def test_gamma_to_sigma_rejects_bad_anchor():
    with pytest.raises(InvalidParameterError):
        gamma_to_sigma(brownian_variogram(3), 3)


@pytest.mark.parametrize(
    "entries",
    [
        [[0.0, 1.0], [2.0, 0.0]],  # 비대칭
        [[1.0, 1.0], [1.0, 0.0]],  # 대각 ≠ 0
        [[0.0, -1.0], [-1.0, 0.0]],  # 조건부 음정치 아님
    ],
)
def test_variogram_validation(entries):
    with pytest.raises(InvalidParameterError):
        Variogram(entries)


def test_hr_to_mu_lambda_two_dimensions():
    mu, lam = hr_to_mu_lambda(Variogram([[0.0, 1.0], [1.0, 0.0]]), 0)
    np.testing.assert_allclose(mu.entries, [-0.5, -0.5], rtol=0, atol=1e-15)
    assert lam.entries[0, 1] == pytest.approx(-1.0, abs=1e-15)


def test_hr_location_sums_to_minus_one(gen, random_variogram):
    gamma = random_variogram(6, gen)
    for m in range(6):
        mu, _ = hr_to_mu_lambda(gamma, m)
        assert mu.entries.sum() == pytest.approx(-1.0, abs=1e-10)


@pytest.mark.parametrize("d", [2, 5, 20])
def test_brownian_design_gives_tridiagonal_theta(d):
    gamma = brownian_variogram(d)
    truth = tridiagonal_theta(d)
    anchors = range(d) if d <= 5 else [0, d // 2, d - 1]
    for m in anchors:
        _, lam = hr_to_mu_lambda(gamma, m)
        theta = lambda_to_theta(lam)
        np.testing.assert_allclose(theta.entries, truth.entries, rtol=0, atol=1e-9 * math.sqrt(d))


def test_tridiagonal_lambda_nonzeros_d5():
    lam = theta_to_lambda(tridiagonal_theta(5))
    nonzeros = lam.nonzeros()
    assert [(j, k) for j, k, _ in nonzeros] == [(0, 1), (1, 2), (2, 3), (3, 4)]
    for _, _, value in nonzeros:
        assert value == pytest.approx(-math.sqrt(5.0), abs=1e-15)


def test_lambda_to_theta_zero_and_two_dimensions():
    np.testing.assert_array_equal(lambda_to_theta(LambdaUpper.zeros(4)).entries, np.zeros((4, 4)))
    theta = lambda_to_theta(LambdaUpper([[0.0, 2.5], [0.0, 0.0]]))
    np.testing.assert_array_equal(theta.entries, [[-2.5, 2.5], [2.5, -2.5]])


def test_lambda_to_theta_row_sums(gen, random_lambda):
    lam = random_lambda(7, gen)
    theta = lambda_to_theta(lam)
    assert np.max(np.abs(theta.entries.sum(axis=1))) < 1e-13 * max(1.0, np.max(np.abs(theta.entries)))
    np.testing.assert_array_equal(theta.entries, theta.entries.T)


def test_lambda_theta_round_trip(gen, random_lambda):
    lam = random_lambda(6, gen)
    np.testing.assert_array_equal(theta_to_lambda(lambda_to_theta(lam)).entries, lam.entries)


def test_theta_to_lambda_rejects_nonzero_row_sums():
    with pytest.raises(InvalidParameterError):
        theta_to_lambda(np.array([[1.0, 0.0], [0.0, 1.0]]))


def test_lambda_upper_rejects_lower_entries():
    with pytest.raises(InvalidParameterError):
        LambdaUpper([[0.0, 1.0], [1.0, 0.0]])


def test_gamma_theta_gamma_chain_all_anchor_pairs(gen, random_variogram):
    gamma = random_variogram(5, gen)
    scale = np.max(np.abs(gamma.entries))
    for m in range(5):
        _, lam = hr_to_mu_lambda(gamma, m)
        theta = lambda_to_theta(lam)
        for m2 in range(5):
            back = theta_to_gamma(theta, m2)
            np.testing.assert_allclose(back.entries, gamma.entries, rtol=0, atol=1e-8 * scale)


def test_theta_to_gamma_is_anchor_invariant(gen, random_theta):
    for _ in range(5):
        theta = random_theta(6, gen)
        assert gamma_m_spread(theta) < 1e-8


def test_theta_to_gamma_singular_reports_anchor():
    with pytest.raises(SingularMatrixError) as info:
        theta_to_gamma(ThetaMatrix(np.zeros((3, 3))), 1)
    assert info.value.m == 1
    assert "m=2" in info.value.detail
