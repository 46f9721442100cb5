"""합성 데이터 생성 테스트"""
import math

import numpy as np
import pytest
from scipy import optimize, stats

from config import settings
from errors import DomainError, InvalidParameterError, SamplingError
from models.batch import ExceedanceBatch, row_norms
from models.variogram import Variogram
from rng import RngState
from services.simulate import (
    brownian_variogram,
    frechet_quantile,
    sample_hr_pareto,
    sample_max_stable,
    threshold_exceedances,
    tridiagonal_theta,
)


def _extremal_coefficient(gamma_12: float) -> float:
    return 2.0 * stats.norm.cdf(math.sqrt(gamma_12) / 2.0)


class TestDesign:
    def test_brownian_variogram(self):
        gamma = brownian_variogram(4)
        assert gamma.entries[0, 2] == pytest.approx(1.0, abs=1e-15)
        assert gamma.entries[1, 3] == pytest.approx(1.0, abs=1e-15)
        np.testing.assert_array_equal(np.diag(gamma.entries), np.zeros(4))

    def test_tridiagonal_theta_two_dimensions(self):
        s = math.sqrt(2.0)
        np.testing.assert_allclose(tridiagonal_theta(2).entries, [[s, -s], [-s, s]], rtol=1e-15)

    def test_tridiagonal_theta_structure(self):
        theta = tridiagonal_theta(6).entries
        assert np.max(np.abs(theta.sum(axis=1))) < 1e-12
        assert np.count_nonzero(np.triu(theta, k=1)) == 5

    def test_dimension_must_be_at_least_two(self):
        with pytest.raises(InvalidParameterError):
            brownian_variogram(1)


class TestParetoSampler:
    def test_reproducible(self):
        gamma = brownian_variogram(5)
        first = sample_hr_pareto(gamma, 300, RngState(seed=42))
        second = sample_hr_pareto(gamma, 300, RngState(seed=42))
        np.testing.assert_array_equal(first.samples, second.samples)
        other = sample_hr_pareto(gamma, 300, RngState(seed=43))
        assert not np.array_equal(first.samples, other.samples)

    @pytest.mark.parametrize("norm", ["sup", "l1"])
    def test_rows_exceed_one(self, norm):
        batch = sample_hr_pareto(brownian_variogram(4), 500, RngState(seed=1), norm=norm)
        assert batch.samples.shape == (500, 4)
        assert batch.n_u == 500 and batch.source == "exact_pareto"
        assert np.all(batch.samples > 0.0)
        assert np.all(row_norms(batch.samples, norm) > 1.0)

    def test_exceedance_probability_matches_extremal_coefficient(self):
        gamma = brownian_variogram(2)
        batch = sample_hr_pareto(gamma, 20000, RngState(seed=5))
        expected = 1.0 / _extremal_coefficient(gamma.entries[0, 1])
        assert np.mean(batch.samples[:, 0] > 1.0) == pytest.approx(expected, abs=0.015)

    @pytest.fixture(scope="class")
    def rescaled_pair(self):
        gamma = brownian_variogram(3)
        full = sample_hr_pareto(gamma, 20000, RngState(seed=8)).samples
        raised = full[np.max(full, axis=1) > 2.0] / 2.0
        reference = sample_hr_pareto(gamma, 20000, RngState(seed=9)).samples
        return np.log(raised), np.log(reference)

    @pytest.mark.parametrize("coordinate", [0, 1, 2])
    def test_scale_invariance_per_coordinate(self, rescaled_pair, coordinate):
        raised, reference = rescaled_pair
        assert stats.ks_2samp(raised[:, coordinate], reference[:, coordinate]).pvalue > 0.01

    def test_scale_invariance_of_sup_coordinate(self, rescaled_pair):
        raised, reference = rescaled_pair
        assert stats.ks_2samp(np.max(raised, axis=1), np.max(reference, axis=1)).pvalue > 0.01

    def test_rejects_bad_arguments(self):
        with pytest.raises(InvalidParameterError):
            sample_hr_pareto(brownian_variogram(3), 0, RngState(seed=1))
        with pytest.raises(InvalidParameterError):
            sample_hr_pareto(brownian_variogram(3), 10, RngState(seed=1), norm="l2")


class TestMaxStableSampler:
    def test_reproducible(self):
        gamma = brownian_variogram(4)
        first = sample_max_stable(gamma, 200, RngState(seed=3))
        second = sample_max_stable(gamma, 200, RngState(seed=3))
        np.testing.assert_array_equal(first, second)

    def test_unit_frechet_margins(self):
        z = sample_max_stable(brownian_variogram(5), 10000, RngState(seed=2024))
        assert np.all(z > 0.0)
        for j in range(5):
            result = stats.kstest(z[:, j], "invweibull", args=(1.0,))
            assert result.statistic < 0.02

    def test_bivariate_extremal_coefficient(self):
        gamma = brownian_variogram(2)
        z = sample_max_stable(gamma, 10000, RngState(seed=6))
        estimate = 1.0 / np.mean(1.0 / np.max(z, axis=1))
        assert estimate == pytest.approx(_extremal_coefficient(gamma.entries[0, 1]), abs=0.05)

    def test_near_independence(self):
        gamma = Variogram([[0.0, 50.0], [50.0, 0.0]])
        z = sample_max_stable(gamma, 10000, RngState(seed=7))
        assert 1.0 / np.mean(1.0 / np.max(z, axis=1)) > 1.9

    def test_near_complete_dependence(self):
        gamma = Variogram(1e-6 * brownian_variogram(3).entries)
        z = sample_max_stable(gamma, 2000, RngState(seed=8))
        spread = np.max(np.log(z), axis=1) - np.min(np.log(z), axis=1)
        assert np.max(spread) < 0.05

    def test_round_limit(self, monkeypatch):
        monkeypatch.setattr(settings, "MAX_PROPOSALS", 1)
        with pytest.raises(SamplingError):
            sample_max_stable(brownian_variogram(3), 1000, RngState(seed=1))


class TestThreshold:
    def test_frechet_quantile(self):
        u = frechet_quantile(0.95)
        assert u == pytest.approx(19.4957, abs=1e-4)
        root = optimize.brentq(lambda v: math.exp(-1.0 / v) - 0.95, 1.0, 100.0, xtol=1e-14)
        assert u == pytest.approx(root, rel=1e-10)

    @pytest.mark.parametrize("q", [0.0, 1.0, 1.5])
    def test_quantile_range(self, q):
        with pytest.raises(InvalidParameterError):
            frechet_quantile(q)

    def test_keeps_scaled_exceedances(self):
        u = frechet_quantile(0.9)
        raw = np.array([[1.0, 2.0], [u * 1.5, 1.0], [3.0, u * 2.0]])
        batch = threshold_exceedances(raw, 0.9)
        assert batch.n_u == 2
        assert batch.source == "max_stable_thresholded"
        np.testing.assert_allclose(batch.samples, raw[1:] / u, rtol=1e-15)

    def test_no_exceedances(self):
        with pytest.raises(DomainError):
            threshold_exceedances(np.ones((10, 3)), 0.95)

    def test_retention_brownian_d20(self):
        z = sample_max_stable(brownian_variogram(20), 3500, RngState(seed=11))
        batch = threshold_exceedances(z, 0.95)
        assert 0.10 <= batch.n_u / 3500 <= 0.17
        assert np.all(np.max(batch.samples, axis=1) > 1.0)


class TestExceedanceBatch:
    def test_rejects_rows_inside_unit_ball(self):
        with pytest.raises(DomainError):
            ExceedanceBatch(samples=np.array([[0.5, 0.5]]), n_u=1, source="file")

    def test_rejects_non_positive(self):
        with pytest.raises(DomainError):
            ExceedanceBatch(samples=np.array([[2.0, 0.0]]), n_u=1, source="file")

    def test_row_count_must_match(self):
        with pytest.raises(InvalidParameterError):
            ExceedanceBatch(samples=np.array([[2.0, 1.0]]), n_u=2, source="file")
