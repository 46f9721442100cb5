"""공용 테스트 픽스처"""
import numpy as np
import pytest

from models.parameters import LambdaUpper, Location, ThetaMatrix
from models.variogram import Variogram, zero_sum_basis
from rng import RngState


@pytest.fixture
def gen():
    """고정 시드 난수 생성기"""
    return RngState(seed=12345).generator()


@pytest.fixture
def random_variogram():
    """제곱 거리 변동도 Γ_ij = ‖a_i − a_j‖² (일반 위치의 점)"""

    def make(d: int, gen: np.random.Generator, scale: float = 1.0) -> Variogram:
        points = gen.standard_normal((d, d + 3)) * np.sqrt(scale / (d + 3))
        diff = points[:, None, :] - points[None, :, :]
        gamma = np.sum(diff**2, axis=2)
        np.fill_diagonal(gamma, 0.0)
        return Variogram(gamma)

    return make


@pytest.fixture
def random_theta():
    """행 합 0, 양의 반정치, 계수 d−1 인 Θ"""

    def make(d: int, gen: np.random.Generator) -> ThetaMatrix:
        basis = zero_sum_basis(d)
        a = gen.standard_normal((d - 1, d - 1))
        inner = a @ a.T + (d - 1) * np.eye(d - 1)
        return ThetaMatrix(basis @ inner @ basis.T)

    return make


@pytest.fixture
def random_lambda():
    def make(d: int, gen: np.random.Generator, scale: float = 1.0) -> LambdaUpper:
        return LambdaUpper(np.triu(gen.standard_normal((d, d)) * scale, k=1))

    return make


@pytest.fixture
def random_mu():
    def make(d: int, gen: np.random.Generator) -> Location:
        return Location(gen.standard_normal(d))

    return make


@pytest.fixture
def positive_samples():
    """(0,∞)^d 표본 (log 좌표가 표준 정규)"""

    def make(n: int, d: int, gen: np.random.Generator) -> np.ndarray:
        return np.exp(gen.standard_normal((n, d)))

    return make
