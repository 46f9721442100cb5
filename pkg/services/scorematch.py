"""가중 스코어 매칭 목적함수

표본별 목적함수 𝔬(μ, Θ; x) 는 r = μ − 𝟏 − Θ log x 에 대해
‖r ⊗ f1‖² + rᵀ f2 − Σ_j Θ_jj F_j 이다. 데이터 밀도에만 의존하는 상수항은 버린다.
"""
import logging
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from errors import DomainError, InvalidParameterError
from models.parameters import Location, ThetaMatrix
from models.weights import LOG_WEIGHT, WeightFunction
from services.density import safe_log

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SampleStats:
    """표본 1개의 데이터 함수 (log x, f1, f2, F 의 대각)"""
    logx: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    fdiag: np.ndarray


@dataclass(frozen=True)
class BatchStats:
    """n 개 표본의 데이터 함수 (각 필드 n x d)"""
    logx: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    fdiag: np.ndarray

    @property
    def n(self) -> int:
        return self.logx.shape[0]

    @property
    def d(self) -> int:
        return self.logx.shape[1]


@dataclass(frozen=True)
class Gradient:
    """목적함수의 (μ, Θ) 기울기 (Θ 부분은 대칭화)"""
    d_mu: np.ndarray
    d_theta: np.ndarray

    def __post_init__(self):
        scale = max(1.0, float(np.max(np.abs(self.d_theta))))
        if not np.allclose(self.d_theta, self.d_theta.T, rtol=0.0, atol=1e-12 * scale):
            raise InvalidParameterError("Gradient: d_theta is not symmetric")

    def inner(self, d_mu: np.ndarray, d_theta: np.ndarray) -> float:
        """⟨∇, (Δμ, ΔΘ)⟩"""
        return float(self.d_mu @ d_mu + np.sum(self.d_theta * d_theta))


def _data_functions(x: np.ndarray, w: WeightFunction) -> tuple:
    logx = safe_log(x)
    wx = w.eval(x)
    f1 = wx
    f2 = 2.0 * wx**2 + 4.0 * x * w.deriv(x) * wx
    fdiag = 2.0 * wx**2
    return logx, f1, f2, fdiag


def sample_stats(x, w: WeightFunction = LOG_WEIGHT) -> SampleStats:
    """표본 1개의 f1, f2, F

    Raises:
        DomainError: 양수가 아닌 좌표
    """
    arr = np.ravel(np.asarray(x, dtype=np.float64))
    return SampleStats(*_data_functions(arr, w))


def batch_stats(samples, w: WeightFunction = LOG_WEIGHT) -> BatchStats:
    """n x d 표본 행렬의 데이터 함수 (벡터화)"""
    arr = np.asarray(samples, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise DomainError(f"Expected a non-empty n x d sample matrix, got shape {arr.shape}")
    return BatchStats(*_data_functions(arr, w))


def as_batch(batch: Union[BatchStats, Sequence[SampleStats]]) -> BatchStats:
    if isinstance(batch, BatchStats):
        if batch.n == 0:
            raise DomainError("Empty batch")
        return batch
    items = list(batch)
    if not items:
        raise DomainError("Empty batch")
    return BatchStats(
        logx=np.stack([s.logx for s in items]),
        f1=np.stack([s.f1 for s in items]),
        f2=np.stack([s.f2 for s in items]),
        fdiag=np.stack([s.fdiag for s in items]),
    )


def _mu_array(mu) -> np.ndarray:
    return mu.entries if isinstance(mu, Location) else np.asarray(mu, dtype=np.float64)


def _theta_array(theta) -> np.ndarray:
    # 기울기 검사 등에서 행 합 제약 없는 대칭 행렬도 허용
    return theta.entries if isinstance(theta, ThetaMatrix) else np.asarray(theta, dtype=np.float64)


def model_score(x, mu: Location, theta: ThetaMatrix) -> np.ndarray:
    """모델 스코어 ∇ₓ log p: s_j = (μ_j − 1 − (Θ log x)_j)/x_j"""
    arr = np.ravel(np.asarray(x, dtype=np.float64))
    z = safe_log(arr, theta.d)
    return (_mu_array(mu) - 1.0 - theta.entries @ z) / arr


def objective_o(mu, theta, stats: SampleStats) -> float:
    """표본 1개의 목적함수 𝔬"""
    t = _theta_array(theta)
    r = _mu_array(mu) - 1.0 - t @ stats.logx
    return float(np.sum((r * stats.f1) ** 2) + r @ stats.f2 - np.diag(t) @ stats.fdiag)


def _residuals(mu: np.ndarray, theta: np.ndarray, batch: BatchStats) -> np.ndarray:
    # 행 i: μ − 𝟏 − Θ z_i  (Θ 대칭)
    return (mu - 1.0)[None, :] - batch.logx @ theta.T


def per_sample_objective(mu, theta, batch) -> np.ndarray:
    b = as_batch(batch)
    t = _theta_array(theta)
    r = _residuals(_mu_array(mu), t, b)
    return np.sum((r * b.f1) ** 2, axis=1) + np.sum(r * b.f2, axis=1) - b.fdiag @ np.diag(t)


def objective_sum(mu, theta, batch) -> float:
    """Σᵢ 𝔬(μ, Θ; xᵢ)

    Raises:
        DomainError: 빈 배치
    """
    # fsum: 순서와 무관하게 정확히 반올림된 합
    return math.fsum(per_sample_objective(mu, theta, batch))


def gradient(mu, theta, batch) -> Gradient:
    """objective_sum 의 정확한 기울기

    ∂/∂Θ_jk = Σᵢ (−2 r_j f1_j² z_k − z_k f2_j) − 𝟙{j=k} Σᵢ F_j, 이후 (G + Gᵀ)/2.
    ∂/∂μ_j = Σᵢ (2 r_j f1_j² + f2_j).
    """
    b = as_batch(batch)
    t = _theta_array(theta)
    r = _residuals(_mu_array(mu), t, b)
    coef = 2.0 * r * b.f1**2 + b.f2
    d_mu = coef.sum(axis=0)
    raw = -coef.T @ b.logx - np.diag(b.fdiag.sum(axis=0))
    return Gradient(d_mu=d_mu, d_theta=0.5 * (raw + raw.T))


def curvature_residual(mu, theta, mu2, theta2, batch) -> float:
    """|Σ𝔬(μ′,Θ′) − Σ𝔬(μ,Θ) − ⟨∇, Δ⟩ − Σᵢ‖(Δμ − ΔΘ zᵢ) ⊗ f1ᵢ‖²|

    목적함수가 (μ, Θ) 에 대해 이차식이므로 항상 0 (반올림 오차 제외).
    """
    b = as_batch(batch)
    m1, t1 = _mu_array(mu), _theta_array(theta)
    dm = _mu_array(mu2) - m1
    dt = _theta_array(theta2) - t1
    grad = gradient(m1, t1, b)
    shift = (dm[None, :] - b.logx @ dt.T) * b.f1
    curvature = math.fsum(np.sum(shift**2, axis=1))
    diff = objective_sum(mu2, theta2, b) - objective_sum(m1, t1, b)
    return abs(diff - grad.inner(dm, dt) - curvature)
