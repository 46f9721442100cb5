"""파라미터 표현 간 변환

Γ ↔ Σ[m], Γ → (μ, Λ), Λ ↔ Θ, Θ → Γ.
앵커 인덱스 m 은 0-based (문서/CLI 에서는 1-based).
"""
import logging

import numpy as np
from scipy import linalg

from config import settings
from errors import InvalidParameterError, SingularMatrixError
from models.parameters import LambdaUpper, Location, ThetaMatrix
from models.variogram import CovarianceAt, Variogram

logger = logging.getLogger(__name__)


def _check_anchor(m: int, d: int) -> None:
    if not 0 <= m < d:
        raise InvalidParameterError(f"Anchor m={m + 1} outside 1..{d}")


def _others(m: int, d: int) -> np.ndarray:
    """m 을 제외한 인덱스 (Σ[m] 의 행/열 순서)"""
    return np.delete(np.arange(d), m)


def gamma_to_sigma(gamma: Variogram, m: int) -> CovarianceAt:
    """Γ → Σ[m]

    Σ_kl = (Γ_km + Γ_ml − Γ_kl)/2, k, l 는 m 을 건너뛴 인덱스.

    Raises:
        InvalidParameterError: 결과가 양정치가 아닌 경우 (잘못된 변동도)
    """
    d = gamma.d
    _check_anchor(m, d)
    g = gamma.entries
    idx = _others(m, d)
    sigma = 0.5 * (g[idx, m][:, None] + g[m, idx][None, :] - g[np.ix_(idx, idx)])
    return CovarianceAt(m=m, entries=sigma)


def sigma_to_gamma(sigma: CovarianceAt, m: int) -> Variogram:
    """Σ[m] → Γ

    Γ_jm = Σ_jj (j ≠ m), Γ_ab = Σ_aa + Σ_bb − 2Σ_ab (a, b ≠ m).
    """
    d = sigma.d
    _check_anchor(m, d)
    s = sigma.entries
    diag = np.diag(s)
    idx = _others(m, d)

    gamma = np.zeros((d, d))
    gamma[np.ix_(idx, idx)] = diag[:, None] + diag[None, :] - 2.0 * s
    gamma[idx, m] = diag
    gamma[m, idx] = diag
    np.fill_diagonal(gamma, 0.0)
    return Variogram(gamma)


def _embed_precision(precision: np.ndarray, m: int) -> np.ndarray:
    """(d-1)x(d-1) 정밀도 행렬을 행/열 합 0 인 d x d 행렬로 확장"""
    d = precision.shape[0] + 1
    idx = _others(m, d)
    col = precision.sum(axis=1)
    theta = np.zeros((d, d))
    theta[np.ix_(idx, idx)] = precision
    theta[idx, m] = -col
    theta[m, idx] = -col
    theta[m, m] = col.sum()
    return theta


def _inverse_spd(matrix: np.ndarray, m: int, what: str) -> np.ndarray:
    cond = np.linalg.cond(matrix)
    if not np.isfinite(cond) or cond > settings.COND_LIMIT:
        raise SingularMatrixError(
            f"{what} is singular or ill-conditioned at m={m + 1} (condition number {cond:.3e})", m=m
        )
    try:
        factor = linalg.cho_factor(matrix, lower=True)
    except linalg.LinAlgError:
        raise SingularMatrixError(f"{what} is not positive definite at m={m + 1}", m=m)
    inverse = linalg.cho_solve(factor, np.eye(matrix.shape[0]))
    return 0.5 * (inverse + inverse.T)


def hr_to_mu_lambda(gamma: Variogram, m: int) -> tuple[Location, LambdaUpper]:
    """Γ → (μ, Λ)

    μ_j = −(Σ⁻¹Γ_{−m,m})_j/2 (j ≠ m), μ_m = Σ_k (Σ⁻¹Γ_{−m,m})_k/2 − 1.
    Λ 는 Σ⁻¹ 를 행/열 합 0 으로 확장한 행렬의 순상삼각 부분.
    """
    sigma = gamma_to_sigma(gamma, m)
    precision = _inverse_spd(sigma.entries, m, "Covariance Σ[m]")
    d = gamma.d
    idx = _others(m, d)

    weighted = precision @ gamma.entries[idx, m]
    mu = np.empty(d)
    mu[idx] = -0.5 * weighted
    mu[m] = 0.5 * weighted.sum() - 1.0

    theta = _embed_precision(precision, m)
    return Location(mu), LambdaUpper(np.triu(theta, k=1))


def lambda_to_theta(lam: LambdaUpper) -> ThetaMatrix:
    """Θ = Λ + Λᵀ − diag(Λ𝟏 + Λᵀ𝟏)"""
    a = lam.entries
    sym = a + a.T
    theta = sym - np.diag(sym.sum(axis=1))
    return ThetaMatrix(theta)


def theta_to_lambda(theta) -> LambdaUpper:
    """Θ → Λ (Λ_jk = Θ_jk, j < k)

    Raises:
        InvalidParameterError: 행 합이 0 이 아닌 경우
    """
    if not isinstance(theta, ThetaMatrix):
        theta = ThetaMatrix(theta)
    return LambdaUpper(np.triu(theta.entries, k=1))


def theta_to_gamma(theta: ThetaMatrix, m: int) -> Variogram:
    """Θ → Γ̂ (Σ[m] = (Θ_{−m,−m})⁻¹ 경유)

    Raises:
        SingularMatrixError: Θ_{−m,−m} 가 특이/비양정치인 경우 (실패한 m 포함)
    """
    d = theta.d
    _check_anchor(m, d)
    idx = _others(m, d)
    sub = np.array(theta.entries[np.ix_(idx, idx)])
    sigma = _inverse_spd(sub, m, "Θ with row/column m removed")
    try:
        return sigma_to_gamma(CovarianceAt(m=m, entries=sigma), m)
    except InvalidParameterError as e:
        raise SingularMatrixError(f"Degenerate estimate at m={m + 1}: {e.detail}", m=m)


def gamma_m_spread(theta: ThetaMatrix) -> float:
    """max_m ‖Γ̂(m) − Γ̂(1)‖_∞ (m 불변성 진단)"""
    base = theta_to_gamma(theta, 0).entries
    spread = 0.0
    for m in range(1, theta.d):
        spread = max(spread, float(np.max(np.abs(theta_to_gamma(theta, m).entries - base))))
    return spread
