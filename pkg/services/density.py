"""비정규화 로그 밀도

정규화 상수는 계산하지 않는다. 두 밀도의 차이는 x 에 대해 상수.
"""
import logging

import numpy as np
from scipy import stats

from errors import DomainError, InvalidParameterError
from models.parameters import Location, ThetaMatrix
from models.variogram import Variogram
from services.conversions import gamma_to_sigma

logger = logging.getLogger(__name__)


def safe_log(x, d: int = None) -> np.ndarray:
    """양수 좌표의 로그 (1-d 점 또는 n x d 행렬)

    Raises:
        DomainError: 양수가 아닌/비유한 좌표
        InvalidParameterError: 차원 불일치
    """
    arr = np.asarray(x, dtype=np.float64)
    if d is not None and arr.shape[-1] != d:
        raise InvalidParameterError(f"Expected {d} coordinates, got {arr.shape[-1]}")
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        logger.error(f"Rejected point with non-positive coordinate: min={np.min(arr)}")
        raise DomainError("All coordinates must be finite and strictly positive")
    return np.log(arr)


def log_density_generalized(x, mu: Location, theta: ThetaMatrix) -> float:
    """−Σ log x_j + μᵀ log x − ½ (log x)ᵀ Θ (log x)"""
    if mu.d != theta.d:
        raise InvalidParameterError(f"mu has {mu.d} entries but theta is {theta.d}x{theta.d}")
    z = safe_log(np.ravel(x), theta.d)
    return float(-z.sum() + mu.entries @ z - 0.5 * z @ theta.entries @ z)


def log_density_classical(x, gamma: Variogram, m: int) -> float:
    """−log x_m − Σ log x_j + log 𝔫(log(x_{−m}/x_m); −Γ_{−m,m}/2, Σ[m])

    m 은 0-based.
    """
    z = safe_log(np.ravel(x), gamma.d)
    sigma = gamma_to_sigma(gamma, m)
    idx = np.delete(np.arange(gamma.d), m)
    gauss = stats.multivariate_normal.logpdf(
        z[idx] - z[m], mean=-0.5 * gamma.entries[idx, m], cov=sigma.entries
    )
    return float(-z[m] - z.sum() + gauss)
