"""일반화 모델 파라미터 (μ, Λ, Θ)"""
from dataclasses import dataclass

import numpy as np

from config import settings
from errors import InvalidParameterError
from models.base import frozen_array, sup_norm


@dataclass(frozen=True)
class Location:
    """위치 벡터 μ ∈ ℝ^d"""
    entries: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "entries", frozen_array(self.entries, 1, "Location"))

    @property
    def d(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def zeros(cls, d: int) -> "Location":
        return cls(np.zeros(d))


@dataclass(frozen=True)
class LambdaUpper:
    """순상삼각 행렬 Λ (j >= k 이면 Λ_jk = 0)"""
    entries: np.ndarray

    def __post_init__(self):
        lam = frozen_array(self.entries, 2, "LambdaUpper")
        if np.any(np.tril(lam) != 0.0):
            raise InvalidParameterError("LambdaUpper: entries on or below the diagonal must be zero")
        object.__setattr__(self, "entries", lam)

    @property
    def d(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def zeros(cls, d: int) -> "LambdaUpper":
        return cls(np.zeros((d, d)))

    def nonzeros(self) -> list[tuple[int, int, float]]:
        """0이 아닌 (j, k, 값) 목록 (0-based)"""
        rows, cols = np.nonzero(self.entries)
        return [(int(j), int(k), float(self.entries[j, k])) for j, k in zip(rows, cols)]


@dataclass(frozen=True)
class ThetaMatrix:
    """상호작용 행렬 Θ (대칭, 행/열 합 0)"""
    entries: np.ndarray

    def __post_init__(self):
        theta = frozen_array(self.entries, 2, "ThetaMatrix")
        scale = max(1.0, sup_norm(theta))
        if not np.allclose(theta, theta.T, rtol=0.0, atol=1e-12 * scale):
            raise InvalidParameterError("ThetaMatrix: matrix is not symmetric")
        worst = sup_norm(theta.sum(axis=1))
        if worst > settings.ROWSUM_TOL * scale:
            raise InvalidParameterError(f"ThetaMatrix: row sums must vanish (max |row sum| = {worst:.3e})")
        object.__setattr__(self, "entries", theta)

    @property
    def d(self) -> int:
        return self.entries.shape[0]
