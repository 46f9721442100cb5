"""변동도(variogram) 및 공분산 모델"""
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from config import settings
from errors import InvalidParameterError
from models.base import frozen_array, sup_norm


def zero_sum_basis(d: int) -> np.ndarray:
    """합이 0인 부분공간의 정규직교 기저 (d x (d-1))"""
    return linalg.null_space(np.ones((1, d)))


@dataclass(frozen=True)
class Variogram:
    """Hüsler–Reiss 변동도 행렬 Γ

    대칭, 대각 0, 조건부 음정치 (합이 0인 c ≠ 0 에 대해 cᵀΓc < 0).
    """
    entries: np.ndarray

    def __post_init__(self):
        g = frozen_array(self.entries, 2, "Variogram")
        d = g.shape[0]
        if d < 2:
            raise InvalidParameterError(f"Variogram: dimension must be >= 2, got {d}")
        scale = max(1.0, sup_norm(g))
        if not np.allclose(g, g.T, rtol=0.0, atol=1e-12 * scale):
            raise InvalidParameterError("Variogram: matrix is not symmetric")
        if np.any(np.diag(g) != 0.0):
            raise InvalidParameterError("Variogram: diagonal must be zero")
        # 정확한 대칭으로 맞춤
        sym = 0.5 * (g + g.T)
        sym.setflags(write=False)
        object.__setattr__(self, "entries", sym)

        basis = zero_sum_basis(d)
        top = float(np.max(linalg.eigvalsh(basis.T @ sym @ basis)))
        if not top < -settings.CND_TOL * sup_norm(sym):
            raise InvalidParameterError(
                f"Variogram: not conditionally negative definite (largest projected eigenvalue {top:.3e})"
            )

    @property
    def d(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class CovarianceAt:
    """앵커 m 기준 공분산 Σ[m] ((d-1) x (d-1), 대칭 양정치)

    m 은 내부적으로 0-based.
    """
    m: int
    entries: np.ndarray

    def __post_init__(self):
        s = frozen_array(self.entries, 2, "CovarianceAt")
        if s.shape[0] < 1:
            raise InvalidParameterError("CovarianceAt: empty matrix")
        scale = max(1.0, sup_norm(s))
        if not np.allclose(s, s.T, rtol=0.0, atol=1e-12 * scale):
            raise InvalidParameterError("CovarianceAt: matrix is not symmetric")
        sym = 0.5 * (s + s.T)
        sym.setflags(write=False)
        object.__setattr__(self, "entries", sym)

        d = sym.shape[0] + 1
        if not 0 <= self.m < d:
            raise InvalidParameterError(f"CovarianceAt: anchor m={self.m + 1} outside 1..{d}")
        smallest = float(linalg.eigvalsh(sym)[0])
        if not smallest > 0.0:
            raise InvalidParameterError(
                f"CovarianceAt: not positive definite (smallest eigenvalue {smallest:.3e}); invalid variogram input"
            )

    @property
    def d(self) -> int:
        return self.entries.shape[0] + 1
