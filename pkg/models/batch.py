"""초과 데이터 배치 모델"""
from dataclasses import dataclass

import numpy as np

from errors import DomainError, InvalidParameterError

SOURCES = ("exact_pareto", "max_stable_thresholded", "file")
NORMS = ("sup", "l1")


def row_norms(samples: np.ndarray, norm: str) -> np.ndarray:
    """행별 노름 (sup 또는 l1)"""
    if norm == "sup":
        return np.max(np.abs(samples), axis=1)
    if norm == "l1":
        return np.sum(np.abs(samples), axis=1)
    raise InvalidParameterError(f"Unknown norm '{norm}'. Supported: {list(NORMS)}")


@dataclass(frozen=True)
class ExceedanceBatch:
    """임계 초과 표본 X₁..Xₙ (각 행은 (0,∞)^d 이고 노름 > 1)"""
    samples: np.ndarray
    n_u: int
    source: str  # exact_pareto, max_stable_thresholded, file
    norm: str = "sup"

    def __post_init__(self):
        x = np.array(self.samples, dtype=np.float64, copy=True)
        if x.ndim != 2 or x.shape[1] < 2:
            raise InvalidParameterError(f"ExceedanceBatch: expected n x d matrix with d >= 2, got shape {x.shape}")
        if x.shape[0] == 0:
            raise DomainError("ExceedanceBatch: no samples")
        if self.source not in SOURCES:
            raise InvalidParameterError(f"ExceedanceBatch: unknown source '{self.source}'")
        if not np.all(np.isfinite(x)) or np.any(x <= 0.0):
            raise DomainError("ExceedanceBatch: all coordinates must be finite and positive")
        if np.any(row_norms(x, self.norm) <= 1.0):
            raise DomainError(f"ExceedanceBatch: every row must have {self.norm}-norm > 1")
        if self.n_u != x.shape[0]:
            raise InvalidParameterError(f"ExceedanceBatch: n_u={self.n_u} but {x.shape[0]} rows")
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    @property
    def d(self) -> int:
        return self.samples.shape[1]
