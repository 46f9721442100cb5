"""모델 공통 유틸리티"""
import numpy as np

from errors import InvalidParameterError


def frozen_array(values, ndim: int, name: str) -> np.ndarray:
    """읽기 전용 float64 배열 복사본 생성

    Raises:
        InvalidParameterError: 차원 불일치 또는 비유한 값
    """
    arr = np.array(values, dtype=np.float64, copy=True)
    if arr.ndim != ndim:
        raise InvalidParameterError(f"{name}: expected {ndim}-d array, got shape {arr.shape}")
    if ndim == 2 and arr.shape[0] != arr.shape[1]:
        raise InvalidParameterError(f"{name}: expected square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidParameterError(f"{name}: entries must be finite")
    arr.setflags(write=False)
    return arr


def sup_norm(arr: np.ndarray) -> float:
    return float(np.max(np.abs(arr))) if arr.size else 0.0
