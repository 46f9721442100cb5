"""스코어 매칭 가중 함수"""
from dataclasses import dataclass
from typing import Callable

import numpy as np

from errors import ConfigError


@dataclass(frozen=True)
class WeightFunction:
    """좌표별 가중 함수 w 와 그 도함수 w′ (모두 원소별 적용)"""
    name: str
    eval: Callable[[np.ndarray], np.ndarray]
    deriv: Callable[[np.ndarray], np.ndarray]


def _reciprocal(x: np.ndarray) -> np.ndarray:
    return 1.0 / np.asarray(x, dtype=np.float64)


LOG_WEIGHT = WeightFunction(name="log", eval=np.log, deriv=_reciprocal)

# 이름 -> 가중 함수 (CLI --weight)
WEIGHTS: dict[str, WeightFunction] = {
    LOG_WEIGHT.name: LOG_WEIGHT,
}


def get_weight(name: str) -> WeightFunction:
    try:
        return WEIGHTS[name]
    except KeyError:
        raise ConfigError(f"Unknown weight function '{name}'. Supported: {sorted(WEIGHTS)}")
