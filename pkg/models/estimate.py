"""추정 설정 및 결과 모델"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from config import settings
from errors import ConfigError, InvalidParameterError
from models.parameters import LambdaUpper, Location, ThetaMatrix


@dataclass(frozen=True)
class FitConfig:
    """좌표 하강법 설정"""
    tol: float = settings.TOL  # 스윕당 상대 목적함수 감소량
    max_sweeps: int = settings.MAX_SWEEPS
    kkt_tol: float = settings.KKT_TOL  # 부분기울기 잔차 / 시작점 기울기 크기
    penalize_mu: bool = False  # μ 에도 ℓ1 벌점
    penalize_diag: bool = False  # Θ 대각에도 ℓ1 벌점
    seed: Optional[int] = None  # None 이면 고정 순환 순서, 정수면 Λ 좌표 순서를 스윕마다 섞음
    check_steps: bool = False  # 매 좌표 갱신마다 단조 감소 검사 (디버그용)

    def __post_init__(self):
        if not self.tol > 0:
            raise ConfigError(f"FitConfig.tol must be > 0, got {self.tol}")
        if self.max_sweeps < 1:
            raise ConfigError(f"FitConfig.max_sweeps must be >= 1, got {self.max_sweeps}")
        if not self.kkt_tol > 0:
            raise ConfigError(f"FitConfig.kkt_tol must be > 0, got {self.kkt_tol}")


@dataclass(frozen=True)
class Estimate:
    """추정 결과 (μ̂, Λ̂, Θ̂)"""
    mu: Location
    lam: LambdaUpper
    theta: ThetaMatrix
    objective: float  # 벌점 제외 목적함수
    penalized: float = 0.0  # 목적함수 + 벌점
    r: float = 0.0
    sweeps_used: int = 0
    converged: bool = False
    flags: tuple = field(default_factory=tuple)  # 퇴화 좌표 등 경고 ("mu:3", "lambda:1,2")

    def __post_init__(self):
        d = self.mu.d
        if self.lam.d != d or self.theta.d != d:
            raise InvalidParameterError(
                f"Estimate: dimension mismatch (mu {d}, lambda {self.lam.d}, theta {self.theta.d})"
            )
        upper = np.triu(self.theta.entries, k=1)
        if not np.array_equal(upper, self.lam.entries):
            raise InvalidParameterError("Estimate: theta is not consistent with lambda")

    @property
    def d(self) -> int:
        return self.mu.d


@dataclass(frozen=True)
class PathResult:
    """정규화 경로 결과 (r 내림차순)"""
    grid: tuple
    estimates: tuple
    timings: tuple  # r 별 소요 시간 (초)
    multipliers: Optional[tuple] = None

    def __post_init__(self):
        if len(self.estimates) != len(self.grid) or len(self.timings) != len(self.grid):
            raise InvalidParameterError(
                f"PathResult: grid ({len(self.grid)}), estimates ({len(self.estimates)}) "
                f"and timings ({len(self.timings)}) must have equal length"
            )
        if any(b >= a for a, b in zip(self.grid, self.grid[1:])):
            raise InvalidParameterError(f"PathResult: grid must be strictly descending, got {list(self.grid)}")
        if self.multipliers is not None and len(self.multipliers) != len(self.grid):
            raise InvalidParameterError("PathResult: multipliers must match the grid length")
