"""벤치마크 실험 설정 및 결과 모델"""
from dataclasses import dataclass
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, ValidationError, field_validator

from config import settings
from errors import ConfigError
from models.batch import NORMS
from models.weights import WEIGHTS

# 설정 파일에서 허용하는 표기 -> 내부 이름
DESIGNS = {
    "pareto": "exact_pareto",
    "exact_pareto": "exact_pareto",
    "maxstable": "max_stable",
    "max_stable": "max_stable",
}


class ExperimentSpec(BaseModel):
    """반복 실험 설정 (JSON 설정 파일)"""
    model_config = ConfigDict(extra="forbid")

    d: int
    n: int
    N: int = 1
    grid_multipliers: List[float] = list(settings.DEFAULT_GRID)
    design: str = "exact_pareto"  # exact_pareto, max_stable
    quantile: float = settings.QUANTILE
    seed: int = settings.SEED
    grid_reference: str = "n"  # n, n_u
    threads: int = 1
    m: int = 1  # Γ̂ 재구성 앵커 (1-based)
    norm: str = "sup"
    weight: str = "log"

    @field_validator("d")
    @classmethod
    def validate_d(cls, v):
        if v < 2:
            raise ValueError("d must be >= 2")
        return v

    @field_validator("n", "N", "threads")
    @classmethod
    def validate_count(cls, v):
        if v < 1:
            raise ValueError("must be >= 1")
        return v

    @field_validator("grid_multipliers")
    @classmethod
    def validate_grid(cls, v):
        if not v:
            raise ValueError("grid_multipliers must not be empty")
        if any(x < 0 for x in v):
            raise ValueError("grid_multipliers must be nonnegative")
        # 경로는 내림차순으로 계산
        return sorted(set(v), reverse=True)

    @field_validator("design")
    @classmethod
    def validate_design(cls, v):
        if v not in DESIGNS:
            raise ValueError(f"design must be one of {sorted(DESIGNS)}")
        return DESIGNS[v]

    @field_validator("quantile")
    @classmethod
    def validate_quantile(cls, v):
        if not 0.0 < v < 1.0:
            raise ValueError("quantile must be in (0, 1)")
        return v

    @field_validator("seed")
    @classmethod
    def validate_seed(cls, v):
        if not 0 <= v < 2**64:
            raise ValueError("seed must be in [0, 2^64)")
        return v

    @field_validator("grid_reference")
    @classmethod
    def validate_grid_reference(cls, v):
        if v not in ["n", "n_u"]:
            raise ValueError("grid_reference must be 'n' or 'n_u'")
        return v

    @field_validator("norm")
    @classmethod
    def validate_norm(cls, v):
        if v not in NORMS:
            raise ValueError(f"norm must be one of {list(NORMS)}")
        return v

    @field_validator("weight")
    @classmethod
    def validate_weight(cls, v):
        if v not in WEIGHTS:
            raise ValueError(f"weight must be one of {sorted(WEIGHTS)}")
        return v

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentSpec":
        """dict -> ExperimentSpec

        Raises:
            ConfigError: 잘못된 필드가 있는 경우 (필드 이름 포함)
        """
        try:
            spec = cls.model_validate(data)
        except ValidationError as e:
            problems = "; ".join(
                f"{'.'.join(str(p) for p in err['loc']) or '<root>'}: {err['msg']}" for err in e.errors()
            )
            raise ConfigError(f"Invalid experiment config: {problems}")
        if not 1 <= spec.m <= spec.d:
            raise ConfigError(f"Invalid experiment config: m: must be in 1..{spec.d}")
        return spec


@dataclass
class Metrics:
    """복제 실험 1회, 그리드 1점의 평가 지표"""
    replicate: int
    r_multiplier: float
    r_value: float
    rmse_theta: float
    rmse_gamma: Optional[float]  # Θ̂_{−m,−m} 특이 시 None
    zero_ratio: float  # 분모 d(d−1)/2
    zero_ratio_theta: float  # 분모 d²
    gamma_m_spread: Optional[float]
    t_pre: float
    t_opt: float
    n: int
    n_u: int
    sweeps: int = 0
    converged: bool = True
    flags: str = ""


# emit_table 열 순서
TABLE_COLUMNS = [
    "r_multiplier", "r_value",
    "rmse_theta_mean", "rmse_theta_std",
    "rmse_gamma_mean", "rmse_gamma_std",
    "zero_ratio_mean", "zero_ratio_std",
    "t_pre_mean", "t_opt_mean",
    "n", "n_u_mean", "d", "N",
]
EXTENDED_COLUMNS = ["zero_ratio_theta_mean", "gamma_m_spread_mean", "converged_ratio"]


class TableRow(BaseModel):
    """그리드 점별 집계 결과"""
    r_multiplier: float
    r_value: float
    rmse_theta_mean: float
    rmse_theta_std: float
    rmse_gamma_mean: Optional[float] = None
    rmse_gamma_std: Optional[float] = None
    zero_ratio_mean: float
    zero_ratio_std: float
    t_pre_mean: float
    t_opt_mean: float
    n: int
    n_u_mean: float
    d: int
    N: int
    zero_ratio_theta_mean: float = 0.0
    gamma_m_spread_mean: Optional[float] = None
    converged_ratio: float = 1.0
