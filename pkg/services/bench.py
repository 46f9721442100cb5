"""벤치마크 실행기

복제 실험: 시뮬레이션 → precompute (t_pre) → fit_path (t_opt) → 그리드 점별 지표.
집계: 복제 간 표본 평균과 표본 표준편차 (N = 1 이면 표준편차 0).
"""
import csv
import json
import logging
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
from joblib import Parallel, delayed

from config import settings
from errors import HRError, InvalidParameterError, SingularMatrixError
from models.estimate import FitConfig
from models.experiment import EXTENDED_COLUMNS, TABLE_COLUMNS, ExperimentSpec, Metrics, TableRow
from models.parameters import LambdaUpper, ThetaMatrix
from models.variogram import Variogram
from models.weights import get_weight
from rng import RngState
from services.conversions import gamma_m_spread, theta_to_gamma
from services.simulate import (
    brownian_variogram,
    sample_hr_pareto,
    sample_max_stable,
    threshold_exceedances,
    tridiagonal_theta,
)
from services.solver import fit_path, grid_values, normalize_multipliers, precompute

logger = logging.getLogger(__name__)


def _rms(diff: np.ndarray) -> float:
    return math.sqrt(float(np.mean(diff**2)))


def _entries(value) -> np.ndarray:
    return value.entries if isinstance(value, ThetaMatrix) else np.asarray(value, dtype=np.float64)


def rmse_theta(est: Union[ThetaMatrix, np.ndarray], truth: Union[ThetaMatrix, np.ndarray]) -> float:
    """(1/d² Σ (Θ̂_ij − Θ_ij)²)^{1/2}"""
    a, b = _entries(est), _entries(truth)
    if a.shape != b.shape:
        raise InvalidParameterError(f"Dimension mismatch: estimate {a.shape}, truth {b.shape}")
    return _rms(a - b)


def rmse_gamma(est_theta: ThetaMatrix, truth: Variogram, m: int = 0) -> Optional[float]:
    """Γ̂ = theta_to_gamma(Θ̂, m) 의 RMSE (역행렬 실패 시 None)"""
    if est_theta.d != truth.d:
        raise InvalidParameterError(f"Dimension mismatch: estimate d={est_theta.d}, truth d={truth.d}")
    try:
        gamma_hat = theta_to_gamma(est_theta, m)
    except SingularMatrixError as e:
        logger.warning(f"⚠️ RMSE_Gamma unavailable: {e.detail}")
        return None
    return _rms(gamma_hat.entries - truth.entries)


def zero_ratio(lam: LambdaUpper) -> float:
    """정확히 0 인 순상삼각 원소 비율 (분모 d(d−1)/2)"""
    d = lam.d
    upper = lam.entries[np.triu_indices(d, k=1)]
    return float(np.count_nonzero(upper == 0.0)) / upper.size


def zero_ratio_theta(theta: ThetaMatrix) -> float:
    """정확히 0 인 Θ 원소 비율 (분모 d²)"""
    return float(np.count_nonzero(theta.entries == 0.0)) / theta.entries.size


def _spread_or_none(theta: ThetaMatrix) -> Optional[float]:
    try:
        return gamma_m_spread(theta)
    except SingularMatrixError:
        return None


@dataclass
class ExperimentResult:
    """실험 결과 (복제별 지표 + 집계 표)"""
    spec: ExperimentSpec
    metrics: List[Metrics]
    table: List[TableRow]
    failures: List[str] = field(default_factory=list)


def _simulate(spec: ExperimentSpec, gamma: Variogram, replicate: int):
    rng = RngState(seed=spec.seed).spawn(replicate).generator()
    if spec.design == "exact_pareto":
        return sample_hr_pareto(gamma, spec.n, rng, norm=spec.norm)
    raw = sample_max_stable(gamma, spec.n, rng)
    return threshold_exceedances(raw, spec.quantile, norm=spec.norm)


def run_replicate(spec: ExperimentSpec, replicate: int, timing: bool = True) -> List[Metrics]:
    """복제 실험 1회 (stream = replicate)"""
    gamma = brownian_variogram(spec.d)
    truth = tridiagonal_theta(spec.d)
    multipliers = normalize_multipliers(spec.grid_multipliers)

    batch = _simulate(spec, gamma, replicate)

    started = time.perf_counter()
    stats = precompute(batch, get_weight(spec.weight))
    t_pre = time.perf_counter() - started

    n_ref = spec.n if spec.grid_reference == "n" else batch.n_u
    grid = grid_values(multipliers, spec.d, n_ref)
    path = fit_path(stats, grid, FitConfig(), multipliers)

    rows = []
    for multiplier, r, est, t_opt in zip(multipliers, path.grid, path.estimates, path.timings):
        rows.append(Metrics(
            replicate=replicate,
            r_multiplier=multiplier,
            r_value=r,
            rmse_theta=rmse_theta(est.theta, truth),
            rmse_gamma=rmse_gamma(est.theta, gamma, spec.m - 1),
            zero_ratio=zero_ratio(est.lam),
            zero_ratio_theta=zero_ratio_theta(est.theta),
            gamma_m_spread=_spread_or_none(est.theta),
            t_pre=t_pre if timing else 0.0,
            t_opt=t_opt if timing else 0.0,
            n=spec.n,
            n_u=batch.n_u,
            sweeps=est.sweeps_used,
            converged=est.converged,
            flags=";".join(est.flags),
        ))
    logger.info(f"✅ Replicate {replicate + 1}/{spec.N} done (n_u={batch.n_u})")
    return rows


def _safe_replicate(spec: ExperimentSpec, replicate: int, timing: bool):
    try:
        return run_replicate(spec, replicate, timing), None
    except HRError as e:
        logger.error(f"Replicate {replicate + 1} failed: {e.detail}")
        return [], f"replicate {replicate + 1}: {e.detail}"


def _mean_std(values: List[float]) -> tuple:
    if not values:
        return None, None
    arr = np.asarray(values, dtype=np.float64)
    mean = float(np.mean(arr))
    std = float(np.std(arr, ddof=1)) if arr.size > 1 else 0.0
    return mean, std


def aggregate(spec: ExperimentSpec, metrics: List[Metrics]) -> List[TableRow]:
    """그리드 점별 평균/표준편차 (복제 순서대로 접기)"""
    table = []
    for multiplier in normalize_multipliers(spec.grid_multipliers):
        rows = [m for m in metrics if m.r_multiplier == multiplier]
        if not rows:
            continue
        theta_mean, theta_std = _mean_std([m.rmse_theta for m in rows])
        gamma_mean, gamma_std = _mean_std([m.rmse_gamma for m in rows if m.rmse_gamma is not None])
        zero_mean, zero_std = _mean_std([m.zero_ratio for m in rows])
        spread_mean, _ = _mean_std([m.gamma_m_spread for m in rows if m.gamma_m_spread is not None])
        table.append(TableRow(
            r_multiplier=multiplier,
            r_value=_mean_std([m.r_value for m in rows])[0],
            rmse_theta_mean=theta_mean,
            rmse_theta_std=theta_std,
            rmse_gamma_mean=gamma_mean,
            rmse_gamma_std=gamma_std,
            zero_ratio_mean=zero_mean,
            zero_ratio_std=zero_std,
            t_pre_mean=_mean_std([m.t_pre for m in rows])[0],
            t_opt_mean=_mean_std([m.t_opt for m in rows])[0],
            n=spec.n,
            n_u_mean=_mean_std([float(m.n_u) for m in rows])[0],
            d=spec.d,
            N=spec.N,
            zero_ratio_theta_mean=_mean_std([m.zero_ratio_theta for m in rows])[0],
            gamma_m_spread_mean=spread_mean,
            converged_ratio=sum(1 for m in rows if m.converged) / len(rows),
        ))
    return table


def run_experiment(spec: ExperimentSpec, threads: Optional[int] = None, timing: bool = True) -> ExperimentResult:
    """설정에 따라 N 회 복제 실험 후 집계

    threads > 1 이면 복제를 스레드로 분산 (결과는 복제 순서로 합침).
    timing=False 이면 시간 열을 0 으로 기록한다.
    """
    workers = threads if threads is not None else spec.threads
    logger.info(
        f"📊 Experiment: d={spec.d}, n={spec.n}, N={spec.N}, design={spec.design}, "
        f"grid_reference={spec.grid_reference}, threads={workers}"
    )
    if workers > 1 and spec.N > 1:
        outcomes = Parallel(n_jobs=workers, prefer="threads")(
            delayed(_safe_replicate)(spec, i, timing) for i in range(spec.N)
        )
    else:
        outcomes = [_safe_replicate(spec, i, timing) for i in range(spec.N)]

    metrics, failures = [], []
    for rows, failure in outcomes:
        metrics.extend(rows)
        if failure:
            failures.append(failure)
    return ExperimentResult(spec=spec, metrics=metrics, table=aggregate(spec, metrics), failures=failures)


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    return format(float(value), f".{settings.CSV_DIGITS}g")


def emit_table(table: List[TableRow], fmt: str, path, extended: bool = False) -> None:
    """집계 표 저장 (csv 또는 json)

    extended=True 이면 zero_ratio_theta_mean, gamma_m_spread_mean, converged_ratio 열을 뒤에 붙인다.

    Raises:
        OSError: 쓰기 실패 (경로 포함)
    """
    columns = TABLE_COLUMNS + (EXTENDED_COLUMNS if extended else [])
    records = [row.model_dump() for row in table]
    target = Path(path)
    if fmt == "csv":
        with open(target, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(columns)
            for record in records:
                writer.writerow([_csv_cell(record[c]) for c in columns])
    elif fmt == "json":
        payload = {"columns": columns, "rows": [{c: record[c] for c in columns} for record in records]}
        with open(target, "w", encoding="utf-8") as f:
            json.dump(payload, f, indent=2)
            f.write("\n")
    else:
        raise InvalidParameterError(f"Unknown table format '{fmt}'. Supported: csv, json")
    logger.info(f"✅ Wrote {len(records)} table rows to {target}")


def print_table(table: List[TableRow]) -> None:
    """집계 표 요약 출력 (stderr)"""
    out = sys.stderr
    print("=" * 72, file=out)
    print("📈 Experiment summary", file=out)
    print("=" * 72, file=out)
    print(f"  {'mult':>8} {'r':>10} {'RMSE_Θ':>16} {'RMSE_Γ':>16} {'zero':>8} {'t_opt':>8}", file=out)
    for row in table:
        gamma = (
            f"{row.rmse_gamma_mean:.3f} ({row.rmse_gamma_std:.3f})" if row.rmse_gamma_mean is not None else "n/a"
        )
        print(
            f"  {row.r_multiplier:>8g} {row.r_value:>10.4g} "
            f"{row.rmse_theta_mean:.3f} ({row.rmse_theta_std:.3f}) {gamma:>16} "
            f"{row.zero_ratio_mean:>8.3f} {row.t_opt_mean:>8.3f}",
            file=out,
        )
    print("=" * 72, file=out)
