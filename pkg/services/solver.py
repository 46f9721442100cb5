"""ℓ1 정규화 스코어 매칭 추정 (좌표 하강법)

좌표 순서: μ_1..μ_d, 이후 Λ_jk (j < k) 사전식.
벌점은 √n·r·Σ|Λ_jk| (옵션: |μ_j|, |Θ_jj| 추가).
"""
import logging
import math
import time
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from joblib import Parallel, delayed

from errors import DomainError, InvalidParameterError
from models.batch import ExceedanceBatch
from models.estimate import Estimate, FitConfig, PathResult
from models.parameters import LambdaUpper, Location
from models.weights import LOG_WEIGHT, WeightFunction
from rng import RngState
from services.conversions import lambda_to_theta
from services.scorematch import BatchStats, Gradient, batch_stats

logger = logging.getLogger(__name__)

# precompute 청크 크기 (청크 경계가 고정이므로 스레드 수와 무관하게 같은 합)
CHUNK_ROWS = 2048


@dataclass(frozen=True)
class SufficientStats:
    """좌표별 집계량

    c[j] = Σ f1_j², b[j] = Σ f1_j² z, G[j] = Σ f1_j² z zᵀ,
    s2[j] = Σ f2_j, t[j] = Σ f2_j z, u[j] = Σ F_j  (z = log x).
    """
    n: int
    d: int
    c: np.ndarray
    b: np.ndarray
    G: np.ndarray
    s2: np.ndarray
    t: np.ndarray
    u: np.ndarray


def _chunk_aggregates(f1sq: np.ndarray, z: np.ndarray) -> np.ndarray:
    return np.einsum("ij,ik,il->jkl", f1sq, z, z, optimize=True)


def precompute(samples, w: WeightFunction = LOG_WEIGHT, threads: int = 1) -> SufficientStats:
    """원시 표본 (n x d) 또는 BatchStats 에서 집계량 계산

    Raises:
        DomainError: 빈 배치 또는 양수가 아닌 좌표
    """
    if isinstance(samples, ExceedanceBatch):
        samples = samples.samples
    batch = samples if isinstance(samples, BatchStats) else batch_stats(samples, w)
    if batch.n == 0:
        raise DomainError("Cannot precompute statistics of an empty batch")
    z = batch.logx
    f1sq = batch.f1**2

    bounds = [(s, min(s + CHUNK_ROWS, batch.n)) for s in range(0, batch.n, CHUNK_ROWS)]
    if threads > 1 and len(bounds) > 1:
        parts = Parallel(n_jobs=threads, prefer="threads")(
            delayed(_chunk_aggregates)(f1sq[s:e], z[s:e]) for s, e in bounds
        )
    else:
        parts = [_chunk_aggregates(f1sq[s:e], z[s:e]) for s, e in bounds]
    G = parts[0]
    for part in parts[1:]:
        G = G + part

    return SufficientStats(
        n=batch.n,
        d=batch.d,
        c=f1sq.sum(axis=0),
        b=f1sq.T @ z,
        G=G,
        s2=batch.f2.sum(axis=0),
        t=batch.f2.T @ z,
        u=batch.fdiag.sum(axis=0),
    )


def _theta_rows_products(stats: SufficientStats, theta: np.ndarray) -> np.ndarray:
    """H[j] = G_j Θ_j"""
    return np.einsum("jkl,jl->jk", stats.G, theta)


def objective_from_stats(stats: SufficientStats, mu, theta) -> float:
    """집계량으로 Σᵢ𝔬 계산"""
    mu = mu.entries if isinstance(mu, Location) else np.asarray(mu, dtype=np.float64)
    theta = getattr(theta, "entries", theta)
    a = mu - 1.0
    H = _theta_rows_products(stats, theta)
    terms = (
        stats.c * a**2
        - 2.0 * a * np.einsum("jk,jk->j", theta, stats.b)
        + np.einsum("jk,jk->j", theta, H)
        + a * stats.s2
        - np.einsum("jk,jk->j", theta, stats.t)
        - np.diag(theta) * stats.u
    )
    return math.fsum(terms)


def gradient_from_stats(stats: SufficientStats, mu, theta) -> Gradient:
    """집계량으로 (μ, Θ) 기울기 계산 (Θ 부분 대칭화)"""
    mu = mu.entries if isinstance(mu, Location) else np.asarray(mu, dtype=np.float64)
    theta = getattr(theta, "entries", theta)
    a = mu - 1.0
    H = _theta_rows_products(stats, theta)
    d_mu = 2.0 * stats.c * a - 2.0 * np.einsum("jk,jk->j", theta, stats.b) + stats.s2
    raw = -2.0 * a[:, None] * stats.b + 2.0 * H - stats.t - np.diag(stats.u)
    return Gradient(d_mu=d_mu, d_theta=0.5 * (raw + raw.T))


def lambda_gradient(grad: Gradient) -> np.ndarray:
    """Λ_jk 방향 미분 (순상삼각): 2G_jk − G_jj − G_kk"""
    g = grad.d_theta
    diag = np.diag(g)
    return np.triu(2.0 * g - diag[:, None] - diag[None, :], k=1)


def soft_threshold(z: float, t: float) -> float:
    """sign(z)·max(|z| − t, 0)"""
    if t < 0:
        raise InvalidParameterError(f"Threshold must be nonnegative, got {t}")
    if z > t:
        return z - t
    if z < -t:
        return z + t
    return 0.0


def _minimize_piecewise(quad: float, lin: float, kinks: Sequence[float], weight: float) -> float:
    """quad·x² + lin·x + weight·Σ|x − κ| 의 정확한 최소점 (quad > 0)

    꺾임점과 각 매끄러운 구간의 정류점을 모두 비교한다.
    """
    points = sorted(kinks)

    def value(x: float) -> float:
        return quad * x * x + lin * x + weight * sum(abs(x - k) for k in points)

    candidates = list(points)
    edges = [-math.inf] + points + [math.inf]
    for lo, hi in zip(edges, edges[1:]):
        # 구간 (lo, hi) 에서 |x − κ| 의 기울기 합
        slope = sum(1.0 if k <= lo else -1.0 for k in points)
        x = -(lin + weight * slope) / (2.0 * quad)
        if lo < x < hi:
            candidates.append(x)
    return min(candidates, key=value)


class SolverState:
    """좌표 하강 상태 (μ, Θ, H = G_j Θ_j 캐시)"""

    def __init__(self, stats: SufficientStats, mu, theta, r: float = 0.0, config: Optional[FitConfig] = None):
        if r < 0 or not math.isfinite(r):
            raise InvalidParameterError(f"Tuning parameter r must be finite and >= 0, got {r}")
        self.stats = stats
        self.config = config or FitConfig()
        self.r = float(r)
        self.penalty = math.sqrt(stats.n) * self.r
        self.mu = np.array(mu, dtype=np.float64)
        self.theta = np.array(theta, dtype=np.float64)
        if self.mu.shape != (stats.d,) or self.theta.shape != (stats.d, stats.d):
            raise InvalidParameterError(
                f"Initial value has wrong dimension for d={stats.d}: mu {self.mu.shape}, theta {self.theta.shape}"
            )
        self.H = _theta_rows_products(stats, self.theta)
        self.flags: list = []

        G = stats.G
        idx = np.arange(stats.d)
        # α_jk = aᵀG_j a + aᵀG_k a,  a = e_k − e_j
        diag_j = G[idx, idx, idx]
        cross = G[idx[:, None], idx[:, None], idx[None, :]]  # G_j[j, k]
        far = G[idx[:, None], idx[None, :], idx[None, :]]  # G_j[k, k]
        per_row = far - 2.0 * cross + diag_j[:, None]
        self.alpha = per_row + per_row.T

    @classmethod
    def start(cls, stats: SufficientStats, init: Optional[Estimate], r: float, config: FitConfig) -> "SolverState":
        if init is None:
            return cls(stats, np.zeros(stats.d), np.zeros((stats.d, stats.d)), r, config)
        if init.d != stats.d:
            raise InvalidParameterError(f"Initial estimate has d={init.d}, data has d={stats.d}")
        return cls(stats, init.mu.entries, init.theta.entries, r, config)

    def flag(self, label: str) -> None:
        if label not in self.flags:
            logger.warning(f"⚠️ Degenerate coordinate {label}; left unchanged")
            self.flags.append(label)

    def objective(self) -> float:
        return objective_from_stats(self.stats, self.mu, self.theta)

    def penalty_value(self) -> float:
        if self.penalty == 0.0:
            return 0.0
        total = np.sum(np.abs(np.triu(self.theta, k=1)))
        if self.config.penalize_mu:
            total += np.sum(np.abs(self.mu))
        if self.config.penalize_diag:
            total += np.sum(np.abs(np.diag(self.theta)))
        return self.penalty * float(total)

    def penalized(self) -> float:
        return self.objective() + self.penalty_value()


def update_mu(j: int, state: SolverState) -> float:
    """μ_j 의 정확한 좌표 최소점 (적용 후 반환)

    μ_j = 1 + (Θ_jᵀ b_j − s2_j/2)/c_j. c_j = 0 이면 그대로 두고 플래그.
    """
    stats = state.stats
    c = float(stats.c[j])
    if not c > 0.0:
        state.flag(f"mu:{j + 1}")
        return float(state.mu[j])
    theta_b = float(state.theta[j] @ stats.b[j])
    if state.config.penalize_mu and state.penalty > 0.0:
        # c μ² − (2c + 2Θ_jᵀb_j − s2_j) μ + p|μ|
        value = soft_threshold(2.0 * c + 2.0 * theta_b - float(stats.s2[j]), state.penalty) / (2.0 * c)
    else:
        value = 1.0 + (theta_b - 0.5 * float(stats.s2[j])) / c
    state.mu[j] = value
    return value


def update_lambda(j: int, k: int, state: SolverState, penalty: Optional[float] = None) -> float:
    """Λ_jk 의 정확한 좌표 최소점 (이차식 + ℓ1, 적용 후 반환)

    Λ_jk 는 Θ_jk, Θ_kj 에 +1, Θ_jj, Θ_kk 에 −1 로 들어간다.
    α ≤ 0 이면 그대로 두고 플래그.
    """
    if not j < k:
        raise InvalidParameterError(f"update_lambda requires j < k, got ({j + 1}, {k + 1})")
    stats = state.stats
    p = state.penalty if penalty is None else float(penalty)
    theta, H = state.theta, state.H
    x0 = float(theta[j, k])

    alpha = float(state.alpha[j, k])
    if not alpha > 0.0:
        state.flag(f"lambda:{j + 1},{k + 1}")
        return x0

    am_j = float(state.mu[j]) - 1.0
    am_k = float(state.mu[k]) - 1.0
    b, t, u = stats.b, stats.t, stats.u
    beta_j = 2.0 * (H[j, k] - H[j, j]) - 2.0 * am_j * (b[j, k] - b[j, j]) - (t[j, k] - t[j, j]) + u[j]
    beta_k = 2.0 * (H[k, j] - H[k, k]) - 2.0 * am_k * (b[k, j] - b[k, k]) - (t[k, j] - t[k, k]) + u[k]
    beta = float(beta_j + beta_k)

    # α(x − x0)² + β(x − x0) + p|x| (+ p|Θ_jj| + p|Θ_kk|)
    if state.config.penalize_diag and p > 0.0:
        kinks = [0.0, float(theta[j, j]) + x0, float(theta[k, k]) + x0]
        value = _minimize_piecewise(alpha, beta - 2.0 * alpha * x0, kinks, p)
    else:
        value = soft_threshold(2.0 * alpha * x0 - beta, p) / (2.0 * alpha)

    delta = value - x0
    if delta != 0.0:
        G = stats.G
        theta[j, k] = value
        theta[k, j] = value
        theta[j, j] -= delta
        theta[k, k] -= delta
        H[j] += delta * (G[j, :, k] - G[j, :, j])
        H[k] += delta * (G[k, :, j] - G[k, :, k])
    return value


def _pairs(d: int) -> list:
    return [(j, k) for j in range(d) for k in range(j + 1, d)]


def _subgradient_gaps(values: np.ndarray, grads: np.ndarray, weight: float) -> np.ndarray:
    """0 과 부분기울기 집합 grad + weight·∂|value| 사이 거리 (원소별)"""
    if weight == 0.0:
        return np.abs(grads)
    return np.where(
        values != 0.0,
        np.abs(grads + weight * np.sign(values)),
        np.maximum(0.0, np.abs(grads) - weight),
    )


def gradient_scale(stats: SufficientStats) -> float:
    """μ=0, Λ=0 에서의 기울기 최대 크기 (KKT 허용치 기준, 최소 1)"""
    d = stats.d
    start = gradient_from_stats(stats, np.zeros(d), np.zeros((d, d)))
    return max(1.0, float(np.max(np.abs(start.d_mu))), float(np.max(np.abs(start.d_theta))))


def _kkt_gap(stats: SufficientStats, mu: np.ndarray, theta: np.ndarray, p: float, config: FitConfig) -> float:
    grad = gradient_from_stats(stats, mu, theta)
    worst = float(np.max(_subgradient_gaps(mu, grad.d_mu, p if config.penalize_mu else 0.0)))

    g_lam = lambda_gradient(grad)
    upper = np.triu_indices(stats.d, k=1)
    if not (config.penalize_diag and p > 0.0):
        gaps = _subgradient_gaps(theta[upper], g_lam[upper], p)
        return max(worst, float(np.max(gaps))) if gaps.size else worst

    for j, k in zip(*upper):
        g = float(g_lam[j, k])
        # Λ_jk 증가 시 Θ_jj, Θ_kk 감소
        lo, hi = g, g
        for value, sign in ((theta[j, k], 1.0), (theta[j, j], -1.0), (theta[k, k], -1.0)):
            if value != 0.0:
                shift = sign * p * math.copysign(1.0, value)
                lo, hi = lo + shift, hi + shift
            else:
                lo, hi = lo - p, hi + p
        gap = lo if lo > 0 else (-hi if hi < 0 else 0.0)
        worst = max(worst, gap)
    return worst


def kkt_residual(stats: SufficientStats, estimate: Estimate, r: float, config: Optional[FitConfig] = None) -> float:
    """ℓ1 부분기울기 최적성 조건의 최대 위반량"""
    config = config or FitConfig()
    p = math.sqrt(stats.n) * r
    return _kkt_gap(stats, estimate.mu.entries, estimate.theta.entries, p, config)


def _to_estimate(state: SolverState, sweeps: int, converged: bool) -> Estimate:
    lam = LambdaUpper(np.triu(state.theta, k=1))
    theta = lambda_to_theta(lam)
    # 대각 누적 오차 제거 후 다시 평가
    state.theta = np.array(theta.entries)
    state.H = _theta_rows_products(state.stats, state.theta)
    return Estimate(
        mu=Location(state.mu),
        lam=lam,
        theta=theta,
        objective=state.objective(),
        penalized=state.penalized(),
        r=state.r,
        sweeps_used=sweeps,
        converged=converged,
        flags=tuple(state.flags),
    )


def fit(
    stats: SufficientStats,
    r: float = 0.0,
    init: Optional[Estimate] = None,
    config: Optional[FitConfig] = None,
) -> Estimate:
    """순환 좌표 하강법

    수렴: 한 스윕의 벌점 포함 목적함수 상대 감소량 < tol 이고
    KKT 잔차 <= kkt_tol · gradient_scale(stats). 아니면 max_sweeps 까지 반복.
    """
    config = config or FitConfig()
    state = SolverState.start(stats, init, r, config)
    pairs = _pairs(stats.d)
    shuffler = RngState(seed=config.seed).generator() if config.seed is not None else None

    previous = state.penalized()
    kkt_limit = config.kkt_tol * gradient_scale(stats)
    kkt = math.inf
    converged = False
    sweeps = 0
    for sweeps in range(1, config.max_sweeps + 1):
        order = pairs
        if shuffler is not None:
            order = [pairs[i] for i in shuffler.permutation(len(pairs))]

        for j in range(stats.d):
            before = state.penalized() if config.check_steps else None
            update_mu(j, state)
            if before is not None:
                _check_step(before, state.penalized(), f"mu:{j + 1}")
        for j, k in order:
            before = state.penalized() if config.check_steps else None
            update_lambda(j, k, state)
            if before is not None:
                _check_step(before, state.penalized(), f"lambda:{j + 1},{k + 1}")

        current = state.penalized()
        _check_step(previous, current, f"sweep {sweeps}")
        decrease = (previous - current) / max(1.0, abs(previous))
        logger.debug(f"sweep {sweeps}: penalized objective {current:.12g} (relative decrease {decrease:.3e})")
        previous = current
        if decrease < config.tol:
            # 감소량 조건과 1차 최적성 조건을 모두 만족해야 수렴
            kkt = _kkt_gap(stats, state.mu, state.theta, state.penalty, config)
            if kkt <= kkt_limit:
                converged = True
                break

    estimate = _to_estimate(state, sweeps, converged)
    if not converged:
        logger.warning(f"⚠️ r={r:.6g}: not converged after {sweeps} sweeps (KKT residual {kkt:.3e}, limit {kkt_limit:.3e})")
    logger.info(
        f"✅ fit r={r:.6g}: objective={estimate.objective:.10g}, sweeps={sweeps}, converged={converged}"
    )
    if logger.isEnabledFor(logging.DEBUG):
        logger.debug(f"KKT residual at r={r:.6g}: {kkt_residual(stats, estimate, r, config):.3e}")
    return estimate


def _check_step(before: float, after: float, where: str) -> None:
    if after > before + 1e-10 * max(1.0, abs(before)):
        logger.warning(f"⚠️ Penalized objective increased at {where}: {before:.15g} -> {after:.15g}")


def fit_basic(stats: SufficientStats, config: Optional[FitConfig] = None) -> Estimate:
    """비정규화 추정량 (r = 0)"""
    return fit(stats, 0.0, None, config)


def fit_path(
    stats: SufficientStats,
    grid: Sequence[float],
    config: Optional[FitConfig] = None,
    multipliers: Optional[Sequence[float]] = None,
) -> PathResult:
    """내림차순 r 그리드를 따라 웜 스타트로 연속 추정 (첫 점은 μ=0, Λ=0 에서 시작)

    Raises:
        InvalidParameterError: 그리드가 엄격한 내림차순이 아니거나 음수 포함
    """
    grid = [float(r) for r in grid]
    if not grid:
        raise InvalidParameterError("Grid must not be empty")
    if any(r < 0 for r in grid):
        raise InvalidParameterError(f"Grid values must be nonnegative, got {grid}")
    if any(b >= a for a, b in zip(grid, grid[1:])):
        raise InvalidParameterError(f"Grid must be strictly descending, got {grid}")

    estimates, timings = [], []
    previous = None
    for r in grid:
        started = time.perf_counter()
        previous = fit(stats, r, previous, config)
        timings.append(time.perf_counter() - started)
        estimates.append(previous)
    return PathResult(
        grid=tuple(grid),
        estimates=tuple(estimates),
        timings=tuple(timings),
        multipliers=tuple(float(m) for m in multipliers) if multipliers is not None else None,
    )


def normalize_multipliers(multipliers: Sequence[float]) -> list:
    """배수를 엄격한 내림차순으로 정렬 (중복 제거, 필요 시 경고)"""
    values = [float(m) for m in multipliers]
    if any(m < 0 or not math.isfinite(m) for m in values):
        raise InvalidParameterError(f"Grid multipliers must be finite and nonnegative, got {values}")
    ordered = sorted(set(values), reverse=True)
    if ordered != values:
        logger.warning(f"⚠️ Grid multipliers {values} were not strictly descending; using {ordered}")
    return ordered


def grid_values(multipliers: Sequence[float], d: int, n_ref: int) -> list:
    """r = 배수 · √(log d / n_ref)"""
    if d < 2 or n_ref < 1:
        raise InvalidParameterError(f"Grid needs d >= 2 and n >= 1, got d={d}, n={n_ref}")
    scale = math.sqrt(math.log(d) / n_ref)
    return [m * scale for m in multipliers]
