"""합성 데이터 생성

브라운 운동 변동도 설계, 정확한 HR 파레토 표본, 극치 함수(extremal functions) 방식의
최대 안정 표본과 임계 초과 추출.
"""
import logging
import math
from typing import Union

import numpy as np
from scipy import linalg

from config import settings
from errors import DomainError, InvalidParameterError, SamplingError
from models.batch import NORMS, ExceedanceBatch, row_norms
from models.parameters import ThetaMatrix
from models.variogram import Variogram
from rng import RngState
from services.conversions import gamma_to_sigma

logger = logging.getLogger(__name__)

RngLike = Union[RngState, np.random.Generator, int]

# 한 번에 생성하는 최소 제안 수
MIN_PROPOSAL_BATCH = 256


def _generator(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngState):
        return rng.generator()
    return RngState(seed=int(rng)).generator()


def brownian_variogram(d: int) -> Variogram:
    """표준 브라운 운동의 변동도: Γ_ij = |i − j|/√d"""
    if d < 2:
        raise InvalidParameterError(f"Dimension must be >= 2, got {d}")
    idx = np.arange(d, dtype=np.float64)
    return Variogram(np.abs(idx[:, None] - idx[None, :]) / math.sqrt(d))


def tridiagonal_theta(d: int) -> ThetaMatrix:
    """브라운 설계의 참 Θ (모서리 √d, 내부 대각 2√d, 인접 비대각 −√d)"""
    if d < 2:
        raise InvalidParameterError(f"Dimension must be >= 2, got {d}")
    s = math.sqrt(d)
    theta = np.zeros((d, d))
    off = np.arange(d - 1)
    theta[off, off + 1] = -s
    theta[off + 1, off] = -s
    theta[np.arange(d), np.arange(d)] = 2.0 * s
    theta[0, 0] = s
    theta[d - 1, d - 1] = s
    return ThetaMatrix(theta)


class _AnchoredProfiles:
    """앵커 k 별 스펙트럼 함수 Y^(k): Y_k = 1, log Y_{−k} ~ N(−Γ_{−k,k}/2, Σ[k])"""

    def __init__(self, gamma: Variogram):
        d = gamma.d
        self.d = d
        self.others = [np.delete(np.arange(d), k) for k in range(d)]
        self.means = [-0.5 * gamma.entries[self.others[k], k] for k in range(d)]
        self.factors = [
            linalg.cholesky(gamma_to_sigma(gamma, k).entries, lower=True) for k in range(d)
        ]

    def log_profiles(self, anchors: np.ndarray, gen: np.random.Generator) -> np.ndarray:
        """앵커 배열에 대응하는 log Y (행별)"""
        count = anchors.shape[0]
        normals = gen.standard_normal((count, self.d - 1))
        out = np.zeros((count, self.d))
        for k in range(self.d):
            rows = np.flatnonzero(anchors == k)
            if rows.size:
                draws = self.means[k] + normals[rows] @ self.factors[k].T
                out[np.ix_(rows, self.others[k])] = draws
        return out


def sample_hr_pareto(gamma: Variogram, n: int, rng: RngLike, norm: str = "sup") -> ExceedanceBatch:
    """정확한 HR 파레토 표본 n 개 ({‖x‖ > 1} 위)

    앵커 K 균등 추출, Y^(K) 생성, W = Y/‖Y‖₁, X = W/U (U ~ 균등).
    X 는 {‖x‖₁ > 1} 위의 파레토 분포를 따르고, sup 노름은 ‖X‖_∞ > 1 인 경우만 채택한다.

    Raises:
        SamplingError: 채택 없이 MAX_PROPOSALS 를 넘긴 경우
    """
    if n < 1:
        raise InvalidParameterError(f"Sample size must be >= 1, got {n}")
    if norm not in NORMS:
        raise InvalidParameterError(f"Unknown norm '{norm}'. Supported: {list(NORMS)}")
    gen = _generator(rng)
    profiles = _AnchoredProfiles(gamma)
    d = gamma.d

    accepted = []
    count = 0
    since_last = 0
    while count < n:
        size = max(MIN_PROPOSAL_BATCH, 2 * (n - count))
        anchors = gen.integers(0, d, size=size)
        logy = profiles.log_profiles(anchors, gen)
        radius = 1.0 / (1.0 - gen.random(size))  # P(R > r) = 1/r

        logy -= logy.max(axis=1, keepdims=True)
        y = np.exp(logy)
        x = radius[:, None] * y / y.sum(axis=1, keepdims=True)
        keep = row_norms(x, norm) > 1.0
        x = x[keep]

        if x.shape[0] == 0:
            since_last += size
            if since_last > settings.MAX_PROPOSALS:
                raise SamplingError(
                    f"Pareto sampler exceeded {settings.MAX_PROPOSALS} proposals without acceptance (d={d})"
                )
            continue
        since_last = 0
        take = x[: n - count]
        accepted.append(take)
        count += take.shape[0]

    samples = np.vstack(accepted)
    logger.info(f"📊 Sampled {n} exact HR-Pareto points (d={d}, norm={norm})")
    return ExceedanceBatch(samples=samples, n_u=n, source="exact_pareto", norm=norm)


def sample_max_stable(gamma: Variogram, n: int, rng: RngLike) -> np.ndarray:
    """극치 함수 방식의 정확한 최대 안정 HR 표본 (단위 Fréchet 주변분포, n x d)

    좌표 k 마다 포아송 점 ζ = 1/(E₁ + E₂ + ...) 를 내림차순으로 생성하고
    이전 좌표에서 현재 최댓값을 넘지 않는 함수만 반영한다.

    Raises:
        SamplingError: 반복 한도 초과
    """
    if n < 1:
        raise InvalidParameterError(f"Sample size must be >= 1, got {n}")
    gen = _generator(rng)
    profiles = _AnchoredProfiles(gamma)
    d = gamma.d
    z = np.zeros((n, d))

    for k in range(d):
        arrivals = gen.standard_exponential(n)
        zeta = 1.0 / arrivals
        active = np.flatnonzero(zeta > z[:, k])
        rounds = 0
        while active.size:
            rounds += 1
            if rounds > settings.MAX_PROPOSALS:
                raise SamplingError(f"Max-stable sampler exceeded {settings.MAX_PROPOSALS} rounds at coordinate {k + 1}")
            logy = profiles.log_profiles(np.full(active.size, k), gen)
            candidate = zeta[active, None] * np.exp(logy)
            if k == 0:
                ok = np.ones(active.size, dtype=bool)
            else:
                ok = np.all(candidate[:, :k] < z[active, :k], axis=1)
            rows = active[ok]
            z[rows] = np.maximum(z[rows], candidate[ok])

            arrivals[active] += gen.standard_exponential(active.size)
            zeta[active] = 1.0 / arrivals[active]
            active = active[zeta[active] > z[active, k]]

    logger.info(f"📊 Sampled {n} max-stable HR vectors (d={d})")
    return z


def frechet_quantile(quantile: float) -> float:
    """단위 Fréchet 분포의 분위수: −1/log(q)"""
    if not 0.0 < quantile < 1.0:
        raise InvalidParameterError(f"Quantile must be in (0, 1), got {quantile}")
    return -1.0 / math.log(quantile)


def threshold_exceedances(raw, quantile: float = settings.QUANTILE, norm: str = "sup") -> ExceedanceBatch:
    """노름이 u = −1/log(q) 를 넘는 행만 남기고 u 로 나눈다

    Raises:
        DomainError: 초과 표본이 없는 경우
    """
    u = frechet_quantile(quantile)
    data = np.asarray(raw, dtype=np.float64)
    if data.ndim != 2:
        raise InvalidParameterError(f"Expected an n x d matrix, got shape {data.shape}")
    scaled = data / u
    keep = row_norms(scaled, norm) > 1.0
    n_u = int(np.count_nonzero(keep))
    if n_u == 0:
        raise DomainError(f"No row exceeds the threshold u={u:.6g} (quantile {quantile})")
    logger.info(f"📊 Threshold u={u:.6g}: kept {n_u}/{data.shape[0]} rows ({n_u / data.shape[0]:.1%})")
    return ExceedanceBatch(samples=scaled[keep], n_u=n_u, source="max_stable_thresholded", norm=norm)
