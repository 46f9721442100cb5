#!/usr/bin/env python3
"""
Hüsler–Reiss 스코어 매칭 CLI
시뮬레이션, 추정, 정규화 경로, 표 재현, 파라미터 변환을 제공합니다.

종료 코드: 0 성공, 1 실행/수치 오류, 2 사용법/설정 오류.
로그는 stderr, 기계 판독용 요약(JSON)은 stdout.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from joblib import cpu_count

from config import settings
from errors import ConfigError, HRError
from models.estimate import FitConfig
from models.parameters import ThetaMatrix
from models.variogram import Variogram
from models.weights import WEIGHTS, get_weight
from rng import RngState
from services.bench import emit_table, print_table, run_experiment, zero_ratio
from services.conversions import gamma_m_spread, hr_to_mu_lambda, lambda_to_theta, theta_to_gamma
from services.simulate import (
    brownian_variogram,
    frechet_quantile,
    sample_hr_pareto,
    sample_max_stable,
    threshold_exceedances,
)
from services.solver import fit, fit_path, grid_values, normalize_multipliers, precompute
import storage

logger = logging.getLogger(__name__)


def _emit(summary: dict) -> None:
    """stdout 에 한 줄 JSON 요약"""
    print(json.dumps(summary, sort_keys=True))


def _parse_multipliers(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--grid-multipliers: cannot parse '{text}' as comma-separated numbers")


def _fit_config(args) -> FitConfig:
    return FitConfig(
        tol=args.tol,
        max_sweeps=args.max_sweeps,
        kkt_tol=args.kkt_tol,
        penalize_mu=args.penalize_mu,
        penalize_diag=args.penalize_diag,
    )


def cmd_simulate(args) -> int:
    """합성 표본 생성"""
    if args.d < 2:
        raise ConfigError(f"--d must be >= 2, got {args.d}")
    if args.n < 1:
        raise ConfigError(f"--n must be >= 1, got {args.n}")
    if not 0.0 < args.quantile < 1.0:
        raise ConfigError(f"--quantile must be in (0, 1), got {args.quantile}")

    gamma = brownian_variogram(args.d)
    rng = RngState(seed=args.seed).generator()
    if args.design == "pareto":
        batch = sample_hr_pareto(gamma, args.n, rng, norm=args.norm)
        quantile = None
    else:
        raw = sample_max_stable(gamma, args.n, rng)
        batch = threshold_exceedances(raw, args.quantile, norm=args.norm)
        quantile = args.quantile
        logger.info(f"📊 Threshold u={frechet_quantile(args.quantile):.6g}")

    manifest = storage.SampleManifest(
        d=args.d,
        n=args.n,
        n_u=batch.n_u,
        seed=args.seed,
        source=batch.source,
        gamma_design="brownian",
        quantile=quantile,
        norm=args.norm,
    )
    manifest_file = storage.write_samples(args.out, batch.samples, manifest)
    _emit({"out": str(args.out), "manifest": str(manifest_file), "d": args.d, "n": args.n, "n_u": batch.n_u})
    return 0


def cmd_fit(args) -> int:
    """단일 r 추정"""
    if args.r < 0:
        raise ConfigError(f"--r must be >= 0, got {args.r}")
    samples = storage.read_samples(args.data)
    stats = precompute(samples, get_weight(args.weight), threads=args.threads)
    est = fit(stats, args.r, None, _fit_config(args))
    if args.out:
        storage.write_estimate(args.out, est)
    _emit({
        "objective": est.objective,
        "sweeps": est.sweeps_used,
        "converged": est.converged,
        "zero_ratio": zero_ratio(est.lam),
        "flags": list(est.flags),
    })
    return 0


def cmd_path(args) -> int:
    """정규화 경로 (웜 스타트)"""
    multipliers = normalize_multipliers(_parse_multipliers(args.grid_multipliers))
    if not multipliers:
        raise ConfigError("--grid-multipliers must contain at least one value")
    samples = storage.read_samples(args.data)
    n, d = samples.shape
    stats = precompute(samples, get_weight(args.weight), threads=args.threads)
    grid = grid_values(multipliers, d, n)
    result = fit_path(stats, grid, _fit_config(args), multipliers)
    if args.out:
        storage.write_path(args.out, result)
    _emit({
        "grid": list(result.grid),
        "zero_ratio": [zero_ratio(e.lam) for e in result.estimates],
        "converged": [e.converged for e in result.estimates],
    })
    return 0


def _replicate_threads(args, spec, timing: bool) -> int:
    """복제 병렬 스레드 수 (시간 측정 실행은 순차, 지표 전용 실행은 기본 병렬)"""
    if args.threads is not None:
        threads = args.threads
    elif timing:
        threads = spec.threads
    else:
        threads = max(spec.threads, cpu_count())
    if timing and threads > 1:
        logger.warning(f"⚠️ Replicate parallelism ({threads} threads) is for --no-timing runs; running sequentially")
        threads = 1
    return threads


def cmd_reproduce(args) -> int:
    """설정 파일로 시뮬레이션 표 재현"""
    spec = storage.load_experiment_spec(args.config)
    timing = not args.no_timing
    threads = _replicate_threads(args, spec, timing)
    logger.info(f"📊 Replicate threads: {threads}")
    result = run_experiment(spec, threads=threads, timing=timing)
    fmt = args.format or ("json" if Path(args.out).suffix.lower() == ".json" else "csv")
    emit_table(result.table, fmt, args.out, extended=args.extended)
    print_table(result.table)
    for failure in result.failures:
        logger.warning(f"⚠️ {failure}")
    _emit({"out": str(args.out), "rows": len(result.table), "failures": result.failures})
    return 1 if not result.table else 0


def cmd_convert(args) -> int:
    """파라미터 변환"""
    matrix = storage.read_matrix(args.input)
    d = matrix.shape[0]
    if not 1 <= args.m <= d:
        raise ConfigError(f"--m must be in 1..{d}, got {args.m}")
    m = args.m - 1
    summary = {"what": args.what, "d": d, "m": args.m, "out": str(args.out)}

    if args.what == "gamma2theta":
        _, lam = hr_to_mu_lambda(Variogram(matrix), m)
        storage.write_matrix(args.out, lambda_to_theta(lam).entries)
    elif args.what == "theta2gamma":
        theta = ThetaMatrix(matrix)
        storage.write_matrix(args.out, theta_to_gamma(theta, m).entries)
        summary["gamma_m_spread"] = gamma_m_spread(theta)
    else:
        mu, lam = hr_to_mu_lambda(Variogram(matrix), m)
        payload = {
            "d": d,
            "m": args.m,
            "mu": [float(v) for v in mu.entries],
            "lambda_upper": [[j + 1, k + 1, v] for j, k, v in lam.nonzeros()],
        }
        with open(args.out, "w", encoding="utf-8") as f:
            json.dump(payload, f, indent=2)
            f.write("\n")
    _emit(summary)
    return 0


def _add_threads_flag(p: argparse.ArgumentParser) -> None:
    # 하위 명령 뒤에도 허용 (SUPPRESS: 앞쪽 값을 덮어쓰지 않음)
    p.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="worker threads")


def _add_fit_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol", type=float, default=settings.TOL, help="relative objective decrease per sweep")
    p.add_argument("--max-sweeps", type=int, default=settings.MAX_SWEEPS)
    p.add_argument("--kkt-tol", type=float, default=settings.KKT_TOL, help="subgradient residual relative to the starting gradient")
    p.add_argument("--weight", choices=sorted(WEIGHTS), default="log")
    p.add_argument("--penalize-mu", action="store_true", help="also penalize |mu_j|")
    p.add_argument("--penalize-diag", action="store_true", help="also penalize |Theta_jj|")
    _add_threads_flag(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hr-scorematch",
        description="Score-matching estimation of generalized Huesler-Reiss models",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug (stderr)")
    parser.add_argument("--threads", type=int, default=None, help="worker threads (replicates, precompute)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate synthetic exceedances")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--design", choices=["pareto", "maxstable"], default="pareto")
    p.add_argument("--quantile", type=float, default=settings.QUANTILE)
    p.add_argument("--seed", type=int, default=settings.SEED)
    p.add_argument("--norm", choices=["sup", "l1"], default="sup")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("fit", help="fit at a single tuning parameter r")
    p.add_argument("--data", required=True)
    p.add_argument("--r", type=float, default=0.0)
    p.add_argument("--out")
    _add_fit_flags(p)
    p.set_defaults(handler=cmd_fit)

    p = sub.add_parser("path", help="warm-started regularization path")
    p.add_argument("--data", required=True)
    p.add_argument(
        "--grid-multipliers",
        default=",".join(format(v, "g") for v in settings.DEFAULT_GRID),
        help="comma-separated multipliers of sqrt(log d / n)",
    )
    p.add_argument("--out")
    _add_fit_flags(p)
    p.set_defaults(handler=cmd_path)

    p = sub.add_parser("reproduce", help="run a replicated experiment from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--extended", action="store_true", help="append extra diagnostic columns")
    p.add_argument("--no-timing", action="store_true", help="write zero timings (byte-reproducible tables)")
    _add_threads_flag(p)
    p.set_defaults(handler=cmd_reproduce)

    p = sub.add_parser("convert", help="convert between parameter representations")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--what", choices=["gamma2theta", "theta2gamma", "gamma2mulambda"], required=True)
    p.add_argument("--m", type=int, default=1, help="anchor index (1-based)")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_convert)
    return parser


def setup_logging(verbose: int) -> None:
    if verbose >= 2:
        level = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = getattr(logging, settings.LOG_LEVEL, logging.WARNING)
    logging.basicConfig(
        stream=sys.stderr,
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        force=True,
    )


def main(argv: Optional[List[str]] = None) -> int:
    """메인 함수"""
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose)

    if args.threads is not None and args.threads < 1:
        print(f"❌ --threads must be >= 1, got {args.threads}", file=sys.stderr)
        return 2
    if args.command != "reproduce" and args.threads is None:
        args.threads = settings.THREADS

    try:
        return args.handler(args)
    except HRError as e:
        print(f"❌ {e.detail}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        target = e.filename or ""
        print(f"❌ I/O error {target}: {e.strerror or e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
