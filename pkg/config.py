"""환경 설정 모듈"""
import os
from dotenv import load_dotenv

# .env 파일 로드
load_dotenv()


class Settings:
    """추정/시뮬레이션 설정"""

    # 좌표 하강법 (coordinate descent)
    TOL: float = float(os.getenv("HR_TOL", "1e-8"))
    MAX_SWEEPS: int = int(os.getenv("HR_MAX_SWEEPS", "10000"))
    # 1차 최적성 조건 허용치 (시작점 기울기 크기 대비)
    KKT_TOL: float = float(os.getenv("HR_KKT_TOL", "1e-6"))

    # 수치 안정성 가드
    COND_LIMIT: float = float(os.getenv("HR_COND_LIMIT", "1e12"))
    ROWSUM_TOL: float = float(os.getenv("HR_ROWSUM_TOL", "1e-8"))
    CND_TOL: float = float(os.getenv("HR_CND_TOL", "1e-10"))

    # 시뮬레이션
    MAX_PROPOSALS: int = int(os.getenv("HR_MAX_PROPOSALS", "1000000"))
    QUANTILE: float = float(os.getenv("HR_QUANTILE", "0.95"))
    SEED: int = int(os.getenv("HR_SEED", "0"))

    # 벤치마크 병렬 처리 (1 = 순차 실행, 타이밍 측정용)
    THREADS: int = int(os.getenv("HR_THREADS", "1"))

    # 출력 포맷 (유효 숫자)
    CSV_DIGITS: int = int(os.getenv("HR_CSV_DIGITS", "12"))
    JSON_DIGITS: int = int(os.getenv("HR_JSON_DIGITS", "17"))

    LOG_LEVEL: str = os.getenv("HR_LOG_LEVEL", "WARNING").upper()

    # 튜닝 파라미터 배수 (r = 배수 * sqrt(log d / n))
    DEFAULT_GRID: list = [
        float(v) for v in os.getenv("HR_DEFAULT_GRID", "1000,100,10,1,0.1,0.01,0").split(",") if v.strip()
    ]


settings = Settings()
