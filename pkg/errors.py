"""에러 정의

CLI 종료 코드(exit_code)와 메시지(detail)를 함께 전달한다.
0 성공, 1 실행/수치 오류, 2 사용법/설정 오류.
"""
from typing import Optional


class HRError(Exception):
    """기본 에러"""

    exit_code: int = 1

    def __init__(self, detail: str, exit_code: Optional[int] = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code


class InvalidParameterError(HRError, ValueError):
    """잘못된 파라미터 (Γ, Σ, Λ, Θ, 인덱스, 차원)"""


class SingularMatrixError(HRError):
    """특이 행렬 또는 조건수 초과"""

    def __init__(self, detail: str, m: Optional[int] = None):
        super().__init__(detail)
        self.m = m


class DomainError(HRError, ValueError):
    """정의역 위반 (양수가 아닌 좌표, 빈 배치)"""


class SamplingError(HRError, RuntimeError):
    """샘플러 반복 한도 초과"""


class DataFormatError(HRError):
    """CSV/JSON 파싱 실패 (파일, 행, 열 포함)"""


class ConfigError(HRError):
    """설정/플래그 오류"""

    exit_code = 2
