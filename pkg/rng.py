"""재현 가능한 난수 생성

카운터 기반 Philox 생성기 하나만 사용한다. 키 = (seed, stream).
복제 실험 i 는 stream i 를 사용하므로 스레드 수와 무관하게 같은 표본이 나온다.
"""
from dataclasses import dataclass

import numpy as np

from errors import ConfigError

ALGORITHM = "philox"
_UINT64_MAX = 2**64 - 1


@dataclass(frozen=True)
class RngState:
    """시드와 스트림 번호"""
    seed: int
    stream: int = 0
    algorithm: str = ALGORITHM

    def __post_init__(self):
        if not 0 <= self.seed <= _UINT64_MAX:
            raise ConfigError(f"seed must be in [0, 2^64), got {self.seed}")
        if not 0 <= self.stream <= _UINT64_MAX:
            raise ConfigError(f"stream must be in [0, 2^64), got {self.stream}")
        if self.algorithm != ALGORITHM:
            raise ConfigError(f"Unsupported RNG algorithm '{self.algorithm}'")

    def generator(self) -> np.random.Generator:
        """새 Generator (호출할 때마다 스트림의 처음부터 시작)"""
        key = np.array([self.seed, self.stream], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def spawn(self, stream: int) -> "RngState":
        """같은 시드의 다른 스트림 (복제 실험 i -> stream i)"""
        return RngState(seed=self.seed, stream=stream, algorithm=self.algorithm)
