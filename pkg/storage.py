"""파일 입출력 (CSV/JSON)

행렬: CSV (행 우선, 헤더 없음) 또는 {"d": int, "entries": [[...]]} JSON.
표본: n x d CSV + 사이드카 매니페스트 JSON.
추정 결과/경로: JSON. 인덱스는 파일에서 1-based.
"""
import csv
import json
import logging
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
from pydantic import BaseModel, ValidationError

from config import settings
from errors import ConfigError, DataFormatError
from models.estimate import Estimate, PathResult
from models.experiment import ExperimentSpec

logger = logging.getLogger(__name__)


class MatrixRecord(BaseModel):
    """행렬 JSON"""
    d: int
    entries: List[List[float]]


class SampleManifest(BaseModel):
    """표본 CSV 매니페스트"""
    d: int
    n: int
    n_u: int
    seed: Optional[int] = None
    source: str
    gamma_design: str = "brownian"
    quantile: Optional[float] = None
    norm: str = "sup"


class EstimateRecord(BaseModel):
    """추정 결과 JSON"""
    d: int
    r: float
    mu: List[float]
    lambda_upper: List[List[Union[int, float]]]  # [j, k, 값] (1-based, 0 이 아닌 원소만)
    objective: float
    sweeps: int
    converged: bool
    penalized: float
    flags: List[str] = []


class PathRecord(BaseModel):
    """정규화 경로 JSON"""
    grid: List[float]
    multipliers: Optional[List[float]] = None
    timings: List[float]
    estimates: List[EstimateRecord]


def _digits(value: float, digits: int) -> float:
    return float(format(float(value), f".{digits}g"))


def _cell(value: float) -> str:
    return format(float(value), f".{settings.CSV_DIGITS}g")


def _write_json(path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2)
        f.write("\n")


def _read_json(path) -> dict:
    try:
        with open(path, encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise DataFormatError(f"{path}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}")


def _read_csv_rows(path) -> List[List[float]]:
    """숫자 CSV 읽기 (잘못된 셀은 1-based 행/열과 함께 DataFormatError)"""
    rows = []
    width = None
    with open(path, newline="", encoding="utf-8") as f:
        for i, record in enumerate(csv.reader(f), start=1):
            if not record or all(not cell.strip() for cell in record):
                continue
            if width is None:
                width = len(record)
            elif len(record) != width:
                raise DataFormatError(f"{path}: row {i} has {len(record)} columns, expected {width}")
            values = []
            for j, cell in enumerate(record, start=1):
                try:
                    values.append(float(cell))
                except ValueError:
                    raise DataFormatError(f"{path}: row {i}, column {j}: cannot parse '{cell.strip()}' as a number")
                if not np.isfinite(values[-1]):
                    raise DataFormatError(f"{path}: row {i}, column {j}: value '{cell.strip()}' is not finite")
            rows.append(values)
    if not rows:
        raise DataFormatError(f"{path}: file contains no data")
    return rows


def write_matrix_csv(path, matrix) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        for row in np.asarray(matrix):
            writer.writerow([_cell(v) for v in row])


def write_matrix_json(path, matrix) -> None:
    arr = np.asarray(matrix, dtype=np.float64)
    record = MatrixRecord(d=arr.shape[0], entries=[[_digits(v, settings.JSON_DIGITS) for v in row] for row in arr])
    _write_json(path, record.model_dump())


def write_matrix(path, matrix) -> None:
    """확장자로 형식 결정 (.json 이면 JSON, 아니면 CSV)"""
    if Path(path).suffix.lower() == ".json":
        write_matrix_json(path, matrix)
    else:
        write_matrix_csv(path, matrix)


def read_matrix(path) -> np.ndarray:
    """정방 행렬 읽기 (.json 또는 CSV)

    Raises:
        DataFormatError: 파싱 실패 또는 정방이 아님
    """
    if Path(path).suffix.lower() == ".json":
        try:
            record = MatrixRecord.model_validate(_read_json(path))
        except ValidationError as e:
            raise DataFormatError(f"{path}: not a matrix record ({e.error_count()} problems)")
        arr = np.asarray(record.entries, dtype=np.float64)
        if arr.ndim != 2 or arr.shape != (record.d, record.d):
            raise DataFormatError(f"{path}: entries must be a {record.d}x{record.d} matrix")
        return arr
    arr = np.asarray(_read_csv_rows(path), dtype=np.float64)
    if arr.shape[0] != arr.shape[1]:
        raise DataFormatError(f"{path}: expected a square matrix, got {arr.shape[0]}x{arr.shape[1]}")
    return arr


def manifest_path(path) -> Path:
    """s.csv -> s.manifest.json"""
    p = Path(path)
    return p.with_name(f"{p.stem}.manifest.json")


def write_samples(path, samples, manifest: SampleManifest) -> Path:
    """표본 CSV 와 매니페스트 저장 (매니페스트 경로 반환)"""
    write_matrix_csv(path, samples)
    target = manifest_path(path)
    _write_json(target, manifest.model_dump())
    logger.info(f"✅ Wrote {manifest.n_u} samples to {path} (manifest {target})")
    return target


def read_samples(path) -> np.ndarray:
    """표본 CSV 읽기 (모든 값 > 0)

    Raises:
        DataFormatError: 숫자가 아니거나 양수가 아닌 셀 (1-based 행/열)
    """
    rows = _read_csv_rows(path)
    for i, row in enumerate(rows, start=1):
        for j, value in enumerate(row, start=1):
            if not value > 0.0:
                raise DataFormatError(f"{path}: row {i}, column {j}: value {value} is not positive")
    arr = np.asarray(rows, dtype=np.float64)
    if arr.shape[1] < 2:
        raise DataFormatError(f"{path}: need at least 2 columns, got {arr.shape[1]}")
    return arr


def estimate_record(est: Estimate) -> EstimateRecord:
    digits = settings.JSON_DIGITS
    return EstimateRecord(
        d=est.d,
        r=_digits(est.r, digits),
        mu=[_digits(v, digits) for v in est.mu.entries],
        lambda_upper=[[j + 1, k + 1, _digits(v, digits)] for j, k, v in est.lam.nonzeros()],
        objective=_digits(est.objective, digits),
        sweeps=est.sweeps_used,
        converged=est.converged,
        penalized=_digits(est.penalized, digits),
        flags=list(est.flags),
    )


def write_estimate(path, est: Estimate) -> None:
    _write_json(path, estimate_record(est).model_dump())


def write_path(path, result: PathResult) -> None:
    record = PathRecord(
        grid=list(result.grid),
        multipliers=list(result.multipliers) if result.multipliers is not None else None,
        timings=list(result.timings),
        estimates=[estimate_record(e) for e in result.estimates],
    )
    _write_json(path, record.model_dump())


def load_experiment_spec(path) -> ExperimentSpec:
    """실험 설정 JSON 읽기

    Raises:
        ConfigError: 파일 없음, JSON 오류, 잘못된 필드
    """
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError:
        raise ConfigError(f"Config file not found: {path}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}")
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    return ExperimentSpec.from_dict(data)
