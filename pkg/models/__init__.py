"""도메인 모델"""
from models.variogram import CovarianceAt, Variogram
from models.parameters import LambdaUpper, Location, ThetaMatrix
from models.weights import LOG_WEIGHT, WEIGHTS, WeightFunction
from models.estimate import Estimate, FitConfig, PathResult
from models.batch import ExceedanceBatch
from models.experiment import ExperimentSpec, Metrics, TableRow

__all__ = [
    "Variogram",
    "CovarianceAt",
    "Location",
    "LambdaUpper",
    "ThetaMatrix",
    "WeightFunction",
    "LOG_WEIGHT",
    "WEIGHTS",
    "FitConfig",
    "Estimate",
    "PathResult",
    "ExceedanceBatch",
    "ExperimentSpec",
    "Metrics",
    "TableRow",
]
