"""서비스 패키지"""
from services.solver import SufficientStats, fit, fit_basic, fit_path, precompute
from services.bench import run_experiment

__all__ = ["SufficientStats", "precompute", "fit", "fit_basic", "fit_path", "run_experiment"]
