"""Simulation, estimation and testing of target-zone diffusion processes."""

__version__ = "0.1.0"

from .errors import DataError, DomainError, EstimationError, IntegrationError, TargetZoneError
from .timeseries import TEN_SECONDS, TimeSeries, read_series_csv, write_series_csv
from .sde import (
    EURCHF_FLOOR, GBM, BoundaryPolicy, HinderedDiffusion, KrugmanLocal, PhysicalPotential,
    PowerLawVolatility, SimConfig, drift, moment_scaling_experiment, simulate, volatility,
)
from .km import BinConfig, KMEstimate, estimate, robustness_scan
from .fit import fit_drift, fit_krugman, fit_power_exponent, fit_volatility, lr_test, ratio_test
from .krugman import KrugmanParams, local_expansion, s_of_v, solve_pasting, v_of_s
from .backtest import StrategyConfig, run_strategy
from .data_io import coarse_grain, load_ticks

__all__ = [
    "__version__",
    "TargetZoneError", "DomainError", "IntegrationError", "EstimationError", "DataError",
    "TEN_SECONDS", "TimeSeries", "read_series_csv", "write_series_csv",
    "EURCHF_FLOOR", "GBM", "PhysicalPotential", "KrugmanLocal", "HinderedDiffusion",
    "PowerLawVolatility", "BoundaryPolicy", "SimConfig", "simulate", "drift", "volatility",
    "moment_scaling_experiment",
    "BinConfig", "KMEstimate", "estimate", "robustness_scan",
    "fit_volatility", "fit_drift", "fit_krugman", "ratio_test", "fit_power_exponent", "lr_test",
    "KrugmanParams", "solve_pasting", "s_of_v", "v_of_s", "local_expansion",
    "StrategyConfig", "run_strategy",
    "load_ticks", "coarse_grain",
]
