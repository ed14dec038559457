"""Deterministic synthetic data standing in for proprietary tick data."""
from __future__ import annotations

import math

import numpy as np

from .sde import EURCHF_FLOOR, KrugmanLocal, SimConfig, simulate
from .timeseries import TEN_SECONDS, TimeSeries

#: Volatility scale fitted on EUR/CHF under the 1.20 floor, per sqrt(hour).
FITTED_BETA = 5.42e-3
FIXTURE_SEED = 20110906
FIXTURE_START = math.log(1.21)


def target_zone_spec(beta: float = FITTED_BETA, barrier: float = EURCHF_FLOOR) -> KrugmanLocal:
    """Local Krugman model with ``alpha = beta**2 / 4``."""
    return KrugmanLocal(alpha=beta**2 / 4.0, beta=beta, barrier=barrier)


def target_zone_fixture(n_steps: int = 1_000_000, seed: int = FIXTURE_SEED,
                        initial_s: float = FIXTURE_START, tau: float = TEN_SECONDS) -> TimeSeries:
    """One 10-second path of :func:`target_zone_spec` starting at ``log(1.21)``."""
    cfg = SimConfig(n_steps=n_steps, n_paths=1, seed=seed, initial_s=initial_s, tau=tau)
    return simulate(target_zone_spec(), cfg)[0]


def synthetic_ticks(n_ticks: int, vol: float, seed: int, start_price: float = 1.6,
                    mean_spacing: float = 2.0, t_start: float = 1.2e9):
    """Irregular ticks of a driftless GBM.

    Inter-arrival times are exponential with mean ``mean_spacing`` seconds;
    ``vol`` is per sqrt(hour).  Returns ``(epoch_seconds, prices)``.
    """
    rng = np.random.default_rng(seed)
    dt = rng.exponential(mean_spacing, size=n_ticks)
    t = t_start + np.cumsum(dt)
    steps = vol * np.sqrt(dt / 3600.0) * rng.standard_normal(n_ticks)
    log_p = math.log(start_price) + np.cumsum(steps)
    return t, np.exp(log_p)
