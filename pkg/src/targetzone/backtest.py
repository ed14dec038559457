"""Threshold mean-reversion strategy on a log-rate series.

Hold -1 unit (short the rate) while ``s > s_eq``, +1 unit while ``s < s_eq`` and
keep the previous position at ``s == s_eq``; the book starts flat.  The
position taken at sample ``i`` earns ``position * (s[i+1] - s[i])``.  Each
change of position is charged ``cost_pips * 1e-4`` in price units, converted
to log-return at the current level ``exp(s[i])``.

Sharpe ratios are annualised as ``mean / std * sqrt(steps per year)`` with
``steps per year = 365 * 24 / tau``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DomainError
from .sde import PhysicalPotential
from .timeseries import TimeSeries

PIP = 1e-4
HOURS_PER_YEAR = 365.0 * 24.0


@dataclass(frozen=True)
class StrategyConfig:
    s_eq: float
    cost_pips: float = 1.5
    position_size: float = 1.0

    def __post_init__(self):
        if not (self.cost_pips >= 0 and math.isfinite(self.cost_pips)):
            raise DomainError("cost_pips must be non-negative")
        if not (self.position_size > 0 and math.isfinite(self.position_size)):
            raise DomainError("position_size must be positive")


@dataclass(frozen=True, eq=False)
class BacktestReport:
    """Outcome of :func:`run_strategy`.

    ``sharpe`` is ``None`` when the step returns have zero variance.
    ``positions[i]`` is the position held over increment ``i``.
    """

    n_trades: int
    gross_pnl: float
    total_cost: float
    net_pnl: float
    sharpe: float | None
    steps_per_year: float
    step_returns: np.ndarray = field(repr=False)
    positions: np.ndarray = field(repr=False)

    def to_dict(self):
        return {
            "n_trades": self.n_trades,
            "gross_pnl": self.gross_pnl,
            "total_cost": self.total_cost,
            "net_pnl": self.net_pnl,
            "sharpe": self.sharpe,
            "steps_per_year": self.steps_per_year,
            "n_steps": int(len(self.step_returns)),
        }


def positions_for(values: np.ndarray, s_eq: float) -> np.ndarray:
    """Position held at every sample (0 until the first sample off the threshold)."""
    signal = -np.sign(values - s_eq)
    held = signal != 0
    # forward-fill the last non-zero signal
    idx = np.where(held, np.arange(len(values)), -1)
    np.maximum.accumulate(idx, out=idx)
    return np.where(idx >= 0, signal[np.maximum(idx, 0)], 0.0)


def run_strategy(series: TimeSeries, cfg: StrategyConfig) -> BacktestReport:
    s = series.values
    if len(s) < 1:
        raise DomainError("empty series")
    pos = positions_for(s, cfg.s_eq)[:-1] * cfg.position_size
    prev = np.concatenate(([0.0], pos[:-1]))
    changed = pos != prev
    cost = np.where(changed, cfg.cost_pips * PIP * np.exp(-s[:-1]) * cfg.position_size, 0.0)
    gross = pos * np.diff(s)
    returns = gross - cost
    steps_per_year = HOURS_PER_YEAR / series.tau
    sharpe = None
    if len(returns) > 1:
        sd = returns.std(ddof=1)
        if sd > 0:
            sharpe = float(returns.mean() / sd * math.sqrt(steps_per_year))
    return BacktestReport(
        n_trades=int(changed.sum()),
        gross_pnl=float(gross.sum()),
        total_cost=float(cost.sum()),
        net_pnl=float(gross.sum() - cost.sum()),
        sharpe=sharpe,
        steps_per_year=steps_per_year,
        step_returns=returns,
        positions=pos,
    )


def volatility_matched_potential(beta: float, gap: float, barrier: float,
                                 spread_fraction: float = 1.0 / 15.0) -> PhysicalPotential:
    """Naive potential model with the fitted local volatility at its equilibrium.

    The equilibrium sits ``gap`` above the barrier, the constant volatility
    equals ``beta * sqrt(gap)`` (the fitted square-root law there) and the
    restoring force is set so the stationary standard deviation of ``s`` is
    ``spread_fraction * gap``.  Small fractions keep paths well inside the
    potential well.
    """
    if not (gap > 0 and beta > 0 and spread_fraction > 0):
        raise DomainError("beta, gap and spread_fraction must be positive")
    beta, gap = float(beta), float(gap)
    vol = beta * math.sqrt(gap)
    k = vol**2 / (2.0 * (spread_fraction * gap) ** 2)
    F = k * gap / 2.0
    return PhysicalPotential(C=F * gap**2, F=F, vol=vol, barrier=barrier)


def write_report_json(report: BacktestReport, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    return path


def write_trade_log(series: TimeSeries, report: BacktestReport, path) -> Path:
    """CSV ``t,s,position,step_return`` (time in hours), one row per increment."""
    path = Path(path)
    t = series.times[:-1].tolist()
    with path.open("w", newline="") as fh:
        fh.write("t,s,position,step_return\n")
        for row in zip(t, series.values[:-1].tolist(), report.positions.tolist(), report.step_returns.tolist()):
            fh.write("%r,%r,%r,%r\n" % row)
    return path
