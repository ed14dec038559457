import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from targetzone.backtest import (
    PIP, StrategyConfig, positions_for, run_strategy, volatility_matched_potential, write_report_json,
    write_trade_log,
)
from targetzone.errors import DomainError
from targetzone.sde import GBM, SimConfig, simulate
from targetzone.timeseries import TimeSeries


def test_positions_forward_fill_and_start_flat():
    s = np.array([0.0, 0.0, 1.0, 0.0, -1.0, 0.0])
    np.testing.assert_array_equal(positions_for(s, 0.0), [0, 0, -1, -1, 1, 1])


def test_hand_computed_pnl():
    s = np.log([1.2, 1.25, 1.22, 1.18, 1.21])
    ts = TimeSeries(s, 1.0)
    rep = run_strategy(ts, StrategyConfig(math.log(1.2), cost_pips=2.0))
    # positions over increments: 0 (at s_eq), -1, -1, +1
    np.testing.assert_array_equal(rep.positions, [0, -1, -1, 1])
    gross = -(s[2] - s[1]) - (s[3] - s[2]) + (s[4] - s[3])
    cost = 2 * PIP / 1.25 + 2 * PIP / 1.18
    assert rep.n_trades == 2
    assert rep.gross_pnl == pytest.approx(gross)
    assert rep.total_cost == pytest.approx(cost)
    assert rep.net_pnl == pytest.approx(gross - cost)
    r = rep.step_returns
    assert rep.sharpe == pytest.approx(r.mean() / r.std(ddof=1) * math.sqrt(8760))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.1, 0.3), min_size=2, max_size=100), st.floats(0, 5), st.floats(0.1, 10))
def test_accounting_identity(values, cost, size):
    rep = run_strategy(TimeSeries(values, 0.5), StrategyConfig(0.2, cost, size))
    assert rep.net_pnl == rep.gross_pnl - rep.total_cost
    assert rep.total_cost >= 0
    assert rep.steps_per_year == 8760 / 0.5
    assert np.sum(rep.step_returns) == pytest.approx(rep.net_pnl, abs=1e-12)


def test_flat_series_has_no_sharpe():
    rep = run_strategy(TimeSeries(np.full(10, 0.2), 1.0), StrategyConfig(0.2))
    assert rep.sharpe is None and rep.n_trades == 0


@pytest.mark.slow
def test_no_edge_on_gbm_without_costs():
    cfg = SimConfig(4 * 8760, 100, seed=12, initial_s=0.2, tau=1.0)
    sharpes = np.array([run_strategy(p, StrategyConfig(0.2, cost_pips=0.0)).sharpe
                        for p in simulate(GBM(0.0, 1e-3), cfg)])
    # the annualised Sharpe of a fair game has unit variance per year of data
    assert abs(sharpes.mean()) < 3 * sharpes.std(ddof=1) / math.sqrt(len(sharpes))
    assert sharpes.std(ddof=1) == pytest.approx(0.5, rel=0.3)


def test_volatility_matched_potential():
    pot = volatility_matched_potential(5e-3, 0.03, 0.18)
    assert pot.s_eq == pytest.approx(0.21)
    assert pot.vol == pytest.approx(5e-3 * math.sqrt(0.03))
    assert pot.vol / math.sqrt(2 * pot.linear) == pytest.approx(0.03 / 15)
    with pytest.raises(DomainError):
        volatility_matched_potential(5e-3, -1.0, 0.18)


def test_outputs(tmp_path):
    ts = TimeSeries([0.1, 0.3, 0.2], 1.0)
    rep = run_strategy(ts, StrategyConfig(0.2, cost_pips=0.0))
    data = json.loads(write_report_json(rep, tmp_path / "r.json").read_text())
    assert data["n_steps"] == 2 and data["net_pnl"] == rep.net_pnl
    lines = write_trade_log(ts, rep, tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "t,s,position,step_return" and len(lines) == 3


def test_config_validation():
    with pytest.raises(DomainError):
        StrategyConfig(0.2, cost_pips=-1)
    with pytest.raises(DomainError):
        StrategyConfig(0.2, position_size=0)
