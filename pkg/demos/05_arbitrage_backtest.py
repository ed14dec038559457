"""Trading the naive potential model versus the local target-zone model."""
# %%
import numpy as np

from targetzone import BinConfig, EURCHF_FLOOR, SimConfig, StrategyConfig, estimate, fit_volatility, run_strategy, simulate
from targetzone.backtest import volatility_matched_potential
from targetzone.fixtures import target_zone_fixture, target_zone_spec

fixture = target_zone_fixture()
est = estimate(fixture, BinConfig(100))
beta, _ = fit_volatility(est.select(est.s_mid > EURCHF_FLOOR), EURCHF_FLOOR)
gap = fixture.values.mean() - EURCHF_FLOOR
pot = volatility_matched_potential(beta, gap, EURCHF_FLOOR)
print(pot, "s_eq=%.4f" % pot.s_eq)

# %%
# hourly samples: at 10 s a 1.5 pip round trip costs more than a typical move
hours = 10 * 365 * 24
strategy = StrategyConfig(pot.s_eq, cost_pips=1.5)
for name, spec in (("potential", pot), ("target zone", target_zone_spec())):
    paths = simulate(spec, SimConfig(hours, 5, seed=1, initial_s=pot.s_eq, tau=1.0))
    reports = [run_strategy(p, strategy) for p in paths]
    print(f"{name:12s} Sharpe", np.round([r.sharpe for r in reports], 2),
          " trades", [r.n_trades for r in reports])
