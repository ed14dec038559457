"""Simulate the local target-zone model and read drift and volatility back from the path."""
# %%
import numpy as np

from targetzone import BinConfig, EURCHF_FLOOR, estimate, fit_krugman, ratio_test
from targetzone.fixtures import target_zone_fixture

ts = target_zone_fixture(n_steps=1_000_000)
print(len(ts), "samples,", ts.tau * 3600, "seconds apart")
print("gap to the floor: mean %.4f, max %.4f" % (ts.values.mean() - EURCHF_FLOOR, ts.values.max() - EURCHF_FLOOR))

# %%
est = estimate(ts, BinConfig(n_bins=100))
est = est.select(est.s_mid > EURCHF_FLOOR)
print(len(est), "bins reported")
for i in range(0, len(est), 15):
    print("s=%.4f  f=%+.2e  g=%.2e  n=%d" % (est.s_mid[i], est.f_hat[i], est.g_hat[i], est.count[i]))

# %%
fit = fit_krugman(est, EURCHF_FLOOR)
print(f"beta = {fit.beta_hat:.4e} +- {fit.beta_se:.1e}   (generated with 5.42e-3)")
print(f"alpha = {fit.alpha_hat:.2e} +- {fit.alpha_se:.1e}")
rt = ratio_test(fit)
print(f"sqrt(alpha)/beta = {rt.ratio:.2f} +- {rt.se:.2f}")
# a single path started at the floor pins beta well but not alpha;
# pooling many paths is what narrows the ratio (see the acceptance tests)
