"""Is the volatility exponent 1/2?  Likelihood-ratio test on two synthetic paths."""
# %%
from targetzone import EURCHF_FLOOR, PowerLawVolatility, SimConfig, lr_test, simulate
from targetzone.fixtures import target_zone_fixture

null_path = target_zone_fixture(n_steps=200_000)
rep = lr_test(null_path, EURCHF_FLOOR)
print(f"square-root path: mu_hat={rep.mu_hat:.3f} +- {rep.mu_se:.3f}  LR={rep.lr_statistic:.2f}  p={rep.p_value:.3f}")

# %%
alt = PowerLawVolatility(alpha=0.0, beta=0.2, mu=1.0, barrier=EURCHF_FLOOR)
alt_path = simulate(alt, SimConfig(20_000, seed=1, initial_s=EURCHF_FLOOR + 0.01))[0]
rep = lr_test(alt_path, EURCHF_FLOOR)
print(f"linear-volatility path: mu_hat={rep.mu_hat:.3f}  LR={rep.lr_statistic:.1f}  p={rep.p_value:.2e}")
