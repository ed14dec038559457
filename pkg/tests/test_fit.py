import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import optimize, stats

from targetzone.errors import DataError, EstimationError
from targetzone.fit import (
    FitReport, fit_drift, fit_krugman, fit_power_exponent, fit_volatility, lr_test, ratio_test,
    read_fit_report, write_json,
)
from targetzone.km import KMEstimate
from targetzone.sde import EURCHF_FLOOR, GBM, KrugmanLocal, PowerLawVolatility, SimConfig, simulate
from targetzone.timeseries import TimeSeries


def make_est(s_mid, g_hat, f_hat=None, count=None):
    s_mid = np.asarray(s_mid, dtype=float)
    f_hat = np.zeros_like(s_mid) if f_hat is None else np.asarray(f_hat, dtype=float)
    count = np.full(len(s_mid), 10) if count is None else np.asarray(count)
    return KMEstimate(s_mid, f_hat, np.asarray(g_hat, dtype=float), count, 1.0, 0.1)


@settings(max_examples=30, deadline=None)
@given(st.floats(1e-4, 1.0), st.floats(-1.0, 1.0))
def test_exact_square_root_law_is_recovered(beta, barrier):
    s = barrier + np.linspace(0.01, 0.5, 25)
    est = make_est(s, beta * np.sqrt(s - barrier))
    b, se = fit_volatility(est, barrier)
    assert b == pytest.approx(beta, rel=1e-12)
    assert se < 1e-10 * beta


def test_volatility_least_squares_by_hand():
    # x = (1, 2), g = (1, 3): beta = (1 + 6) / 5
    est = make_est([1.0, 4.0], [1.0, 3.0])
    b, se = fit_volatility(est, 0.0)
    assert b == pytest.approx(1.4)
    resid = np.array([1.0 - 1.4, 3.0 - 2.8])
    assert se == pytest.approx(math.sqrt(np.sum(resid**2) / 1 / 5))
    bw, _ = fit_volatility(make_est([1.0, 4.0], [1.0, 3.0], count=[1, 3]), 0.0, weighted=True)
    assert bw == pytest.approx((1 * 1 + 3 * 6) / (1 + 12))


def test_volatility_rejects_bins_below_barrier():
    with pytest.raises(EstimationError):
        fit_volatility(make_est([0.0, 1.0], [1.0, 1.0]), 0.5)


def test_drift_weighted_mean_and_error():
    est = make_est([1, 2, 3], [1, 1, 1], f_hat=[1.0, 2.0, 4.0], count=[1, 2, 1])
    alpha, se = fit_drift(est)
    assert alpha == pytest.approx(9.0 / 4)
    n, f = np.array([1, 2, 1.0]), np.array([1.0, 2.0, 4.0])
    assert se == pytest.approx(math.sqrt(1.5 * np.sum(n**2 * (f - 2.25) ** 2)) / 4)


def test_ratio_and_delta_method():
    est = make_est([1.0, 4.0], [2.0, 4.0], f_hat=[1.0, 1.0])
    rep = fit_krugman(est, 0.0)
    assert rep.beta_hat == pytest.approx(2.0)
    assert rep.ratio == pytest.approx(0.5)
    rt = ratio_test(rep)
    assert rt.applicable and rt.z == 0.0
    negative = fit_krugman(make_est([1.0, 4.0], [2.0, 4.0], f_hat=[-1.0, -1.0]), 0.0)
    assert math.isnan(negative.ratio) and not ratio_test(negative).applicable
    rep2 = FitReport(1.0, 0.1, 0.25, 0.05, 0.5, 0.0, 0.0, 10)
    r = ratio_test(rep2)
    assert r.se == pytest.approx(math.hypot(0.05 / (2 * 0.5), 0.5 * 0.1))


def test_report_json_round_trip(tmp_path):
    rep = FitReport(1.0, 0.1, -0.2, 0.05, float("nan"), float("nan"), 0.18, 12)
    path = write_json(rep, tmp_path / "fit.json")
    assert json.loads(path.read_text())["ratio"] is None
    back = read_fit_report(path)
    assert back.beta_hat == 1.0 and math.isnan(back.ratio)


def full_mle(series, barrier):
    """Independent oracle: maximise the Gaussian likelihood over (alpha, log beta, mu)."""
    x = series.values[:-1] - barrier
    dx = np.diff(series.values)
    tau = series.tau

    def nll(p):
        a, lb, mu = p
        var = np.exp(2 * lb) * x ** (2 * mu) * tau
        return 0.5 * np.sum(np.log(2 * np.pi * var) + (dx - a * tau) ** 2 / var)

    start = [0.0, math.log(np.std(dx) / math.sqrt(tau) / np.mean(np.sqrt(x))), 0.5]
    res = optimize.minimize(nll, start, method="Nelder-Mead",
                            options={"xatol": 1e-10, "fatol": 1e-10, "maxiter": 20000, "maxfev": 20000})
    return res.x, -res.fun


def test_profile_likelihood_matches_full_optimisation():
    spec = PowerLawVolatility(alpha=0.0, beta=0.05, mu=0.8, barrier=0.0)
    ts = simulate(spec, SimConfig(3000, seed=4, initial_s=0.5, tau=0.1))[0]
    (alpha, log_beta, mu), ll = full_mle(ts, 0.0)
    fit = fit_power_exponent(ts, 0.0)
    assert fit.mu == pytest.approx(mu, abs=1e-4)
    assert fit.loglik == pytest.approx(ll, abs=1e-6 * abs(ll))
    assert fit.beta == pytest.approx(math.exp(log_beta), rel=1e-3)
    assert fit.n == 3000


def test_lr_statistic_and_p_value():
    spec = KrugmanLocal(1e-5, 5e-3, EURCHF_FLOOR)
    ts = simulate(spec, SimConfig(5000, seed=8, initial_s=EURCHF_FLOOR + 0.005))[0]
    rep = lr_test(ts, EURCHF_FLOOR)
    assert rep.lr_statistic >= 0
    assert rep.lr_statistic == pytest.approx(2 * (rep.loglik_alt - rep.loglik_null))
    assert rep.p_value == pytest.approx(stats.chi2.sf(rep.lr_statistic, 1))
    assert rep.n_increments == 5000
    assert abs(rep.mu_hat - 0.5) < 4 * rep.mu_se


def test_lr_rejects_clear_alternative():
    spec = PowerLawVolatility(alpha=0.0, beta=0.2, mu=1.0, barrier=EURCHF_FLOOR)
    ts = simulate(spec, SimConfig(20_000, seed=1, initial_s=EURCHF_FLOOR + 0.01))[0]
    rep = lr_test(ts, EURCHF_FLOOR)
    assert rep.p_value < 1e-6
    assert rep.mu_hat == pytest.approx(1.0, abs=0.05)


def test_lr_input_checks():
    with pytest.raises(DataError):
        lr_test(TimeSeries(np.linspace(1, 2, 50), 1.0), 0.0)
    with pytest.raises(EstimationError):
        lr_test(TimeSeries(np.ones(200), 1.0), 0.0)


def test_gbm_exponent_near_zero():
    ts = simulate(GBM(0.0, 1e-3), SimConfig(50_000, seed=3, initial_s=EURCHF_FLOOR))[0]
    fit = fit_power_exponent(ts, EURCHF_FLOOR - 0.15, bounds=(-3.0, 3.0))
    assert abs(fit.mu) < 4 * fit.mu_se
