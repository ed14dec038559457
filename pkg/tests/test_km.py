import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from targetzone.errors import DataError, DomainError, EstimationError
from targetzone.km import BinConfig, estimate, read_estimate_csv, robustness_scan, write_estimate_csv
from targetzone.sde import EURCHF_FLOOR, KrugmanLocal, SimConfig, simulate
from targetzone.timeseries import TimeSeries


def naive_estimate(values, tau, k):
    """Loop implementation of the binned conditional moments."""
    lo, hi = min(values), max(values)
    width = (hi - lo) / k
    sums = [[0, 0.0, 0.0] for _ in range(k)]
    for a, b in zip(values[:-1], values[1:]):
        j = min(int((a - lo) / width), k - 1)
        sums[j][0] += 1
        sums[j][1] += b - a
        sums[j][2] += (b - a) ** 2
    mids = [lo + (j + 0.5) * width for j in range(k)]
    return [(mids[j], n, s1 / (tau * n), math.sqrt(s2 / (tau * n))) for j, (n, s1, s2) in enumerate(sums) if n]


def test_matches_loop_oracle():
    rng = np.random.default_rng(3)
    values = np.cumsum(rng.normal(size=500))
    est = estimate(TimeSeries(values, 0.1), BinConfig(7, min_count=2))
    oracle = [row for row in naive_estimate(values.tolist(), 0.1, 7) if row[1] >= 2]
    np.testing.assert_allclose(est.s_mid, [r[0] for r in oracle])
    np.testing.assert_array_equal(est.count, [r[1] for r in oracle])
    np.testing.assert_allclose(est.f_hat, [r[2] for r in oracle], rtol=1e-10)
    np.testing.assert_allclose(est.g_hat, [r[3] for r in oracle], rtol=1e-10)


def test_hand_computed_two_bins():
    # range [0, 2] -> bins [0, 1) and [1, 2]; the last sample (2.0) has no successor
    ts = TimeSeries([0.0, 1.0, 0.5, 2.0], tau=0.5)
    est = estimate(ts, BinConfig(2, min_count=2))
    np.testing.assert_allclose(est.s_mid, [0.5])
    np.testing.assert_array_equal(est.count, [2])
    assert est.f_hat[0] == pytest.approx((1.0 + 1.5) / (0.5 * 2))
    assert est.g_hat[0] == pytest.approx(math.sqrt((1.0 + 2.25) / (0.5 * 2)))
    assert est.n_unreported == 1


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-5, 5, allow_nan=False), min_size=3, max_size=300), st.integers(2, 50))
def test_counts_cover_every_increment(values, k):
    ts = TimeSeries(values, 1.0)
    try:
        est = estimate(ts, BinConfig(k, min_count=2))
    except EstimationError:
        return
    assert est.count.sum() + est.n_unreported == len(values) - 1
    assert np.all(est.count >= 2) and len(est) <= k
    assert np.all(np.diff(est.s_mid) > 0)


@settings(max_examples=20, deadline=None)
@given(st.floats(-1, 1), st.floats(0.01, 2), st.integers(2, 30))
def test_linear_path_has_constant_drift_and_no_extra_volatility(slope, tau, k):
    values = slope * tau * np.arange(200)
    est = estimate(TimeSeries(values, tau), BinConfig(k, min_count=2))
    np.testing.assert_allclose(est.f_hat, slope, atol=1e-9)
    np.testing.assert_allclose(est.g_hat, abs(slope) * math.sqrt(tau), atol=1e-9)


def test_constant_series_uses_padded_range():
    est = estimate(TimeSeries(np.full(20, 0.2), 1.0), BinConfig(4, min_count=2))
    assert est.count.sum() == 19
    assert est.f_hat[0] == 0.0 and est.g_hat[0] == 0.0


def test_invalid_increments_are_skipped():
    ts = TimeSeries([0.0, 1.0, 0.0, 1.0, 0.0], 1.0, valid=[True, False, True, False])
    est = estimate(ts, BinConfig(2, min_count=2))
    assert est.count.sum() == 2
    assert est.f_hat[0] == pytest.approx(1.0)


def test_ensemble_pools_without_joining_paths():
    a = TimeSeries([0.0, 1.0], 1.0)
    b = TimeSeries([0.25, 0.0], 1.0)
    far = TimeSeries([10.0, 11.0], 1.0)
    est = estimate([a, b, far], BinConfig(2, min_count=2, value_range=(0.0, 1.0)))
    # a joined series would carry the increments 1.0 -> 0.25 and 0.0 -> 10.0
    np.testing.assert_array_equal(est.count, [2])
    assert est.f_hat[0] == pytest.approx((1.0 - 0.25) / 2)
    with pytest.raises(EstimationError):
        estimate([a, TimeSeries([0.0, 1.0], 2.0)])
    with pytest.raises(EstimationError):
        estimate([])


def test_config_validation():
    for kwargs in (dict(n_bins=1), dict(min_count=1), dict(value_range=(1.0, 1.0))):
        with pytest.raises(DomainError):
            BinConfig(**kwargs)


def test_csv_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    est = estimate(TimeSeries(np.cumsum(rng.normal(size=2000)), 0.1), BinConfig(20))
    back = read_estimate_csv(write_estimate_csv(est, tmp_path / "e.csv"))
    for name in ("s_mid", "f_hat", "g_hat", "count"):
        np.testing.assert_array_equal(getattr(back, name), getattr(est, name))
    assert back.tau is None
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n")
    with pytest.raises(DataError):
        read_estimate_csv(bad)


def test_recovers_square_root_volatility():
    beta = 5e-3
    spec = KrugmanLocal(beta**2 / 4, beta, EURCHF_FLOOR)
    ts = simulate(spec, SimConfig(300_000, seed=9, initial_s=EURCHF_FLOOR + 0.005))[0]
    est = estimate(ts, BinConfig(40, min_count=200))
    est = est.select(est.s_mid > EURCHF_FLOOR)
    expected = beta * np.sqrt(est.s_mid - EURCHF_FLOOR)
    # bins of width w around s_mid: sqrt of the average gap, to first order
    np.testing.assert_allclose(est.g_hat, expected, rtol=0.15)


def test_robustness_scan_rows():
    spec = KrugmanLocal(1e-5, 5e-3, EURCHF_FLOOR)
    ts = simulate(spec, SimConfig(100_000, seed=2, initial_s=EURCHF_FLOOR + 0.005))[0]
    scan = robustness_scan(ts, [20, 40], subsample_factors=(1, 2), barrier=EURCHF_FLOOR)
    assert [(r.n_bins, r.subsample) for r in scan.rows] == [(20, 1), (40, 1), (20, 2), (40, 2)]
    assert scan.max_relative_spread < 0.1
    np.testing.assert_allclose(scan.betas, 5e-3, rtol=0.1)
