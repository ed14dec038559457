"""Fits of the local target-zone model and the volatility-exponent test.

The local model has constant drift ``alpha`` and volatility
``beta * sqrt(s - barrier)``; under Krugman's solution ``sqrt(alpha) / beta``
equals 1/2.

:func:`lr_test` compares that model with ``beta * (s - barrier)**mu`` using
the Gaussian likelihood of the increments,

    ds_i ~ Normal(alpha * tau, beta**2 * (s_i - barrier)**(2 mu) * tau),

with ``alpha`` and ``beta`` profiled out in closed form, and refers twice the
log-likelihood gain to a chi-square distribution with one degree of freedom.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from scipy import optimize, stats

from .errors import DataError, DomainError, EstimationError
from .km import KMEstimate
from .timeseries import TimeSeries

GAP_FLOOR = 1e-8


def fit_volatility(est: KMEstimate, barrier: float, weighted: bool = False) -> tuple[float, float]:
    """Least-squares scale of ``g_hat ~ beta * sqrt(s_mid - barrier)``.

    ``beta = sum(w g x) / sum(w x**2)`` with ``x = sqrt(s_mid - barrier)`` and
    unit weights, or bin counts as weights when ``weighted``.  The standard
    error comes from the residual variance with ``K - 1`` degrees of freedom.
    """
    if len(est) < 2:
        raise EstimationError("need at least two bins to fit the volatility")
    gap = est.s_mid - barrier
    if np.any(gap <= 0):
        raise EstimationError("bins at or below the barrier; restrict the estimate first")
    x = np.sqrt(gap)
    w = est.count.astype(float) if weighted else np.ones_like(x)
    sxx = np.sum(w * x * x)
    beta = float(np.sum(w * est.g_hat * x) / sxx)
    resid = est.g_hat - beta * x
    s2 = np.sum(w * resid**2) / (len(x) - 1)
    return beta, float(math.sqrt(s2 / sxx))


def fit_drift(est: KMEstimate) -> tuple[float, float]:
    """Count-weighted mean of ``f_hat`` and its standard error.

    The error is estimated from the between-bin scatter,
    ``sqrt(K/(K-1) * sum(n**2 (f - alpha)**2)) / sum(n)``.
    """
    k = len(est)
    if k < 2:
        raise EstimationError("need at least two bins to fit the drift")
    n = est.count.astype(float)
    alpha = float(np.sum(n * est.f_hat) / n.sum())
    se = math.sqrt(k / (k - 1) * np.sum(n**2 * (est.f_hat - alpha) ** 2)) / n.sum()
    return alpha, float(se)


@dataclass(frozen=True)
class RatioTest:
    """``sqrt(alpha)/beta`` against 1/2; ``applicable`` is false when ``alpha <= 0``."""

    ratio: float
    se: float
    z: float
    applicable: bool


@dataclass(frozen=True)
class FitReport:
    beta_hat: float
    beta_se: float
    alpha_hat: float
    alpha_se: float
    ratio: float
    ratio_se: float
    barrier: float
    n_bins: int

    def to_dict(self):
        return {k: _json_float(v) for k, v in asdict(self).items()}


def _ratio(alpha, alpha_se, beta, beta_se):
    if not alpha > 0:
        return float("nan"), float("nan")
    r = math.sqrt(alpha) / beta
    # first-order propagation, independent errors
    d_alpha = 1.0 / (2.0 * math.sqrt(alpha) * beta)
    d_beta = -math.sqrt(alpha) / beta**2
    return r, math.hypot(d_alpha * alpha_se, d_beta * beta_se)


def fit_krugman(est: KMEstimate, barrier: float, weighted: bool = False) -> FitReport:
    """Fit ``alpha`` and ``beta`` and propagate them to ``sqrt(alpha)/beta``.

    The ratio fields are ``nan`` when ``alpha_hat <= 0``.
    """
    beta, beta_se = fit_volatility(est, barrier, weighted=weighted)
    alpha, alpha_se = fit_drift(est)
    ratio, ratio_se = _ratio(alpha, alpha_se, beta, beta_se)
    return FitReport(beta, beta_se, alpha, alpha_se, ratio, ratio_se, barrier, len(est))


def ratio_test(fit: FitReport) -> RatioTest:
    if not fit.alpha_hat > 0:
        return RatioTest(float("nan"), float("nan"), float("nan"), False)
    r, se = _ratio(fit.alpha_hat, fit.alpha_se, fit.beta_hat, fit.beta_se)
    if se > 0:
        z = (r - 0.5) / se
    else:
        z = 0.0 if r == 0.5 else math.copysign(math.inf, r - 0.5)
    return RatioTest(r, se, z, True)


# ---------------------------------------------------------------------------
# likelihood


@dataclass(frozen=True)
class PowerFit:
    """Maximum-likelihood fit of ``g = beta * gap**mu`` with constant drift."""

    mu: float
    mu_se: float
    alpha: float
    beta: float
    loglik: float
    n: int


@dataclass(frozen=True)
class LRTestReport:
    mu_hat: float
    mu_se: float
    beta_free: float
    alpha_free: float
    beta_null: float
    alpha_null: float
    loglik_null: float
    loglik_alt: float
    lr_statistic: float
    p_value: float
    n_increments: int
    barrier: float

    def to_dict(self):
        return {k: _json_float(v) for k, v in asdict(self).items()}


class _Increments:
    """Sufficient data for the profiled Gaussian increment likelihood."""

    def __init__(self, series: TimeSeries, barrier: float, eps: float = GAP_FLOOR):
        x = series.values[:-1] - barrier
        dx = np.diff(series.values)
        if series.valid is not None:
            x, dx = x[series.valid], dx[series.valid]
        if np.any(x < -eps):
            raise DomainError("samples below the barrier")
        self.log_gap = np.log(np.maximum(x, eps))
        self.sum_log_gap = float(self.log_gap.sum())
        self.dx = dx
        self.tau = series.tau
        self.n = len(dx)

    def profile(self, mu):
        """(loglik, alpha, beta) at exponent ``mu`` with alpha, beta maximised out."""
        # rescale weights to avoid overflow at large |mu|
        e = -2.0 * mu * self.log_gap
        w = np.exp(e - e.max())
        alpha = float(np.sum(w * self.dx) / (self.tau * w.sum()))
        r = self.dx - alpha * self.tau
        ss = float(np.sum(w * r * r))
        if not ss > 0:
            raise EstimationError("degenerate likelihood: increments carry no variance")
        log_beta2 = math.log(ss / (self.n * self.tau)) + e.max()
        ll = -0.5 * (
            self.n * (math.log(2 * math.pi * self.tau) + log_beta2) + 2 * mu * self.sum_log_gap + self.n
        )
        return ll, alpha, math.exp(0.5 * log_beta2)


def fit_power_exponent(
    series: TimeSeries,
    barrier: float,
    bounds: tuple[float, float] = (0.05, 3.0),
    *,
    eps: float = GAP_FLOOR,
    xtol: float = 1e-6,
) -> PowerFit:
    """Maximise the profile likelihood in ``mu`` over ``bounds``.

    A 64-point grid brackets the maximum, which a bounded Brent search then
    refines to ``xtol``.  The standard error of ``mu`` is the inverse square
    root of the observed curvature of the profile log-likelihood.
    """
    inc = _Increments(series, barrier, eps)
    if inc.n < 2:
        raise EstimationError("need increments to fit")
    if not np.any(inc.dx != 0):
        raise EstimationError("degenerate likelihood: all increments are zero")
    lo, hi = bounds
    grid = np.linspace(lo, hi, 64)
    ll = np.array([inc.profile(m)[0] for m in grid])
    j = int(np.argmax(ll))
    a, b = grid[max(j - 1, 0)], grid[min(j + 1, len(grid) - 1)]
    res = optimize.minimize_scalar(
        lambda m: -inc.profile(m)[0], bounds=(a, b), method="bounded", options={"xatol": xtol}
    )
    mu = float(res.x)
    best, alpha, beta = inc.profile(mu)
    if ll[j] > best:
        mu = float(grid[j])
        best, alpha, beta = inc.profile(mu)

    h = 1e-4
    curv = (inc.profile(mu + h)[0] - 2 * best + inc.profile(mu - h)[0]) / h**2
    mu_se = 1.0 / math.sqrt(-curv) if curv < 0 else float("inf")
    return PowerFit(mu, mu_se, alpha, beta, best, inc.n)


def lr_test(
    series: TimeSeries,
    barrier: float,
    *,
    null_mu: float = 0.5,
    bounds: tuple[float, float] = (0.05, 3.0),
    eps: float = GAP_FLOOR,
    min_increments: int = 100,
) -> LRTestReport:
    """Likelihood-ratio test of ``mu = null_mu`` against a free exponent.

    Sample gaps below ``eps`` are floored at ``eps``.  The p-value is the
    chi-square(1) survival function of the statistic (Wilks).

    Raises
    ------
    DataError
        Fewer than ``min_increments`` usable increments.
    EstimationError
        All increments are zero.
    """
    inc = _Increments(series, barrier, eps)
    if inc.n < min_increments:
        raise DataError(f"need at least {min_increments} increments, got {inc.n}")
    alt = fit_power_exponent(series, barrier, bounds, eps=eps)
    ll0, alpha0, beta0 = inc.profile(null_mu)
    stat = 2.0 * (alt.loglik - ll0)
    p = float(stats.chi2.sf(max(stat, 0.0), df=1))
    return LRTestReport(
        mu_hat=alt.mu,
        mu_se=alt.mu_se,
        beta_free=alt.beta,
        alpha_free=alt.alpha,
        beta_null=beta0,
        alpha_null=alpha0,
        loglik_null=ll0,
        loglik_alt=alt.loglik,
        lr_statistic=stat,
        p_value=min(max(p, 0.0), 1.0),
        n_increments=inc.n,
        barrier=barrier,
    )


# ---------------------------------------------------------------------------
# JSON


def _json_float(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def write_json(report, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    return path


def read_fit_report(path) -> FitReport:
    data = json.loads(Path(path).read_text())
    data = {k: (float("nan") if v is None else v) for k, v in data.items()}
    return FitReport(**{k: data[k] for k in FitReport.__dataclass_fields__})
