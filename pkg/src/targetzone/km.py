"""Binned estimates of drift and volatility from sampled paths.

For bins ``B_l`` of the visited value range, with ``N_l`` increments starting
in bin ``l``::

    f_hat(s_l) = sum_{i in B_l} (s[i+1] - s[i]) / (tau * N_l)
    g_hat(s_l) = sqrt( sum_{i in B_l} (s[i+1] - s[i])**2 / (tau * N_l) )

where ``s_l`` is the bin midpoint.  Bins are half-open ``[left, right)``
except the last one, which also holds the maximum.  The last sample of a
series is never a bin member because it has no successor.

``g_hat`` is the raw second moment; the ``(f_hat * tau)**2`` correction is
``O(tau)`` and is not subtracted.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DataError, DomainError, EstimationError
from .timeseries import TimeSeries


@dataclass(frozen=True)
class BinConfig:
    """Binning for :func:`estimate`.

    ``value_range`` overrides the visited range; samples outside it are not
    binned.  Bins with fewer than ``min_count`` increments are not reported.
    """

    n_bins: int = 100
    value_range: tuple[float, float] | None = None
    min_count: int = 10

    def __post_init__(self):
        if int(self.n_bins) < 2:
            raise DomainError("n_bins must be >= 2")
        if int(self.min_count) < 2:
            raise DomainError("min_count must be >= 2")
        if self.value_range is not None:
            lo, hi = self.value_range
            if not lo < hi:
                raise DomainError("value_range must satisfy s_min < s_max")


@dataclass(frozen=True, eq=False)
class KMEstimate:
    """Per-bin drift and volatility estimates.

    Only bins with at least ``min_count`` increments are listed.
    ``n_unreported`` counts the increments that fell into omitted bins, so
    ``count.sum() + n_unreported`` is the number of binned increments.
    ``tau`` is ``None`` for estimates read back from CSV.
    """

    s_mid: np.ndarray
    f_hat: np.ndarray
    g_hat: np.ndarray
    count: np.ndarray
    tau: float | None
    bin_width: float
    n_unreported: int = 0

    def __len__(self):
        return len(self.s_mid)

    def select(self, mask) -> "KMEstimate":
        """Sub-estimate restricted to the bins where ``mask`` is true."""
        mask = np.asarray(mask, dtype=bool)
        dropped = int(self.count[~mask].sum())
        return KMEstimate(
            self.s_mid[mask], self.f_hat[mask], self.g_hat[mask], self.count[mask],
            self.tau, self.bin_width, self.n_unreported + dropped,
        )


def _as_ensemble(series) -> list[TimeSeries]:
    if isinstance(series, TimeSeries):
        return [series]
    out = list(series)
    if not out:
        raise EstimationError("no series given")
    return out


def estimate(series: TimeSeries | Sequence[TimeSeries], cfg: BinConfig = BinConfig()) -> KMEstimate:
    """Binned drift and volatility of one series or a pooled ensemble.

    An ensemble (a sequence of series sharing ``tau``) is binned on the joint
    value range and its increments are pooled; no increment links two series.
    Increments flagged invalid in ``TimeSeries.valid`` are skipped.

    Raises
    ------
    EstimationError
        If a series has fewer than two samples or every bin is under
        ``cfg.min_count``.
    """
    ensemble = _as_ensemble(series)
    tau = ensemble[0].tau
    for s in ensemble:
        if len(s) < 2:
            raise EstimationError("a series needs at least two samples")
        if s.tau != tau:
            raise EstimationError("all series of an ensemble must share tau")

    k = int(cfg.n_bins)
    if cfg.value_range is None:
        lo = min(float(s.values.min()) for s in ensemble)
        hi = max(float(s.values.max()) for s in ensemble)
        if hi == lo:
            pad = 1e-9 * max(abs(lo), 1.0)
            lo, hi = lo - pad, hi + pad
    else:
        lo, hi = map(float, cfg.value_range)
    edges = np.linspace(lo, hi, k + 1)

    n = np.zeros(k, dtype=np.int64)
    sum1 = np.zeros(k)
    sum2 = np.zeros(k)
    for s in ensemble:
        x = s.values[:-1]
        dx = np.diff(s.values)
        keep = (x >= lo) & (x <= hi)
        if s.valid is not None:
            keep &= s.valid
        if not keep.all():
            x, dx = x[keep], dx[keep]
        idx = np.searchsorted(edges, x, side="right") - 1
        np.minimum(idx, k - 1, out=idx)
        n += np.bincount(idx, minlength=k)
        sum1 += np.bincount(idx, weights=dx, minlength=k)
        sum2 += np.bincount(idx, weights=dx * dx, minlength=k)

    reported = n >= cfg.min_count
    if not reported.any():
        raise EstimationError(f"no bin holds at least {cfg.min_count} increments")
    nr = n[reported]
    mid = 0.5 * (edges[:-1] + edges[1:])
    return KMEstimate(
        s_mid=mid[reported],
        f_hat=sum1[reported] / (tau * nr),
        g_hat=np.sqrt(sum2[reported] / (tau * nr)),
        count=nr,
        tau=tau,
        bin_width=(hi - lo) / k,
        n_unreported=int(n[~reported].sum()),
    )


def write_estimate_csv(est: KMEstimate, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write("s_mid,f_hat,g_hat,count\n")
        for row in zip(est.s_mid.tolist(), est.f_hat.tolist(), est.g_hat.tolist(), est.count.tolist()):
            fh.write("%r,%r,%r,%d\n" % row)
    return path


def read_estimate_csv(path) -> KMEstimate:
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["s_mid", "f_hat", "g_hat", "count"]:
            raise DataError(f"{path}: expected header 's_mid,f_hat,g_hat,count', got {header!r}")
        try:
            rows = [(float(a), float(b), float(c), int(d)) for a, b, c, d in (r for r in reader if r)]
        except ValueError as exc:
            raise DataError(f"{path}: malformed row ({exc})") from None
    if not rows:
        raise DataError(f"{path}: no bins")
    mid, f, g, count = map(np.array, zip(*rows))
    width = float(np.min(np.diff(mid))) if len(mid) > 1 else float("nan")
    return KMEstimate(mid, f, g, count.astype(np.int64), None, width)


# ---------------------------------------------------------------------------
# robustness


@dataclass(frozen=True)
class ScanRow:
    n_bins: int
    subsample: int
    n_reported: int
    beta_hat: float
    beta_se: float
    alpha_hat: float


@dataclass(frozen=True)
class RobustnessScan:
    rows: tuple[ScanRow, ...]

    @property
    def betas(self) -> np.ndarray:
        return np.array([r.beta_hat for r in self.rows])

    @property
    def max_relative_spread(self) -> float:
        """``(max - min) / mean`` of the fitted volatility scale across the scan."""
        b = self.betas
        return float((b.max() - b.min()) / b.mean())


def robustness_scan(
    series: TimeSeries | Sequence[TimeSeries],
    K_values: Sequence[int],
    subsample_factors: Sequence[int] = (1,),
    *,
    barrier: float,
    min_count: int = 10,
) -> RobustnessScan:
    """Refit the square-root volatility law for every (bins, subsampling) pair.

    Subsampling by ``m`` keeps every ``m``-th sample and multiplies ``tau``
    by ``m``.
    """
    from .fit import fit_drift, fit_volatility

    ensemble = _as_ensemble(series)
    rows = []
    for m in subsample_factors:
        sub = [s.subsample(m) for s in ensemble]
        for k in K_values:
            est = estimate(sub, BinConfig(n_bins=int(k), min_count=min_count))
            est = est.select(est.s_mid > barrier)
            beta, beta_se = fit_volatility(est, barrier)
            alpha, _ = fit_drift(est)
            rows.append(ScanRow(int(k), int(m), len(est), beta, beta_se, alpha))
    return RobustnessScan(tuple(rows))
