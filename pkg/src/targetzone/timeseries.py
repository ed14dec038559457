"""Uniformly sampled log-rate series and their CSV representation.

The CSV layout is a two-column file with header ``t,s``.  The time column is
either fractional hours since the series origin or ISO-8601 UTC timestamps;
:func:`read_series_csv` detects which one was written.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from .errors import DataError, DomainError

EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)

#: 10-second sampling, in hours.
TEN_SECONDS = 1.0 / 360.0


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Log-rate samples ``values`` spaced ``tau`` hours apart, starting at ``t0``.

    ``valid`` optionally flags which of the ``len(values) - 1`` increments may
    be used by estimators; increments spanning long data gaps are excluded
    this way.  ``None`` means every increment is usable.
    """

    values: np.ndarray
    tau: float
    t0: datetime = EPOCH
    valid: np.ndarray | None = field(default=None)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)  # own copy; the caller keeps write access
        if values.ndim != 1:
            raise DomainError("values must be one-dimensional")
        if not (self.tau > 0 and math.isfinite(self.tau)):
            raise DomainError(f"tau must be positive and finite, got {self.tau!r}")
        if not np.all(np.isfinite(values)):
            raise DomainError("all samples must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.valid is not None:
            valid = np.asarray(self.valid, dtype=bool).copy()
            if valid.shape != (max(len(values) - 1, 0),):
                raise DomainError("valid mask must have one entry per increment")
            valid.setflags(write=False)
            object.__setattr__(self, "valid", valid)

    def __len__(self):
        return len(self.values)

    @property
    def times(self) -> np.ndarray:
        """Sample times in hours since ``t0``."""
        return np.arange(len(self.values)) * self.tau

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.values)

    def subsample(self, factor: int) -> "TimeSeries":
        """Every ``factor``-th sample; the step becomes ``factor * tau``.

        An increment of the subsampled series is valid only if all the
        original increments it spans were valid.
        """
        factor = int(factor)
        if factor < 1:
            raise DomainError("subsample factor must be >= 1")
        if factor == 1:
            return self
        values = self.values[::factor]
        valid = None
        if self.valid is not None:
            n_inc = len(values) - 1
            spans = self.valid[: n_inc * factor].reshape(n_inc, factor)
            valid = spans.all(axis=1)
        return TimeSeries(values, self.tau * factor, self.t0, valid)

    def shifted(self, c: float) -> "TimeSeries":
        return TimeSeries(self.values + c, self.tau, self.t0, self.valid)


def write_series_csv(series: TimeSeries, path, time_format: str = "hours") -> Path:
    """Write ``series`` as ``t,s`` CSV.

    ``time_format`` is ``"hours"`` (fractional hours since ``t0``) or
    ``"iso"`` (ISO-8601 UTC timestamps).
    """
    path = Path(path)
    if time_format == "hours":
        t_col = [repr(float(t)) for t in series.times]
    elif time_format == "iso":
        start = series.t0
        if start.tzinfo is None:
            start = start.replace(tzinfo=timezone.utc)
        t_col = [
            (start + timedelta(hours=float(t))).isoformat(timespec="microseconds")
            for t in series.times
        ]
    else:
        raise DomainError(f"unknown time format {time_format!r}")
    with path.open("w", newline="") as fh:
        fh.write("t,s\n")
        fh.writelines(f"{t},{s!r}\n" for t, s in zip(t_col, series.values.tolist()))
    return path


def _parse_iso(text: str) -> datetime:
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt


def read_series_csv(path, tau: float | None = None) -> TimeSeries:
    """Read a ``t,s`` CSV written by :func:`write_series_csv`.

    The step is inferred from the first two time stamps unless ``tau`` is
    given.  Non-uniform spacing raises :class:`DataError`.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["t", "s"]:
            raise DataError(f"{path}: expected header 't,s', got {header!r}")
        rows = [r for r in reader if r]
    if not rows:
        raise DataError(f"{path}: no samples")
    try:
        values = np.array([float(r[1]) for r in rows])
    except (IndexError, ValueError) as exc:
        raise DataError(f"{path}: malformed sample ({exc})") from None

    first = rows[0][0].strip()
    try:
        hours = np.array([float(r[0]) for r in rows])
        t0 = EPOCH
    except ValueError:
        try:
            stamps = [_parse_iso(r[0].strip()) for r in rows]
        except ValueError as exc:
            raise DataError(f"{path}: unparseable time stamp {first!r}") from exc
        t0 = stamps[0]
        hours = np.array([(s - t0).total_seconds() / 3600.0 for s in stamps])

    if tau is None:
        if len(hours) < 2:
            raise DataError(f"{path}: cannot infer tau from a single sample")
        tau = float(hours[1] - hours[0])
    expected = np.arange(len(hours)) * tau + hours[0]
    if not np.allclose(hours, expected, rtol=0, atol=1e-6 * max(tau, 1e-12) + 1e-9 * np.abs(hours).max()):
        raise DataError(f"{path}: samples are not uniformly spaced")
    try:
        return TimeSeries(values, tau, t0)
    except DomainError as exc:
        raise DataError(f"{path}: {exc}") from None
