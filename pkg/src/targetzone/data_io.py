"""Tick-data ingestion and coarse-graining to equally spaced medians.

Supported CSV layouts (detected from the header)::

    timestamp,price
    timestamp,bid,ask

Timestamps are ISO-8601 (UTC unless an offset is given) or integer epoch
milliseconds.  When bid and ask are present the mid price is used.
"""
from __future__ import annotations

import csv
import logging
import math
import os
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DataError
from .timeseries import TimeSeries

log = logging.getLogger(__name__)

DATA_DIR_ENV = "TARGETZONE_DATA_DIR"
MAX_MALFORMED_FRACTION = 0.01


@dataclass(frozen=True)
class TickRecord:
    timestamp: datetime
    price: float
    bid: float | None = None
    ask: float | None = None

    @classmethod
    def from_quote(cls, timestamp, bid, ask):
        if not bid <= ask:
            raise ValueError(f"bid {bid} above ask {ask}")
        return cls(timestamp, 0.5 * (bid + ask), bid, ask)

    @property
    def epoch_seconds(self) -> float:
        return self.timestamp.timestamp()


def resolve_path(path, data_dir=None) -> Path:
    """Relative paths are looked up under ``data_dir`` or ``$TARGETZONE_DATA_DIR``."""
    path = Path(path)
    base = data_dir or os.environ.get(DATA_DIR_ENV)
    if not path.is_absolute() and base is not None and not path.exists():
        return Path(base) / path
    return path


def _parse_time(text: str) -> datetime:
    text = text.strip()
    if text.isdigit():
        return datetime.fromtimestamp(int(text) / 1000.0, tz=timezone.utc)
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt


def _positive_float(text):
    x = float(text)
    if not (x > 0 and math.isfinite(x)):
        raise ValueError(f"non-positive or non-finite price {text!r}")
    return x


def parse_ticks(lines: Iterable[str], source: str = "<ticks>"):
    """Parse CSV lines into sorted ticks.

    Returns ``(records, malformed)`` where ``malformed`` lists
    ``(line_number, line)`` pairs that were skipped.

    Raises
    ------
    DataError
        Unrecognised header, or more than 1% malformed rows.
    """
    reader = csv.reader(lines)
    header = next(reader, None)
    cols = [h.strip().lower() for h in header] if header else []
    if cols == ["timestamp", "price"]:
        quoted = False
    elif cols == ["timestamp", "bid", "ask"]:
        quoted = True
    else:
        raise DataError(f"{source}: unrecognised header {header!r}; "
                        "expected 'timestamp,price' or 'timestamp,bid,ask'")

    records, malformed = [], []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        try:
            if len(row) != len(cols):
                raise ValueError("wrong number of fields")
            ts = _parse_time(row[0])
            if quoted:
                records.append(TickRecord.from_quote(ts, _positive_float(row[1]), _positive_float(row[2])))
            else:
                records.append(TickRecord(ts, _positive_float(row[1])))
        except ValueError:
            malformed.append((lineno, ",".join(row)))

    total = len(records) + len(malformed)
    if total and len(malformed) > MAX_MALFORMED_FRACTION * total:
        sample = "; ".join(f"line {n}: {text!r}" for n, text in malformed[:3])
        raise DataError(f"{source}: {len(malformed)} of {total} rows malformed (e.g. {sample})")
    if malformed:
        log.warning("%s: skipped %d malformed rows", source, len(malformed))
    records.sort(key=lambda r: r.timestamp)
    return records, malformed


def load_ticks(path, data_dir=None) -> list[TickRecord]:
    """Read, validate and time-sort a tick CSV (see module docstring for layouts)."""
    path = resolve_path(path, data_dir)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    with path.open(newline="") as fh:
        records, _ = parse_ticks(fh, source=str(path))
    return records


def coarse_grain_arrays(
    epoch_seconds: np.ndarray,
    prices: np.ndarray,
    window: float = 10.0,
    max_gap_slots: int | None = 5,
) -> TimeSeries:
    """Array form of :func:`coarse_grain`; times in seconds since the Unix epoch."""
    t = np.asarray(epoch_seconds, dtype=float)
    p = np.asarray(prices, dtype=float)
    if len(t) == 0:
        raise DataError("no ticks to coarse-grain")
    if not window > 0:
        raise DataError("window must be positive")
    if np.any(p <= 0) or not np.all(np.isfinite(p)):
        raise DataError("prices must be positive and finite")

    slot = np.floor(t / window).astype(np.int64)
    first = slot.min()
    slot -= first
    n_slots = int(slot.max()) + 1

    order = np.lexsort((p, slot))
    slot_sorted, p_sorted = slot[order], p[order]
    starts = np.flatnonzero(np.r_[True, slot_sorted[1:] != slot_sorted[:-1]])
    counts = np.diff(np.r_[starts, len(slot_sorted)])
    # lower median for even counts
    medians = p_sorted[starts + (counts - 1) // 2]
    filled_slots = slot_sorted[starts]

    filled = np.zeros(n_slots, dtype=bool)
    filled[filled_slots] = True
    level = np.empty(n_slots)
    level[filled_slots] = medians
    last = np.where(filled, np.arange(n_slots), 0)
    np.maximum.accumulate(last, out=last)
    level = level[last]

    valid = None
    if max_gap_slots is not None and n_slots > 1:
        # carried-forward slots inside empty runs longer than max_gap_slots are stale
        run_start = np.r_[True, filled[1:] != filled[:-1]]
        run_id = np.cumsum(run_start) - 1
        run_len = np.bincount(run_id)
        stale = ~filled & (run_len[run_id] > max_gap_slots)
        valid = ~(stale[:-1] | stale[1:])

    t0 = datetime.fromtimestamp(float(first) * window, tz=timezone.utc)
    return TimeSeries(np.log(level), window / 3600.0, t0, valid)


def coarse_grain(ticks: Sequence[TickRecord], window: float = 10.0, max_gap_slots: int | None = 5) -> TimeSeries:
    """Equally spaced log-median series from irregular ticks.

    Slots ``[k window, (k+1) window)`` (seconds since the Unix epoch) run from
    the slot of the first tick to that of the last one.  Each non-empty slot
    gets the lower median of its prices; empty slots repeat the previous
    value.  Increments touching a carried-forward slot inside a run of more
    than ``max_gap_slots`` empty slots are flagged invalid (``None`` disables
    the flagging).  The step is ``window / 3600`` hours.
    """
    if len(ticks) == 0:
        raise DataError("no ticks to coarse-grain")
    t = np.array([r.epoch_seconds for r in ticks])
    p = np.array([r.price for r in ticks])
    return coarse_grain_arrays(t, p, window, max_gap_slots)
