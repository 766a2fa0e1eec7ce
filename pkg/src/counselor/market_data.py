"""Price/fundamentals ingestion and time-series preprocessing.

Covers the data plumbing every other module builds on: reading the NYSE
CSV files, trailing moving averages, windowed z-score normalization (with
exact denormalization), and conversion of price levels to profit rates.
"""

from __future__ import annotations

import csv
import datetime as dt
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DataIntegrityError,
    InsufficientHistoryError,
    ParseError,
)

# Fundamental features used downstream, in their fixed order.
FUNDAMENTAL_COLUMNS = (
    "Accounts Receivable",
    "Capital Expenditures",
    "Inventory",
    "Gross Margin",
    "Income Tax",
)
N_FUNDAMENTAL = len(FUNDAMENTAL_COLUMNS)

# std below this is treated as a flat window (sentinel 0 recorded).
_STD_FLOOR = 1e-12


@dataclass(frozen=True)
class PriceSeries:
    """Daily OHLCV series for one stock, indexed by trading day."""

    symbol: str
    days: tuple[dt.date, ...]
    open: np.ndarray
    close: np.ndarray
    low: np.ndarray
    high: np.ndarray
    volume: np.ndarray

    def __post_init__(self):
        n = len(self.days)
        for name in ("open", "close", "low", "high", "volume"):
            arr = getattr(self, name)
            if len(arr) != n:
                raise DataIntegrityError(
                    f"{self.symbol}: {name} has {len(arr)} rows, calendar has {n}"
                )
        for name in ("open", "close", "low", "high"):
            if not np.all(getattr(self, name) > 0):
                raise DataIntegrityError(f"{self.symbol}: non-positive {name} price")
        if not np.all(self.volume >= 0):
            raise DataIntegrityError(f"{self.symbol}: negative volume")
        if any(b <= a for a, b in zip(self.days, self.days[1:])):
            raise DataIntegrityError(f"{self.symbol}: dates not strictly increasing")

    def __len__(self) -> int:
        return len(self.days)


@dataclass(frozen=True)
class SmoothedSeries:
    """Trailing moving average of a series.

    ``values`` has the same length as the source; entries before
    ``source_offset`` are NaN and must be ignored.
    """

    values: np.ndarray
    window: int
    source_offset: int

    @property
    def valid(self) -> np.ndarray:
        return self.values[self.source_offset:]


@dataclass(frozen=True)
class NormalizationState:
    """Mean/std recorded for one normalized point so the transform inverts exactly."""

    window: int
    mean: float
    std: float  # 0 is the flat-window sentinel

    def denormalize(self, value: float) -> float:
        return value * self.std + self.mean


@dataclass(frozen=True)
class ReturnSeries:
    """Dimensionless day-over-day profit rates r(t) = (s(t+1) - s(t)) / s(t)."""

    values: np.ndarray
    start_index: int = 0  # index of the source day that r[0] refers to


@dataclass(frozen=True)
class FundamentalRecord:
    """One fiscal year of the five fundamental features for one stock."""

    symbol: str
    year: int
    features: np.ndarray

    def __post_init__(self):
        if len(self.features) != N_FUNDAMENTAL:
            raise DataIntegrityError(
                f"{self.symbol}/{self.year}: expected {N_FUNDAMENTAL} features, "
                f"got {len(self.features)}"
            )


@dataclass
class PriceIngestResult:
    series: dict[str, PriceSeries] = field(default_factory=dict)
    not_found: set[str] = field(default_factory=set)
    incomplete: set[str] = field(default_factory=set)


@dataclass
class FundamentalsIngestResult:
    records: dict[str, list[FundamentalRecord]] = field(default_factory=dict)
    lacking: set[str] = field(default_factory=set)


def ingest_prices(path, symbols) -> PriceIngestResult:
    """Read a ``prices.csv`` file and build one :class:`PriceSeries` per symbol.

    Expected header: date,symbol,open,close,low,high,volume.  Rows are
    sorted by date per symbol.  Symbols absent from the file land in
    ``not_found``; symbols whose calendar misses dates that other requested
    symbols trade on (late start, early end, or internal gaps) are returned
    but also flagged ``incomplete``.
    """
    wanted = set(symbols)
    rows: dict[str, list[tuple[dt.date, float, float, float, float, float]]] = {
        s: [] for s in wanted
    }
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        _require_columns(
            reader.fieldnames, ("date", "symbol", "open", "close", "low", "high", "volume"), path
        )
        for lineno, row in enumerate(reader, start=2):
            sym = row["symbol"]
            if sym not in wanted:
                continue
            try:
                day = _parse_date(row["date"])
                parsed = tuple(
                    float(row[c]) for c in ("open", "close", "low", "high", "volume")
                )
            except (ValueError, TypeError) as exc:
                raise ParseError(f"bad row for {sym}: {exc}", line=lineno) from None
            rows[sym].append((day, *parsed))

    result = PriceIngestResult()
    for sym in wanted:
        if not rows[sym]:
            result.not_found.add(sym)
    found = wanted - result.not_found

    calendars: dict[str, list[dt.date]] = {}
    for sym in found:
        rows[sym].sort(key=lambda r: r[0])
        days = [r[0] for r in rows[sym]]
        if any(b <= a for a, b in zip(days, days[1:])):
            raise DataIntegrityError(f"{sym}: duplicate or non-increasing dates")
        calendars[sym] = days

    # Reference calendar: union of all dates seen for the requested symbols.
    reference: set[dt.date] = set()
    for days in calendars.values():
        reference.update(days)
    for sym in found:
        if set(calendars[sym]) != reference:
            result.incomplete.add(sym)
        cols = list(zip(*rows[sym]))
        result.series[sym] = PriceSeries(
            symbol=sym,
            days=tuple(cols[0]),
            open=np.asarray(cols[1], dtype=float),
            close=np.asarray(cols[2], dtype=float),
            low=np.asarray(cols[3], dtype=float),
            high=np.asarray(cols[4], dtype=float),
            volume=np.asarray(cols[5], dtype=float),
        )
    return result


def ingest_fundamentals(path, symbols, years) -> FundamentalsIngestResult:
    """Read a ``fundamentals.csv`` file into per-year feature vectors.

    A symbol is flagged ``lacking`` (and gets no records) when any requested
    year is absent or any of the five feature cells is missing for it.
    Unparsable numeric cells raise :class:`ParseError` with the line number.
    """
    wanted = set(symbols)
    years = list(years)
    if not years:
        return FundamentalsIngestResult()
    per_symbol: dict[str, dict[int, np.ndarray]] = {s: {} for s in wanted}
    missing_cells: set[str] = set()

    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        _require_columns(
            reader.fieldnames, ("Ticker Symbol", "Period Ending") + FUNDAMENTAL_COLUMNS, path
        )
        for lineno, row in enumerate(reader, start=2):
            sym = row["Ticker Symbol"]
            if sym not in wanted:
                continue
            try:
                year = _parse_date(row["Period Ending"]).year
            except ValueError as exc:
                raise ParseError(f"bad period for {sym}: {exc}", line=lineno) from None
            if year not in years:
                continue
            values = []
            for col in FUNDAMENTAL_COLUMNS:
                cell = (row.get(col) or "").strip()
                if not cell:
                    missing_cells.add(sym)
                    break
                try:
                    values.append(float(cell))
                except ValueError:
                    raise ParseError(
                        f"unparsable {col!r} for {sym}: {cell!r}", line=lineno
                    ) from None
            else:
                per_symbol[sym][year] = np.asarray(values, dtype=float)

    result = FundamentalsIngestResult()
    for sym in wanted:
        have = per_symbol[sym]
        if sym in missing_cells or any(y not in have for y in years):
            result.lacking.add(sym)
            continue
        result.records[sym] = [
            FundamentalRecord(symbol=sym, year=y, features=have[y]) for y in sorted(years)
        ]
    return result


def moving_average(series, window: int) -> SmoothedSeries:
    """Trailing arithmetic mean over ``window`` days.

    s'(t) = (1/w) * sum_{k=0}^{w-1} s(t-k); the first w-1 positions are NaN.
    """
    series = np.asarray(series, dtype=float)
    if window < 1:
        raise ValueError("window must be >= 1")
    if len(series) < window:
        raise InsufficientHistoryError(
            f"need at least {window} points for the moving average, have {len(series)}"
        )
    out = np.full(len(series), np.nan)
    csum = np.concatenate(([0.0], np.cumsum(series)))
    out[window - 1:] = (csum[window:] - csum[:-window]) / window
    return SmoothedSeries(values=out, window=window, source_offset=window - 1)


def zscore_normalize(series, window: int):
    """Windowed z-score over the trailing ``window + 1`` points [t-w, t].

    Returns ``(normalized, states)`` where ``normalized[t]`` uses the mean and
    population std of ``series[t-w : t+1]`` and ``states[t]`` records them so
    :func:`denormalize` inverts exactly.  Positions ``t < window`` are NaN with
    ``None`` states.  A window with std below 1e-12 normalizes to 0 and records
    the sentinel ``std=0``.
    """
    series = np.asarray(series, dtype=float)
    if window < 1:
        raise ValueError("window must be >= 1")
    if len(series) < window + 1:
        raise InsufficientHistoryError(
            f"need at least {window + 1} points to normalize, have {len(series)}"
        )
    n = len(series)
    normalized = np.full(n, np.nan)
    states: list[NormalizationState | None] = [None] * n
    windows = np.lib.stride_tricks.sliding_window_view(series, window + 1)
    means = windows.mean(axis=1)
    stds = windows.std(axis=1)  # population convention
    for t in range(window, n):
        m, s = means[t - window], stds[t - window]
        if s < _STD_FLOOR:
            normalized[t] = 0.0
            states[t] = NormalizationState(window=window, mean=float(m), std=0.0)
        else:
            normalized[t] = (series[t] - m) / s
            states[t] = NormalizationState(window=window, mean=float(m), std=float(s))
    return normalized, states


def denormalize(values, states):
    """Invert :func:`zscore_normalize` point by point."""
    values = np.atleast_1d(np.asarray(values, dtype=float))
    out = np.empty_like(values)
    for i, (v, st) in enumerate(zip(values, states)):
        out[i] = st.denormalize(v)
    return out


def to_returns(series: SmoothedSeries) -> ReturnSeries:
    """Convert a smoothed price series to profit rates.

    r(t) = (s'(t+1) - s'(t)) / s'(t) over the valid range; output is one
    shorter than the valid input.
    """
    valid = series.valid
    if np.any(~np.isfinite(valid)) or np.any(valid <= 0):
        raise DataIntegrityError("profit rates need strictly positive prices")
    values = np.diff(valid) / valid[:-1]
    return ReturnSeries(values=values, start_index=series.source_offset)


def returns_from_values(values, start_index: int = 0) -> ReturnSeries:
    """Profit rates for a plain strictly-positive array (no smoothing step)."""
    values = np.asarray(values, dtype=float)
    if np.any(~np.isfinite(values)) or np.any(values <= 0):
        raise DataIntegrityError("profit rates need strictly positive prices")
    return ReturnSeries(values=np.diff(values) / values[:-1], start_index=start_index)


def _parse_date(text: str) -> dt.date:
    return dt.date.fromisoformat(text.strip()[:10])


def _require_columns(fieldnames, required, path):
    missing = [c for c in required if fieldnames is None or c not in fieldnames]
    if missing:
        raise ParseError(f"{path}: missing columns {missing}", line=1)
