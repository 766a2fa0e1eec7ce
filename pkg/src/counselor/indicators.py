"""Trend-strength (ADX family) and stop-and-reverse (SAR) indicators.

Index convention: arrays are 0-based and aligned to the stock's day index.
Day-over-day quantities (TR, PDM, MDM) need a previous day, so they start at
index 1; index 0 is never given an invented value.  Positions before an
indicator's first valid day are NaN.

Smoothing follows the seeded recurrence
    S(first) = mean of the seed window,  S(t) = [(p - 1) S(t-1) + x(t)] / p
so with period tau the smoothed TR/PDM/MDM validate at day tau+1, the
directional indicators and DX at day tau+1, and ADX (period 2*tau, seeded
with the first tau valid DX values) at day 2*tau + 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataIntegrityError, InsufficientHistoryError
from .market_data import PriceSeries

DEFAULT_TAU = 14

AF_STEP = 0.02
AF_MAX_STEPS = 10  # acceleration factor saturates at 0.20

UPTREND = "UT"
DOWNTREND = "DT"


@dataclass
class SarState:
    """Mutable scan state of the stop-and-reverse recurrence."""

    sar: float
    trend: str  # UPTREND or DOWNTREND
    ep: float
    af_steps: int  # af = AF_STEP * af_steps, 1..AF_MAX_STEPS

    @property
    def af(self) -> float:
        return AF_STEP * self.af_steps


@dataclass(frozen=True)
class AdxState:
    """Snapshot of the smoothed accumulators at one day of the scan."""

    tau: int
    str_: float
    spdm: float
    smdm: float
    adx: float

    def __post_init__(self):
        if min(self.str_, self.spdm, self.smdm) < 0:
            raise DataIntegrityError("smoothed accumulators must be non-negative")
        if not 0.0 <= self.adx <= 100.0:
            raise DataIntegrityError(f"adx {self.adx} outside [0, 100]")


@dataclass(frozen=True)
class IndicatorSeries:
    """ADX/SAR/SPDI/SMDI aligned to the stock's day index.

    ``valid_from`` is the first index at which all four are valid; ADX is the
    last to validate, at 2*tau + 1.
    """

    adx: np.ndarray
    sar: np.ndarray
    spdi: np.ndarray
    smdi: np.ndarray
    valid_from: int


def true_range(h: float, l: float, c_prev: float) -> float:
    """max(H - L, |H - C_prev|, |L - C_prev|) for a single bar."""
    if h < l:
        raise DataIntegrityError(f"inverted bar: high {h} < low {l}")
    return max(h - l, abs(h - c_prev), abs(l - c_prev))


def wilder_smooth(raw, tau: int) -> np.ndarray:
    """Seeded recursive smoothing of a dense series.

    Output[tau] is the mean of the first tau raw values; afterwards
    S(t) = [(tau - 1) S(t-1) + raw(t)] / tau.  Indices below tau are NaN.
    Note the seed position holds the mean of the values *before* it, exactly
    as the recurrence is written.
    """
    raw = np.asarray(raw, dtype=float)
    if len(raw) <= tau:
        raise InsufficientHistoryError(
            f"need more than {tau} points to smooth, have {len(raw)}"
        )
    return _seeded_smooth(raw, seed_count=tau, period=tau)


def directional_movements(h, l):
    """Plus/minus directional movements between consecutive days.

    PDM(k) = max(H(k+1) - H(k), 0) and MDM(k) = max(L(k) - L(k+1), 0); the
    simplified definitions are used as-is, with no mutual-exclusion rule.
    Outputs have length n-1; element k is the movement onto day k+1.
    """
    h = np.asarray(h, dtype=float)
    l = np.asarray(l, dtype=float)
    if len(h) != len(l):
        raise DataIntegrityError("high/low series must align")
    if len(h) < 2:
        raise InsufficientHistoryError("need at least 2 days for directional movements")
    pdm = np.maximum(np.diff(h), 0.0)
    mdm = np.maximum(-np.diff(l), 0.0)
    return pdm, mdm


def compute_adx(series: PriceSeries, tau: int = DEFAULT_TAU):
    """ADX, SPDI and SMDI series for one stock.

    SPDI = 100 * SPDM / STR, SMDI = 100 * SMDM / STR and
    DX = 100 * |SPDI - SMDI| / (SPDI + SMDI), with the conventions that a
    zero STR yields SPDI = SMDI = 0 and a zero SPDI + SMDI yields DX = 0.
    ADX smooths DX with period 2*tau, seeded from the first tau valid DX
    values, so it validates at index 2*tau + 1.
    """
    adx, spdi, smdi, _, _, _ = _adx_chain(series, tau)
    return adx, spdi, smdi


def adx_state(series: PriceSeries, tau: int, day: int) -> AdxState:
    """Accumulator snapshot (STR/SPDM/SMDM/ADX) at a fully valid day."""
    adx, _, _, str_, spdm, smdm = _adx_chain(series, tau)
    if day <= 2 * tau or day >= len(series):
        raise InsufficientHistoryError(
            f"day {day} has no complete indicator state (valid from {2 * tau + 1})"
        )
    return AdxState(
        tau=tau, str_=float(str_[day]), spdm=float(spdm[day]),
        smdm=float(smdm[day]), adx=float(adx[day]),
    )


def _adx_chain(series: PriceSeries, tau: int):
    n = len(series)
    if n <= 2 * tau + 1:
        raise InsufficientHistoryError(
            f"need more than {2 * tau + 1} days for ADX, have {n}"
        )
    h, l, c = series.high, series.low, series.close
    if np.any(h < l):
        raise DataIntegrityError(f"{series.symbol}: inverted bar (high < low)")

    # Day-over-day raw components, defined from index 1.
    tr = np.maximum.reduce(
        [h[1:] - l[1:], np.abs(h[1:] - c[:-1]), np.abs(l[1:] - c[:-1])]
    )
    pdm, mdm = directional_movements(h, l)

    str_ = _place(_seeded_smooth(tr, tau, tau), n, offset=1)
    spdm = _place(_seeded_smooth(pdm, tau, tau), n, offset=1)
    smdm = _place(_seeded_smooth(mdm, tau, tau), n, offset=1)

    spdi = np.full(n, np.nan)
    smdi = np.full(n, np.nan)
    valid = np.isfinite(str_)
    nonzero = valid & (str_ > 0)
    spdi[nonzero] = 100.0 * spdm[nonzero] / str_[nonzero]
    smdi[nonzero] = 100.0 * smdm[nonzero] / str_[nonzero]
    spdi[valid & ~nonzero] = 0.0
    smdi[valid & ~nonzero] = 0.0

    dx = np.full(n, np.nan)
    dsum = spdi + smdi
    pos = valid & (dsum > 0)
    dx[pos] = 100.0 * np.abs(spdi[pos] - smdi[pos]) / dsum[pos]
    dx[valid & ~pos] = 0.0

    first_dx = tau + 1
    adx = _place(_seeded_smooth(dx[first_dx:], seed_count=tau, period=2 * tau), n, offset=first_dx)
    return adx, spdi, smdi, str_, spdm, smdm


def compute_sar(
    series: PriceSeries,
    initial_trend: str = "auto",
    reversal: bool = True,
) -> np.ndarray:
    """Parabolic stop-and-reverse levels, NaN before index 4.

    At t=4 the level is the minimum of the last four lows (uptrend) or the
    maximum of the last four highs (downtrend); afterwards
    SAR(t) = SAR(t-1) + AF(t-1) * (EP(t-1) - SAR(t-1)).  EP is the extreme
    of the trailing four days (max high in UT, min low in DT) and AF starts
    at 0.02, gains 0.02 whenever EP changes, saturates at 0.2 and resets to
    0.02 on a trend flip.

    Conventions not fixed by the recurrence, both overridable:
    ``initial_trend="auto"`` picks UT when close(3) >= close(0); with
    ``reversal=True`` the trend flips when price crosses the level (UT:
    low < SAR, DT: high > SAR), resetting SAR to the prior EP.
    """
    n = len(series)
    if n < 5:
        raise InsufficientHistoryError(f"need at least 5 days for SAR, have {n}")
    h, l, c = series.high, series.low, series.close

    if initial_trend == "auto":
        trend = UPTREND if c[3] >= c[0] else DOWNTREND
    elif initial_trend in (UPTREND, DOWNTREND):
        trend = initial_trend
    else:
        raise ValueError(f"initial_trend must be 'auto', 'UT' or 'DT', got {initial_trend!r}")

    out = np.full(n, np.nan)
    if trend == UPTREND:
        state = SarState(sar=l[1:5].min(), trend=trend, ep=h[1:5].max(), af_steps=1)
    else:
        state = SarState(sar=h[1:5].max(), trend=trend, ep=l[1:5].min(), af_steps=1)
    out[4] = state.sar

    for t in range(5, n):
        sar_t = state.sar + state.af * (state.ep - state.sar)
        flipped = reversal and (
            (state.trend == UPTREND and l[t] < sar_t)
            or (state.trend == DOWNTREND and h[t] > sar_t)
        )
        if flipped:
            sar_t = state.ep
            state.trend = UPTREND if state.trend == DOWNTREND else DOWNTREND
            state.af_steps = 1
            state.ep = h[t - 3 : t + 1].max() if state.trend == UPTREND else l[t - 3 : t + 1].min()
        else:
            ep_t = h[t - 3 : t + 1].max() if state.trend == UPTREND else l[t - 3 : t + 1].min()
            if ep_t != state.ep:
                state.af_steps = min(state.af_steps + 1, AF_MAX_STEPS)
            state.ep = ep_t
        state.sar = sar_t
        out[t] = sar_t
    return out


def indicator_pipeline(series: PriceSeries, tau: int = DEFAULT_TAU) -> IndicatorSeries:
    """All four indicator series aligned to the stock's day index."""
    adx, spdi, smdi = compute_adx(series, tau)
    sar = compute_sar(series)
    return IndicatorSeries(
        adx=adx,
        sar=sar,
        spdi=spdi,
        smdi=smdi,
        valid_from=max(2 * tau + 1, 4),
    )


def _seeded_smooth(values: np.ndarray, seed_count: int, period: int) -> np.ndarray:
    out = np.full(len(values), np.nan)
    out[seed_count] = values[:seed_count].mean()
    for t in range(seed_count + 1, len(values)):
        out[t] = ((period - 1) * out[t - 1] + values[t]) / period
    return out


def _place(values: np.ndarray, n: int, offset: int) -> np.ndarray:
    out = np.full(n, np.nan)
    out[offset : offset + len(values)] = values
    return out
