"""End-to-end preparation: dataset to forecasts to backtest-ready arrays.

``prepare`` is the one expensive step (per-stock SVR training); everything
the CLI and HTTP service answer afterwards is cheap algebra over the
prepared arrays.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import fic
from .backtest import BacktestData
from .config import RunConfig
from .errors import CounselorError, MissingInputError
from .fic import CounselorRulebases
from .forecast import ForecastParams, ForecastResult, walk_forward_forecast
from .fuzzy import load_rulebase
from .indicators import indicator_pipeline
from .market_data import ingest_fundamentals, ingest_prices, moving_average

logger = logging.getLogger(__name__)


@dataclass
class Prepared:
    config: RunConfig
    data: BacktestData
    forecasts: dict[str, ForecastResult]
    fundamentals_symbols: tuple[str, ...]
    excluded: dict[str, str] = field(default_factory=dict)  # symbol -> reason
    rulebases: CounselorRulebases | None = None

    @property
    def symbols(self) -> tuple[str, ...]:
        return self.data.symbols

    def rulebases_or_default(self) -> CounselorRulebases:
        if self.rulebases is None:
            return fic.default_rulebases()
        return self.rulebases

    def fic_data(self) -> BacktestData:
        """Restriction to the stocks that have fundamental records."""
        keep = [i for i, s in enumerate(self.symbols) if s in self.fundamentals_symbols]
        if not keep:
            raise MissingInputError("no stock has fundamental records")
        return BacktestData(
            symbols=tuple(self.symbols[i] for i in keep),
            days=self.data.days,
            smoothed=self.data.smoothed[keep],
            predicted=self.data.predicted[keep],
            fundamentals=self.data.fundamentals,
        )


def load_rulebases(config: RunConfig) -> CounselorRulebases | None:
    if config.rulebase_dir is None:
        return None
    base = config.rulebase_dir

    def load(name):
        rb = load_rulebase(f"{base}/{name}")
        rb.check_completeness()
        return rb

    return CounselorRulebases(
        self_stock=load("self_stock.rules"),
        pairwise=load("pairwise_stocks.rules"),
        fundamental=load("fundamental.rules"),
    )


def prepare(config: RunConfig, symbols=None) -> Prepared:
    """Ingest, exclude unusable symbols, train and forecast every stock."""
    requested = tuple(symbols) if symbols is not None else config.universe
    prices = ingest_prices(config.prices_path, requested)
    fundamentals = ingest_fundamentals(
        config.fundamentals_path, requested, config.fundamentals_years
    )
    excluded: dict[str, str] = {}
    for sym in prices.not_found:
        excluded[sym] = "not found in prices file"
    for sym in prices.incomplete:
        excluded[sym] = "incomplete price series"

    usable = [s for s in requested if s in prices.series and s not in excluded]
    params = ForecastParams(
        window=config.window,
        smoothing=config.smoothing,
        c=config.svr_c,
        gamma=config.svr_gamma,
        epsilon=config.svr_epsilon,
        tol=config.svr_tol,
        max_iter=config.svr_max_iter,
    )

    forecasts: dict[str, ForecastResult] = {}
    kept: list[str] = []
    for sym in usable:
        series = prices.series[sym]
        try:
            indicators = indicator_pipeline(series, config.tau)
            forecasts[sym] = walk_forward_forecast(series, indicators, config.split, params)
        except CounselorError as exc:
            excluded[sym] = f"forecast failed: {exc}"
            logger.warning("excluding %s: %s", sym, exc)
            continue
        kept.append(sym)
    if not kept:
        raise MissingInputError("no usable symbol in the requested universe")

    calendars = {tuple(prices.series[s].days) for s in kept}
    if len(calendars) != 1:
        raise MissingInputError("complete symbols disagree on the trading calendar")
    days = next(iter(calendars))
    t = len(days)

    smoothed = np.full((len(kept), t), np.nan)
    predicted = np.full((len(kept), t), np.nan)
    for i, sym in enumerate(kept):
        smoothed[i] = moving_average(prices.series[sym].high, config.smoothing).values
        result = forecasts[sym]
        predicted[i, result.test_indices] = result.predictions

    data = BacktestData(
        symbols=tuple(kept),
        days=days,
        smoothed=smoothed,
        predicted=predicted,
        fundamentals=fundamentals.records,
    )
    return Prepared(
        config=config,
        data=data,
        forecasts=forecasts,
        fundamentals_symbols=tuple(s for s in kept if s in fundamentals.records),
        excluded=excluded,
        rulebases=load_rulebases(config),
    )


def expected_returns_at(data: BacktestData, day_index: int) -> np.ndarray:
    """Predicted next-day profit rate per stock at a decision day."""
    now = data.predicted[:, day_index]
    nxt = data.predicted[:, day_index + 1]
    if not (np.all(np.isfinite(now)) and np.all(np.isfinite(nxt))):
        raise MissingInputError(f"missing prediction around {data.days[day_index]}")
    return (nxt - now) / now


def realized_returns(data: BacktestData) -> np.ndarray:
    return np.diff(data.smoothed, axis=1) / data.smoothed[:, :-1]


def decision_day_range(data: BacktestData, covariance_window: int) -> tuple[int, int]:
    """First and last day index usable as a backtest decision day.

    A decision day needs predictions for itself and the next day, plus
    ``covariance_window`` realized returns of history.
    """
    finite = np.all(np.isfinite(data.predicted), axis=0)
    usable = finite[:-1] & finite[1:]  # prediction at d and d+1
    idx = np.flatnonzero(usable)
    idx = idx[idx >= covariance_window]
    idx = idx[idx <= len(data.days) - 2]  # realized return needs day d+1
    if len(idx) == 0:
        raise MissingInputError("no day has both forecasts and covariance history")
    return int(idx[0]), int(idx[-1])
