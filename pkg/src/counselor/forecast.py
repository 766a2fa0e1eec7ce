"""Next-day highest-price forecasting from windowed technical features.

Per stock, seven channels (open, close, high, low, volume after the moving
average; ADX and SAR raw) are z-scored with a trailing window and the last
``dp`` days of every channel concatenate into one feature vector.  The
target is the next day's normalized smoothed high; its normalization state
is the high channel's window ending on the last observed day, so the
prediction denormalizes without looking ahead.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field, replace

import numpy as np

from .backtest import hit_rate
from .errors import DimensionMismatchError, InsufficientHistoryError
from .indicators import IndicatorSeries
from .market_data import NormalizationState, PriceSeries, moving_average, zscore_normalize
from .svr import DEFAULT_C, DEFAULT_EPSILON, DEFAULT_GAMMA, SvrModel, train_svr

CHANNELS = ("open", "close", "high", "low", "volume", "adx", "sar")
SMOOTHED_CHANNELS = ("open", "close", "high", "low", "volume")
HIGH_CHANNEL = CHANNELS.index("high")

DEFAULT_WINDOW = 5  # feature/normalization window, days
DEFAULT_SMOOTHING = 50  # moving-average window, days
DEFAULT_SPLIT = 0.8


@dataclass(frozen=True)
class ForecastParams:
    window: int = DEFAULT_WINDOW
    smoothing: int = DEFAULT_SMOOTHING
    c: float = DEFAULT_C
    gamma: float = DEFAULT_GAMMA
    epsilon: float = DEFAULT_EPSILON
    # production solver settings; the near-flat kernel at the default gamma
    # needs a looser gap and a deeper iteration budget than toy problems
    tol: float = 1e-3
    max_iter: int = 50_000_000


@dataclass(frozen=True)
class FeatureWindow:
    """Concatenated per-channel normalized values for one prediction."""

    values: np.ndarray  # dimension 7 * window, day-major within each channel
    target_day: dt.date

    def __post_init__(self):
        if not np.all(np.isfinite(self.values)):
            raise ValueError("feature window contains non-finite entries")


@dataclass(frozen=True)
class TrainingSet:
    """Aligned design matrix, targets, and denormalization states.

    Row k predicts day ``target_indices[k]`` of the source series from the
    window ending the day before; ``states[k]`` denormalizes its target.
    """

    X: np.ndarray
    y: np.ndarray
    target_indices: np.ndarray
    target_days: tuple[dt.date, ...]
    states: tuple[NormalizationState, ...]
    smoothed_high: np.ndarray  # full-length, NaN before validity

    def __len__(self) -> int:
        return len(self.y)

    def sample(self, k: int) -> tuple[FeatureWindow, float]:
        return FeatureWindow(values=self.X[k], target_day=self.target_days[k]), float(self.y[k])


@dataclass(frozen=True)
class ForecastResult:
    symbol: str
    predictions: np.ndarray  # denormalized, dollars, one per test day
    normalized_predictions: np.ndarray
    expected_return: np.ndarray  # between consecutive predicted prices
    test_indices: np.ndarray  # day index of each prediction's target
    test_days: tuple[dt.date, ...]
    actual: np.ndarray  # smoothed high on the same days
    model: SvrModel


def build_channel_matrix(prices: PriceSeries, indicators: IndicatorSeries, smoothing: int):
    """Seven aligned channel rows (NaN where not yet valid)."""
    n = len(prices)
    rows = np.full((len(CHANNELS), n), np.nan)
    for c, name in enumerate(CHANNELS):
        if name in SMOOTHED_CHANNELS:
            rows[c] = moving_average(getattr(prices, name), smoothing).values
        else:
            rows[c] = getattr(indicators, name)
    return rows


def build_training_set(
    prices: PriceSeries,
    indicators: IndicatorSeries,
    window: int = DEFAULT_WINDOW,
    smoothing: int = DEFAULT_SMOOTHING,
) -> TrainingSet:
    """All (feature window, next-day normalized high) samples for one stock."""
    n = len(prices)
    channels = build_channel_matrix(prices, indicators, smoothing)
    normalized = np.full_like(channels, np.nan)
    high_states: list[NormalizationState | None] = [None] * n
    for c in range(len(CHANNELS)):
        row = channels[c]
        first = int(np.argmax(np.isfinite(row)))
        if not np.isfinite(row[first]):
            raise InsufficientHistoryError(f"channel {CHANNELS[c]} has no valid data")
        segment = row[first:]
        if len(segment) < window + 1:
            raise InsufficientHistoryError(
                f"channel {CHANNELS[c]}: {len(segment)} valid points, "
                f"need {window + 1} for normalization"
            )
        norm, states = zscore_normalize(segment, window)
        normalized[c, first:] = norm
        if c == HIGH_CHANNEL:
            for t, st in enumerate(states):
                if st is not None:
                    high_states[first + t] = st

    smoothed_high = channels[HIGH_CHANNEL]
    feature_ok = np.all(np.isfinite(normalized), axis=0)

    rows, targets, t_idx, t_days, t_states = [], [], [], [], []
    for t in range(window - 1, n - 1):
        if not np.all(feature_ok[t - window + 1 : t + 1]):
            continue
        state = high_states[t]
        if state is None or not np.isfinite(smoothed_high[t + 1]):
            continue
        rows.append(normalized[:, t - window + 1 : t + 1].reshape(-1))
        if state.std == 0.0:
            targets.append(0.0)
        else:
            targets.append((smoothed_high[t + 1] - state.mean) / state.std)
        t_idx.append(t + 1)
        t_days.append(prices.days[t + 1])
        t_states.append(state)
    if not rows:
        raise InsufficientHistoryError(
            f"{prices.symbol}: no day has enough history for a training sample"
        )
    return TrainingSet(
        X=np.array(rows),
        y=np.array(targets),
        target_indices=np.array(t_idx),
        target_days=tuple(t_days),
        states=tuple(t_states),
        smoothed_high=smoothed_high,
    )


def predict(model: SvrModel, window_values, state: NormalizationState):
    """Model output in normalized units and dollars for one feature window."""
    values = window_values.values if isinstance(window_values, FeatureWindow) else window_values
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or len(values) != model.support_vectors.shape[1]:
        raise DimensionMismatchError(
            f"window has {values.shape}, model expects {model.support_vectors.shape[1]}"
        )
    normalized = float(model.predict(values[None, :])[0])
    return normalized, state.denormalize(normalized)


def walk_forward_forecast(
    prices: PriceSeries,
    indicators: IndicatorSeries,
    split: float = DEFAULT_SPLIT,
    params: ForecastParams = ForecastParams(),
) -> ForecastResult:
    """Train on the first ``split`` fraction of samples, predict the rest.

    Each test day is predicted from its own trailing feature window with
    the model held fixed; expected returns come from consecutive predicted
    prices.
    """
    if not 0.0 < split < 1.0:
        raise ValueError("split must be inside (0, 1)")
    ts = build_training_set(prices, indicators, params.window, params.smoothing)
    m = len(ts)
    n_train = int(np.floor(split * m))
    if n_train < 2 or n_train >= m:
        raise InsufficientHistoryError(
            f"{prices.symbol}: split {split} leaves train={n_train} of {m} samples"
        )
    model = train_svr(
        ts.X[:n_train], ts.y[:n_train], c=params.c, gamma=params.gamma,
        epsilon=params.epsilon, tol=params.tol, max_iter=params.max_iter,
    )
    normalized = model.predict(ts.X[n_train:])
    states = ts.states[n_train:]
    dollars = np.array([st.denormalize(v) for v, st in zip(normalized, states)])
    expected = np.full(len(dollars) - 1, np.nan)
    if len(dollars) > 1:
        expected = np.diff(dollars) / dollars[:-1]
    return ForecastResult(
        symbol=prices.symbol,
        predictions=dollars,
        normalized_predictions=np.asarray(normalized),
        expected_return=expected,
        test_indices=ts.target_indices[n_train:],
        test_days=ts.target_days[n_train:],
        actual=ts.smoothed_high[ts.target_indices[n_train:]],
        model=model,
    )


@dataclass(frozen=True)
class GridCell:
    window: int
    c: float
    gamma: float
    mean_hit_rate: float


@dataclass(frozen=True)
class TuningReport:
    best: tuple[int, float, float]  # (window, C, gamma)
    cells: tuple[GridCell, ...] = field(repr=False)


def tune_hyperparameters(
    stocks: list[tuple[PriceSeries, IndicatorSeries]],
    windows=(5, 10, 15, 20, 25, 30, 35, 40),
    cs=(0.1, 10.0, 100.0, 1000.0),
    gammas=(0.1, 0.01, 0.001, 0.0001),
    split: float = DEFAULT_SPLIT,
    params: ForecastParams = ForecastParams(),
) -> TuningReport:
    """Grid search scored by mean validation hit rate across stocks.

    The last 20% of each stock's training fraction is held out for
    validation.  Ties break toward the smallest window, then the largest C,
    then the smallest gamma.
    """
    if not (windows and cs and gammas):
        raise ValueError("empty grid")
    cells = []
    for window in windows:
        for c in cs:
            for gamma in gammas:
                rates = []
                for prices, indicators in stocks:
                    cell_params = replace(params, window=window, c=c, gamma=gamma)
                    rates.append(
                        _validation_hit_rate(prices, indicators, split, cell_params)
                    )
                cells.append(
                    GridCell(
                        window=window,
                        c=c,
                        gamma=gamma,
                        mean_hit_rate=float(np.mean(rates)),
                    )
                )
    best = max(
        cells,
        key=lambda cell: (cell.mean_hit_rate, -cell.window, cell.c, -cell.gamma),
    )
    return TuningReport(best=(best.window, best.c, best.gamma), cells=tuple(cells))


def _validation_hit_rate(prices, indicators, split, params) -> float:
    """Hit rate on the held-out tail of the training fraction."""
    ts = build_training_set(prices, indicators, params.window, params.smoothing)
    n_train_total = int(np.floor(split * len(ts)))
    fit_end = int(np.floor(0.8 * n_train_total))
    if fit_end < 2 or fit_end >= n_train_total:
        raise InsufficientHistoryError(
            f"{prices.symbol}: not enough samples for a validation split"
        )
    model = train_svr(
        ts.X[:fit_end], ts.y[:fit_end], c=params.c, gamma=params.gamma,
        epsilon=params.epsilon, tol=params.tol, max_iter=params.max_iter,
    )
    normalized = model.predict(ts.X[fit_end:n_train_total])
    states = ts.states[fit_end:n_train_total]
    predicted = np.array([st.denormalize(v) for v, st in zip(normalized, states)])
    actual = ts.smoothed_high[ts.target_indices[fit_end:n_train_total]]
    if len(predicted) < 2:
        raise InsufficientHistoryError(f"{prices.symbol}: validation slice too short")
    predicted_returns = np.diff(predicted) / predicted[:-1]
    actual_returns = np.diff(actual) / actual[:-1]
    return hit_rate(predicted_returns, actual_returns)
