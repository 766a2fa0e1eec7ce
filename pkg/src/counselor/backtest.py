"""Evaluation: hit rate, error metrics, and the budget simulation.

The simulation walks a day at a time: obtain allocation weights from one
of the three strategies (mean-variance frontier, fuzzy counselor, seeded
random), compute the expected and realized portfolio returns, stay out of
the market on days with negative expected return, and compound the budget
otherwise.
"""

from __future__ import annotations

import csv
import datetime as dt
from dataclasses import dataclass, field

import numpy as np

from . import fic, portfolio
from .errors import DataIntegrityError, MissingInputError
from .market_data import FundamentalRecord
from .portfolio import WeightVector

STRATEGIES = ("portfolio", "fic", "random")

# Published trend-prediction hit rates on this dataset, kept as external
# reference data for the comparison column (None where not reported).
TREND_PREDICTION_HR = {
    "AAPL": 57.58, "AIG": 58.79, "AMZN": 56.21, "BA": 60.15, "CAT": None,
    "COF": 57.12, "EBAY": 59.70, "F": None, "FDX": 59.55, "GE": 61.21,
    "GM": None, "GOOG": 58.33, "HD": 59.70, "IBM": None, "JNJ": 56.52,
    "JPM": 61.67, "KO": 59.24, "MSFT": 59.09, "NKE": 60.61, "ORCL": 58.94,
    "PEP": 59.39, "T": 58.64, "WMT": 60.91, "XOM": 60.45, "XRX": None,
}


@dataclass(frozen=True)
class MetricReport:
    symbol: str
    hr: float  # percent
    mae: float
    rmse: float
    mape: float  # percent
    mode: str  # "NSP" or "SP"
    mape_skipped: int = 0  # days left out of MAPE for a zero actual
    reference_hr: float | None = None

    def __post_init__(self):
        if self.rmse < self.mae - 1e-12 or self.mae < 0:
            raise DataIntegrityError("rmse >= mae >= 0 must hold")


@dataclass
class BacktestLedger:
    strategy: str
    initial_budget: float
    days: list[dt.date] = field(default_factory=list)
    weights: list[WeightVector] = field(default_factory=list)
    expected_return: list[float] = field(default_factory=list)
    realized_return: list[float] = field(default_factory=list)
    invested: list[bool] = field(default_factory=list)
    budget: list[float] = field(default_factory=list)

    @property
    def final_budget(self) -> float:
        return self.budget[-1] if self.budget else self.initial_budget


def hit_rate(predicted_returns, actual_returns) -> float:
    """Percent of days whose predicted and actual return signs agree.

    Zero counts as its own sign: a zero actual return is a hit only for a
    zero prediction.
    """
    p = np.asarray(predicted_returns, dtype=float)
    a = np.asarray(actual_returns, dtype=float)
    if p.shape != a.shape:
        raise DataIntegrityError("return series must align")
    if p.size == 0:
        raise DataIntegrityError("hit rate of an empty series is undefined")
    return float(np.mean(np.sign(p) == np.sign(a)) * 100.0)


@dataclass(frozen=True)
class ErrorMetrics:
    mae: float
    rmse: float
    mape: float
    mape_skipped: int


def error_metrics(actual, predicted) -> ErrorMetrics:
    """MAE, RMSE, and MAPE of a prediction against its truth.

    MAPE skips days with a zero actual value and discloses how many were
    skipped.
    """
    a = np.asarray(actual, dtype=float)
    p = np.asarray(predicted, dtype=float)
    if a.shape != p.shape or a.size == 0:
        raise DataIntegrityError("need equal-length non-empty series")
    err = a - p
    mae = float(np.mean(np.abs(err)))
    rmse = float(np.sqrt(np.mean(err * err)))
    nonzero = a != 0
    skipped = int(np.sum(~nonzero))
    if skipped == a.size:
        mape = float("nan")
    else:
        mape = float(np.mean(np.abs(err[nonzero] / a[nonzero])) * 100.0)
    return ErrorMetrics(mae=mae, rmse=rmse, mape=mape, mape_skipped=skipped)


@dataclass(frozen=True)
class BacktestData:
    """Aligned per-universe arrays the simulation consumes.

    ``smoothed[i, t]`` is stock i's actual (smoothed) high on day t;
    ``predicted[i, t]`` the model's estimate of it, NaN where no prediction
    exists.  ``fundamentals`` maps symbols to their yearly records.
    """

    symbols: tuple[str, ...]
    days: tuple[dt.date, ...]
    smoothed: np.ndarray
    predicted: np.ndarray
    fundamentals: dict[str, list[FundamentalRecord]] = field(default_factory=dict)

    def __post_init__(self):
        n, t = len(self.symbols), len(self.days)
        if self.smoothed.shape != (n, t) or self.predicted.shape != (n, t):
            raise DataIntegrityError("smoothed/predicted must be n_stocks x n_days")

    def day_index(self, day) -> int:
        if isinstance(day, int):
            return day
        try:
            return self.days.index(day)
        except ValueError:
            raise MissingInputError(f"day {day} not in calendar") from None


def random_simplex_weights(rng: np.random.Generator, n: int) -> np.ndarray:
    """Uniform draw from the simplex via sorted uniform spacings."""
    if n == 1:
        return np.array([1.0])
    cuts = np.sort(rng.uniform(0.0, 1.0, size=n - 1))
    return np.diff(np.concatenate(([0.0], cuts, [1.0])))


def run_backtest(
    strategy: str,
    data: BacktestData,
    start_day,
    horizon: int,
    eta: float,
    initial_budget: float = 1000.0,
    seed: int = 0,
    covariance_window: int = portfolio.DEFAULT_COVARIANCE_WINDOW,
    mu_schedule=None,
    rulebases=None,
    coefficients=None,
) -> BacktestLedger:
    """Simulate ``horizon`` days of one strategy from ``start_day``.

    Every decision day needs predictions for itself and the next day plus
    ``covariance_window`` realized returns of history; a gap is a hard
    error naming the date.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"strategy must be one of {STRATEGIES}")
    start = data.day_index(start_day)
    n, t_max = data.predicted.shape
    if start + horizon + 1 > t_max:
        raise MissingInputError(
            f"horizon {horizon} from day {start} runs past the calendar end"
        )
    realized_all = np.diff(data.smoothed, axis=1) / data.smoothed[:, :-1]
    rng = np.random.default_rng(seed)
    if strategy == "fic" and rulebases is None:
        rulebases = fic.default_rulebases()
    if coefficients is None:
        coefficients = fic.DEFAULT_FUNDAMENTAL_COEFFICIENTS
    if mu_schedule is None:
        mu_schedule = portfolio.geometric_mu_schedule()

    ledger = BacktestLedger(strategy=strategy, initial_budget=initial_budget)
    budget = initial_budget
    for d in range(start, start + horizon):
        date = data.days[d]
        pred_now = data.predicted[:, d]
        pred_next = data.predicted[:, d + 1]
        if not (np.all(np.isfinite(pred_now)) and np.all(np.isfinite(pred_next))):
            raise MissingInputError(f"missing prediction for {date}")
        expected = (pred_next - pred_now) / pred_now
        realized = realized_all[:, d]
        if not np.all(np.isfinite(realized)):
            raise MissingInputError(f"missing realized return for {date}")

        if strategy == "random":
            wv = WeightVector(weights=random_simplex_weights(rng, n), symbols=data.symbols)
        else:
            cov = portfolio.estimate_covariance(
                realized_all, window=covariance_window, end_day=d - 1
            )
            if strategy == "portfolio":
                frontier = portfolio.sweep_frontier(
                    cov, expected, mu_schedule, symbols=data.symbols
                )
                wv = portfolio.select_by_risk_tolerance(frontier, eta).weights
            else:
                technical = fic.TechnicalInputs(
                    expected_returns=expected,
                    sigmas=cov.sigmas(),
                    correlations=cov.correlations(),
                    eta=eta,
                )
                features = np.stack(
                    [
                        features_for(data.fundamentals, s, date, len(coefficients))
                        for s in data.symbols
                    ]
                )
                fundamental = fic.FundamentalInputs(
                    features=features, coefficients=np.asarray(coefficients, float)
                )
                wv = fic.counsel(
                    technical, fundamental, rulebases, symbols=data.symbols
                ).overall_weights

        exp_r = float(wv.weights @ expected)
        real_r = float(wv.weights @ realized)
        invest = exp_r >= 0
        if invest:
            budget *= 1.0 + real_r
        ledger.days.append(date)
        ledger.weights.append(wv)
        ledger.expected_return.append(exp_r)
        ledger.realized_return.append(real_r)
        ledger.invested.append(invest)
        ledger.budget.append(budget)
    return ledger


def features_for(fundamentals, symbol, date, n_f):
    """Most recent yearly feature vector at or before ``date``."""
    records = fundamentals.get(symbol, [])
    eligible = [r for r in records if r.year <= date.year]
    if not eligible:
        raise MissingInputError(f"no fundamentals for {symbol} at {date}")
    return max(eligible, key=lambda r: r.year).features


def table_report(evaluations) -> list[MetricReport]:
    """Metric rows from (symbol, mode, actual, predicted) evaluations.

    The published trend-prediction hit rate joins each row as an external
    comparison column where available.
    """
    reports = []
    for symbol, mode, actual, predicted in evaluations:
        actual = np.asarray(actual, dtype=float)
        predicted = np.asarray(predicted, dtype=float)
        metrics = error_metrics(actual, predicted)
        hr = hit_rate(
            np.diff(predicted) / predicted[:-1], np.diff(actual) / actual[:-1]
        )
        reports.append(
            MetricReport(
                symbol=symbol,
                hr=hr,
                mae=metrics.mae,
                rmse=metrics.rmse,
                mape=metrics.mape,
                mode=mode,
                mape_skipped=metrics.mape_skipped,
                reference_hr=TREND_PREDICTION_HR.get(symbol),
            )
        )
    return reports


def write_table_csv(reports, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["symbol", "mode", "hr", "mae", "rmse", "mape", "mape_skipped", "reference_hr"]
        )
        for r in reports:
            writer.writerow(
                [
                    r.symbol, r.mode, f"{r.hr:.4f}", f"{r.mae:.6f}", f"{r.rmse:.6f}",
                    f"{r.mape:.4f}", r.mape_skipped,
                    "" if r.reference_hr is None else f"{r.reference_hr:.2f}",
                ]
            )


def write_ledger_csv(ledger: BacktestLedger, path):
    symbols = ledger.weights[0].symbols if ledger.weights else ()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["date", *(f"w_{s}" for s in symbols), "expected_r", "realized_r", "invested", "budget"]
        )
        for k, day in enumerate(ledger.days):
            writer.writerow(
                [
                    day.isoformat(),
                    *(f"{w:.8f}" for w in ledger.weights[k].weights),
                    f"{ledger.expected_return[k]:.8f}",
                    f"{ledger.realized_return[k]:.8f}",
                    int(ledger.invested[k]),
                    f"{ledger.budget[k]:.6f}",
                ]
            )
