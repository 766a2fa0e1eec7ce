"""Run the 30-day budget simulation for all three strategies.

Builds a synthetic four-stock universe, trains the forecaster on each
stock, then simulates the same month three times: mean-variance weights,
fuzzy-counselor weights, and seeded random weights. Days with a negative
expected portfolio return stay out of the market.

Run:  python demos/demo_backtest.py
"""

import numpy as np

from counselor.backtest import BacktestData, run_backtest
from counselor.forecast import ForecastParams, walk_forward_forecast
from counselor.indicators import indicator_pipeline
from counselor.market_data import FundamentalRecord, moving_average
from demo_data import make_universe

params = ForecastParams(window=5, smoothing=15, c=100.0, gamma=0.01, epsilon=0.05)
universe = make_universe(n_stocks=4, n_days=280, seed=5)
symbols = tuple(s.symbol for s in universe)

rng = np.random.default_rng(0)
smoothed = []
predicted = []
for series in universe:
    indicators = indicator_pipeline(series, tau=14)
    result = walk_forward_forecast(series, indicators, split=0.7, params=params)
    sm = moving_average(series.high, params.smoothing).values
    pr = np.full(len(series), np.nan)
    pr[result.test_indices] = result.predictions
    smoothed.append(sm)
    predicted.append(pr)

data = BacktestData(
    symbols=symbols,
    days=universe[0].days,
    smoothed=np.stack(smoothed),
    predicted=np.stack(predicted),
    fundamentals={
        sym: [
            FundamentalRecord(symbol=sym, year=y, features=rng.uniform(-3000, 3000, 5))
            for y in (2013, 2014, 2015)
        ]
        for sym in symbols
    },
)

start = int(np.flatnonzero(np.all(np.isfinite(np.stack(predicted)), axis=0))[0]) + 1
print(f"simulating 30 days from {data.days[start]} with eta=0.3, budget $1000\n")

ledgers = {}
for method in ("portfolio", "fic", "random"):
    ledgers[method] = run_backtest(
        method, data, start, 30, eta=0.3, initial_budget=1000.0,
        seed=42, covariance_window=60,
    )

print(f"{'day':>12}" + "".join(f"{m:>12}" for m in ledgers))
for k in range(0, 30, 3):
    print(
        f"{ledgers['portfolio'].days[k].isoformat():>12}"
        + "".join(f"{ledgers[m].budget[k]:12.2f}" for m in ledgers)
    )

print("\nfinal budgets:")
for method, ledger in ledgers.items():
    exits = sum(1 for f in ledger.invested if not f)
    print(f"  {method:<10} ${ledger.final_budget:8.2f}   ({exits} exit days)")
