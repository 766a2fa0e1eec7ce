"""Train the next-day price forecaster on one synthetic stock.

Builds windowed features (five smoothed price/volume channels plus ADX and
SAR), trains the epsilon-SVR on the first 80% of samples, and evaluates the
held-out tail: hit rate of the predicted trend plus the usual error
metrics against the smoothed series.

Run:  python demos/demo_forecast.py
"""

import numpy as np

from counselor.backtest import error_metrics, hit_rate
from counselor.forecast import ForecastParams, walk_forward_forecast
from counselor.indicators import indicator_pipeline
from demo_data import make_series

# smaller windows than the dataset defaults so the demo runs in seconds
params = ForecastParams(window=5, smoothing=20, c=100.0, gamma=0.01, epsilon=0.05)

series = make_series(n=300, seed=3)
indicators = indicator_pipeline(series, tau=14)
result = walk_forward_forecast(series, indicators, split=0.8, params=params)

print(f"{series.symbol}: {len(result.predictions)} test-day predictions "
      f"({result.test_days[0]} .. {result.test_days[-1]})")

pred_returns = np.diff(result.predictions) / result.predictions[:-1]
actual_returns = np.diff(result.actual) / result.actual[:-1]
hr = hit_rate(pred_returns, actual_returns)
m = error_metrics(result.actual, result.predictions)
print(f"trend hit rate  {hr:6.2f}%")
print(f"MAE  {m.mae:8.4f}   RMSE {m.rmse:8.4f}   MAPE {m.mape:6.3f}%")

print("\nlast ten days (actual vs predicted smoothed high):")
for k in range(len(result.predictions) - 10, len(result.predictions)):
    print(f"  {result.test_days[k]}  {result.actual[k]:9.3f}  {result.predictions[k]:9.3f}")
