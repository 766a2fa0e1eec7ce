"""Sweep the mean-variance frontier and map risk tolerance onto it.

Estimates a covariance matrix from four synthetic return series, sweeps
the regularization parameter to trace the risk/return frontier, and shows
which portfolio each risk-tolerance level selects.

Run:  python demos/demo_frontier.py
"""

import numpy as np

from counselor.market_data import moving_average, to_returns
from counselor.portfolio import (
    estimate_covariance,
    geometric_mu_schedule,
    select_by_risk_tolerance,
    sweep_frontier,
)
from demo_data import make_universe

universe = make_universe(n_stocks=4, n_days=200, seed=11)
symbols = [s.symbol for s in universe]
returns = [to_returns(moving_average(s.high, 10)) for s in universe]
cov = estimate_covariance(returns, window=100)

# expected next-day returns: here simply each stock's trailing mean
expected = cov.mean_returns
print("expected returns:", np.array2string(expected, precision=5))
print("volatilities:    ", np.array2string(cov.sigmas(), precision=5))

frontier = sweep_frontier(cov, expected, geometric_mu_schedule(1e-6, 1.5, 1e5), symbols=symbols)
print(f"\nfrontier: {len(frontier.points)} points, risk in "
      f"[{frontier.risk_min:.5f}, {frontier.risk_max:.5f}]")

print(f"\n{'eta':>5} {'risk':>9} {'return':>9}  weights")
for eta in (0.0, 0.25, 0.5, 0.75, 1.0):
    point = select_by_risk_tolerance(frontier, eta)
    weights = " ".join(f"{s}={w:.2f}" for s, w in zip(symbols, point.weights.weights))
    print(f"{eta:5.2f} {point.risk:9.5f} {point.expected_return:9.5f}  {weights}")

print("\nlow tolerance hugs the minimum-variance mix; high tolerance "
      "chases the best expected return")
