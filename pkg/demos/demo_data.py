"""Shared synthetic-data helpers for the demo scripts."""

import datetime as dt

import numpy as np

from counselor.market_data import PriceSeries


def trading_days(n, start=dt.date(2016, 1, 4)):
    days = []
    day = start
    while len(days) < n:
        if day.weekday() < 5:
            days.append(day)
        day += dt.timedelta(days=1)
    return tuple(days)


def make_series(n=250, seed=0, symbol="DEMO", trend=0.0008, vol=0.015, base=100.0):
    rng = np.random.default_rng(seed)
    close = base * np.exp(np.cumsum(trend + vol * rng.standard_normal(n)))
    open_ = np.concatenate(([base], close[:-1])) * np.exp(0.002 * rng.standard_normal(n))
    hi = np.maximum(open_, close) * (1 + np.abs(0.003 * rng.standard_normal(n)))
    lo = np.minimum(open_, close) * (1 - np.abs(0.003 * rng.standard_normal(n)))
    return PriceSeries(
        symbol=symbol,
        days=trading_days(n),
        open=open_,
        close=close,
        low=lo,
        high=hi,
        volume=rng.integers(100_000, 5_000_000, n).astype(float),
    )


def make_universe(n_stocks=4, n_days=250, seed=0):
    return [
        make_series(
            n=n_days,
            seed=seed + i,
            symbol=f"DEMO{i}",
            trend=0.0005 + 0.0004 * i,
            vol=0.012 + 0.004 * i,
        )
        for i in range(n_stocks)
    ]
