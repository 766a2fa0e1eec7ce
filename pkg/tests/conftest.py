import datetime as dt
import os

import numpy as np
import pytest

from tests.oracles.series_gen import random_walk_series, trading_days

SYNTH_SYMBOLS = ("AAA", "BBB", "CCC", "NOF")
SYNTH_DAYS = 220

# Reduced windows so SVR training in CLI/service tests stays fast.
SYNTH_CONFIG = """\
[data]
prices_path = {prices}
fundamentals_path = {fundamentals}
universe = AAA,BBB,CCC,NOF

[windows]
smoothing = 10
window = 3
covariance_window = 15
tau = 5

[svr]
svr_c = 10
svr_gamma = 0.01
svr_epsilon = 0.05

[run]
eta = 0.3
seed = 1
request_timeout = 30
"""


def write_synth_dataset(root):
    """Kaggle-layout CSVs for a small synthetic universe.

    Includes one gap-ridden symbol (GAP) and one symbol without
    fundamentals (NOF).
    """
    start = dt.date(2016, 1, 4)  # after the fundamentals years
    rows = ["date,symbol,open,close,low,high,volume\n"]
    for i, sym in enumerate(SYNTH_SYMBOLS):
        series = random_walk_series(
            SYNTH_DAYS, seed=100 + i, symbol=sym, drift=0.0008, vol=0.015
        )
        for t, day in enumerate(trading_days(SYNTH_DAYS, start=start)):
            rows.append(
                f"{day},{sym},{series.open[t]:.4f},{series.close[t]:.4f},"
                f"{series.low[t]:.4f},{series.high[t]:.4f},{series.volume[t]:.0f}\n"
            )
    gap = random_walk_series(SYNTH_DAYS, seed=999, symbol="GAP")
    for t, day in enumerate(trading_days(SYNTH_DAYS, start=start)):
        if t % 7 == 3:
            continue
        rows.append(
            f"{day},GAP,{gap.open[t]:.4f},{gap.close[t]:.4f},"
            f"{gap.low[t]:.4f},{gap.high[t]:.4f},{gap.volume[t]:.0f}\n"
        )
    prices = root / "prices.csv"
    prices.write_text("".join(rows))

    rng = np.random.default_rng(7)
    frows = [
        "Ticker Symbol,Period Ending,Accounts Receivable,Capital Expenditures,"
        "Inventory,Gross Margin,Income Tax\n"
    ]
    for sym in SYNTH_SYMBOLS:
        if sym == "NOF":
            continue
        for year in (2013, 2014, 2015):
            vals = rng.uniform(-5000, 5000, 5)
            frows.append(
                f"{sym},{year}-12-31," + ",".join(f"{v:.1f}" for v in vals) + "\n"
            )
    fundamentals = root / "fundamentals.csv"
    fundamentals.write_text("".join(frows))
    return prices, fundamentals


@pytest.fixture(scope="session")
def synth_dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("dataset")
    prices, fundamentals = write_synth_dataset(root)
    config = root / "config.ini"
    config.write_text(SYNTH_CONFIG.format(prices=prices, fundamentals=fundamentals))
    return {"prices": prices, "fundamentals": fundamentals, "config": config}


def nyse_dataset_dir():
    """Directory with the real NYSE prices.csv/fundamentals.csv, if provided."""
    path = os.environ.get("COUNSELOR_NYSE_DIR")
    if path and os.path.isfile(os.path.join(path, "prices.csv")):
        return path
    return None


requires_nyse = pytest.mark.skipif(
    nyse_dataset_dir() is None,
    reason="real NYSE dataset not available; set COUNSELOR_NYSE_DIR to a "
    "directory containing prices.csv and fundamentals.csv",
)
