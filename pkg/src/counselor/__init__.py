"""Stock investment counselor: forecasting plus weight suggestion.

The pipeline runs dataset ingestion and preprocessing (``market_data``),
trend indicators (``indicators``), next-day price forecasting with
support-vector regression (``forecast``), and two weight-suggestion
methods: mean-variance optimization on the simplex (``portfolio``) and a
Mamdani fuzzy counselor (``fuzzy``, ``fic``).  ``backtest`` evaluates both
with hit-rate/error metrics and a budget simulation; ``cli`` and
``service`` expose the operator surface.
"""

from . import (
    backtest,
    fic,
    forecast,
    fuzzy,
    indicators,
    market_data,
    pipeline,
    portfolio,
    svr,
)
from .config import RunConfig

__all__ = [
    "backtest",
    "fic",
    "forecast",
    "fuzzy",
    "indicators",
    "market_data",
    "pipeline",
    "portfolio",
    "svr",
    "RunConfig",
]

__version__ = "0.1.0"
