"""JSON-over-HTTP surface mirroring the CLI, under /v1.

All heavy work (SVR training) happens in ``pipeline.prepare`` before the
app starts; the request path only runs small QP solves and fuzzy
inference.  Every response carries the active config fingerprint so
clients can validate their caches.
"""

from __future__ import annotations

import datetime as dt
import logging
import uuid
from concurrent.futures import ThreadPoolExecutor
from concurrent.futures import TimeoutError as FutureTimeout
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import backtest as bt
from . import fic, pipeline, portfolio
from .errors import CounselorError, InsufficientHistoryError, MissingInputError
from .pipeline import Prepared

logger = logging.getLogger(__name__)


def create_app(prepared: Prepared, frontend_dir=None) -> FastAPI:
    app = FastAPI(title="stock counselor", version="1")
    fp = prepared.config.fingerprint()
    executor = ThreadPoolExecutor(max_workers=4)

    def run_bounded(fn, *args, **kwargs):
        future = executor.submit(fn, *args, **kwargs)
        try:
            return future.result(timeout=prepared.config.request_timeout)
        except FutureTimeout:
            raise _Timeout() from None

    @app.exception_handler(RequestValidationError)
    async def malformed(request: Request, exc):  # noqa: ARG001
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.exception_handler(_Timeout)
    async def timed_out(request: Request, exc):  # noqa: ARG001
        return JSONResponse(
            status_code=503,
            content={"error": "request exceeded the configured time budget; retry later"},
            headers={"Retry-After": "5"},
        )

    @app.exception_handler(MissingInputError)
    async def missing(request: Request, exc):  # noqa: ARG001
        return JSONResponse(status_code=404, content={"error": str(exc)})

    @app.exception_handler(InsufficientHistoryError)
    async def short_history(request: Request, exc):  # noqa: ARG001
        return JSONResponse(status_code=422, content={"error": str(exc)})

    @app.exception_handler(CounselorError)
    async def data_error(request: Request, exc):  # noqa: ARG001
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.exception_handler(Exception)
    async def internal(request: Request, exc):  # noqa: ARG001
        incident = uuid.uuid4().hex[:12]
        logger.exception("internal fault %s", incident)
        return JSONResponse(status_code=500, content={"error": "internal fault", "id": incident})

    data = prepared.data

    @app.get("/v1/stocks")
    def stocks():
        lo, hi = pipeline.decision_day_range(data, prepared.config.covariance_window)
        return {
            "fingerprint": fp,
            "stocks": list(data.symbols),
            "fic_stocks": list(prepared.fundamentals_symbols),
            "excluded": prepared.excluded,
            "calendar": {
                "start": data.days[0].isoformat(),
                "end": data.days[-1].isoformat(),
            },
            "decision_days": {
                "first": data.days[lo].isoformat(),
                "last": data.days[hi].isoformat(),
            },
            "eta_default": prepared.config.eta,
        }

    @app.get("/v1/forecast")
    def forecast(symbol: str, start: str | None = None, end: str | None = None):
        if symbol not in prepared.forecasts:
            raise MissingInputError(f"unknown symbol {symbol!r}")
        result = prepared.forecasts[symbol]
        days = [d.isoformat() for d in result.test_days]
        lo = 0 if start is None else _bisect_day(days, start)
        hi = len(days) if end is None else _bisect_day(days, end, upper=True)
        return {
            "fingerprint": fp,
            "symbol": symbol,
            "days": days[lo:hi],
            "actual": _round(result.actual[lo:hi]),
            "predicted": _round(result.predictions[lo:hi]),
            "normalized_predicted": _round(result.normalized_predictions[lo:hi]),
        }

    def frontier_at(day_index: int):
        expected = pipeline.expected_returns_at(data, day_index)
        cov = portfolio.estimate_covariance(
            pipeline.realized_returns(data),
            window=prepared.config.covariance_window,
            end_day=day_index - 1,
        )
        schedule = portfolio.geometric_mu_schedule(
            prepared.config.mu_start,
            prepared.config.mu_ratio,
            prepared.config.mu_max,
            prepared.config.mu_max_points,
        )
        return portfolio.sweep_frontier(cov, expected, schedule, symbols=data.symbols), cov, expected

    @app.get("/v1/frontier")
    def frontier(date: str | None = None):
        d = _resolve_day(prepared, date)
        front, _, _ = run_bounded(frontier_at, d)
        return {
            "fingerprint": fp,
            "date": data.days[d].isoformat(),
            "risk_min": front.risk_min,
            "risk_max": front.risk_max,
            "points": [
                {
                    "mu": p.mu,
                    "risk": p.risk,
                    "expected_return": p.expected_return,
                    "weights": dict(zip(p.weights.symbols, _round(p.weights.weights))),
                }
                for p in front.points
            ],
        }

    @app.get("/v1/recommend")
    def recommend(method: str = "portfolio", eta: float | None = None, date: str | None = None):
        if method not in ("portfolio", "fic"):
            raise CounselorError(f"method must be portfolio or fic, got {method!r}")
        eta = prepared.config.eta if eta is None else eta
        if not 0.0 <= eta <= 1.0:
            raise CounselorError(f"eta must be in [0, 1], got {eta}")
        d = _resolve_day(prepared, date)
        payload = {
            "fingerprint": fp,
            "method": method,
            "eta": eta,
            "date": data.days[d].isoformat(),
        }
        if method == "portfolio":
            front, _, expected = run_bounded(frontier_at, d)
            point = portfolio.select_by_risk_tolerance(front, eta)
            payload.update(
                {
                    "weights": dict(zip(point.weights.symbols, _round(point.weights.weights))),
                    "expected_return": point.expected_return,
                    "risk": point.risk,
                    "frontier_excerpt": {
                        "risk_min": front.risk_min,
                        "risk_max": front.risk_max,
                        "n_points": len(front.points),
                        "selected_mu": point.mu,
                    },
                }
            )
        else:
            fdata = prepared.fic_data()
            out = run_bounded(_fic_recommend, prepared, fdata, d, eta)
            w = out.overall_weights
            payload.update(
                {
                    "weights": dict(zip(w.symbols, _round(w.weights))),
                    "expected_return": float(
                        w.weights @ pipeline.expected_returns_at(fdata, d)
                    ),
                    "risk": None,
                    "audit": {
                        "technical": _round(out.technical_weights),
                        "fundamental": _round(out.fundamental_weights),
                        "alpha": _round(out.alpha),
                    },
                }
            )
        return payload

    @app.get("/v1/backtest")
    def run_backtest(
        method: str = "portfolio",
        start: str | None = None,
        days: int = 30,
        eta: float | None = None,
        seed: int | None = None,
    ):
        if method not in bt.STRATEGIES:
            raise CounselorError(f"method must be one of {bt.STRATEGIES}")
        if days < 1:
            raise CounselorError("days must be >= 1")
        eta = prepared.config.eta if eta is None else eta
        seed = prepared.config.seed if seed is None else seed
        use = prepared.fic_data() if method == "fic" else data
        d = _resolve_day(prepared, start, data_override=use, default="first")
        ledger = run_bounded(
            bt.run_backtest,
            method,
            use,
            d,
            days,
            eta,
            initial_budget=prepared.config.initial_budget,
            seed=seed,
            covariance_window=prepared.config.covariance_window,
            rulebases=prepared.rulebases_or_default() if method == "fic" else None,
        )
        return {
            "fingerprint": fp,
            "method": method,
            "eta": eta,
            "seed": seed,
            "initial_budget": ledger.initial_budget,
            "days": [day.isoformat() for day in ledger.days],
            "budget": _round(ledger.budget, 6),
            "expected_return": _round(ledger.expected_return, 8),
            "realized_return": _round(ledger.realized_return, 8),
            "invested": list(ledger.invested),
            "final_budget": round(ledger.final_budget, 6),
            "symbols": list(use.symbols),
            "weights": [_round(w.weights, 8) for w in ledger.weights],
        }

    if frontend_dir is not None and Path(frontend_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(frontend_dir), html=True), name="ui")
    return app


class _Timeout(Exception):
    pass


def _round(values, digits: int = 10):
    return [round(float(v), digits) for v in np.asarray(values, dtype=float)]


def _bisect_day(days, iso, upper=False):
    from bisect import bisect_left, bisect_right

    return bisect_right(days, iso) if upper else bisect_left(days, iso)


def _resolve_day(
    prepared: Prepared, date: str | None, data_override=None, default="last"
) -> int:
    data = prepared.data if data_override is None else data_override
    lo, hi = pipeline.decision_day_range(data, prepared.config.covariance_window)
    if date is None:
        return lo if default == "first" else hi
    try:
        day = dt.date.fromisoformat(date)
    except ValueError:
        raise CounselorError(f"bad date {date!r}, expected YYYY-MM-DD") from None
    idx = data.day_index(day)
    if not lo <= idx <= hi:
        raise InsufficientHistoryError(
            f"{date} is outside the usable decision range "
            f"[{data.days[lo]}, {data.days[hi]}]"
        )
    return idx


def _fic_recommend(prepared: Prepared, fdata, day_index: int, eta: float):
    expected = pipeline.expected_returns_at(fdata, day_index)
    cov = portfolio.estimate_covariance(
        pipeline.realized_returns(fdata),
        window=prepared.config.covariance_window,
        end_day=day_index - 1,
    )
    technical = fic.TechnicalInputs(
        expected_returns=expected,
        sigmas=cov.sigmas(),
        correlations=cov.correlations(),
        eta=eta,
    )
    features = np.stack(
        [
            bt.features_for(fdata.fundamentals, s, fdata.days[day_index], fic.N_F)
            for s in fdata.symbols
        ]
    )
    fundamental = fic.FundamentalInputs(features=features)
    return fic.counsel(
        technical, fundamental, prepared.rulebases_or_default(), symbols=fdata.symbols
    )
