"""Operator command line: one subcommand per pipeline stage.

Machine-readable output goes to stdout (CSV or JSON) or to ``--out``;
diagnostics go to stderr.  Exit codes: 0 success, 1 data error, 2 usage.
"""

from __future__ import annotations

import argparse
import csv
import datetime as dt
import io
import json
import logging
import sys

import numpy as np

from . import backtest as bt
from . import fic, pipeline, portfolio
from .config import load_config, with_overrides
from .errors import CounselorError
from .forecast import tune_hyperparameters
from .indicators import indicator_pipeline
from .market_data import ingest_fundamentals, ingest_prices


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO,
        format='{"time": "%(asctime)s", "level": "%(levelname)s", "msg": "%(message)s"}',
    )
    try:
        config = load_config(
            path=args.config,
            overrides={
                "prices_path": args.prices,
                "fundamentals_path": args.fundamentals,
                "universe": tuple(args.universe.split(",")) if args.universe else None,
                "eta": args.eta,
                "seed": args.seed,
            },
        )
        return args.handler(args, config)
    except CounselorError as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 1


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="counselor",
        description="forecast stock prices and suggest budget allocations",
    )
    parser.add_argument("--config", help="INI config file")
    parser.add_argument("--prices", help="prices.csv path")
    parser.add_argument("--fundamentals", help="fundamentals.csv path")
    parser.add_argument("--universe", help="comma-separated tickers")
    parser.add_argument("--eta", type=float, help="risk tolerance in [0, 1]")
    parser.add_argument("--seed", type=int, help="random seed")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse the dataset and report coverage")
    p.add_argument("--out")
    p.set_defaults(handler=_cmd_ingest)

    p = sub.add_parser("indicators", help="dump indicator series for one symbol")
    p.add_argument("--symbol", required=True)
    p.add_argument("--out")
    p.set_defaults(handler=_cmd_indicators)

    p = sub.add_parser("tune", help="hyperparameter grid search by validation hit rate")
    p.add_argument("--windows", default="5,10,15,20,25,30,35,40")
    p.add_argument("--cs", default="0.1,10,100,1000")
    p.add_argument("--gammas", default="0.1,0.01,0.001,0.0001")
    p.add_argument("--out")
    p.set_defaults(handler=_cmd_tune)

    p = sub.add_parser("forecast", help="walk-forward predictions for one symbol")
    p.add_argument("--symbol", required=True)
    p.add_argument("--out")
    p.set_defaults(handler=_cmd_forecast)

    p = sub.add_parser("frontier", help="risk/return frontier at a date")
    p.add_argument("--date")
    p.add_argument("--out")
    p.set_defaults(handler=_cmd_frontier)

    p = sub.add_parser("recommend", help="allocation weights at a date")
    p.add_argument("--method", choices=("portfolio", "fic"), default="portfolio")
    p.add_argument("--date")
    p.add_argument("--audit", help="write counselor intermediates CSV (fic only)")
    p.add_argument("--out")
    p.set_defaults(handler=_cmd_recommend)

    p = sub.add_parser("backtest", help="budget simulation over a horizon")
    p.add_argument("--method", choices=("all",) + bt.STRATEGIES, default="all")
    p.add_argument("--start")
    p.add_argument("--days", type=int, default=30)
    p.add_argument("--budget", type=float, default=1000.0)
    p.add_argument("--out", help="CSV path prefix, one ledger file per method")
    p.set_defaults(handler=_cmd_backtest)

    p = sub.add_parser("report", help="per-stock forecast metrics table")
    p.add_argument("--modes", default="NSP,SP")
    p.add_argument("--out")
    p.set_defaults(handler=_cmd_report)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--frontend", help="directory of static UI files to serve")
    p.set_defaults(handler=_cmd_serve)
    return parser


def _emit(text: str, out_path):
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_ingest(args, config) -> int:
    prices = ingest_prices(config.prices_path, config.universe)
    fundamentals = ingest_fundamentals(
        config.fundamentals_path, config.universe, config.fundamentals_years
    )
    summary = {
        "rows": {s: len(ps) for s, ps in sorted(prices.series.items())},
        "not_found": sorted(prices.not_found),
        "incomplete": sorted(prices.incomplete),
        "fundamentals": {s: len(r) for s, r in sorted(fundamentals.records.items())},
        "lacking_fundamentals": sorted(fundamentals.lacking),
    }
    _emit(json.dumps(summary, indent=2) + "\n", args.out)
    return 0


def _cmd_indicators(args, config) -> int:
    prices = ingest_prices(config.prices_path, [args.symbol])
    if args.symbol not in prices.series:
        raise CounselorError(f"{args.symbol}: not found")
    series = prices.series[args.symbol]
    ind = indicator_pipeline(series, config.tau)
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["date", "adx", "spdi", "smdi", "sar"])
    for t, day in enumerate(series.days):
        writer.writerow(
            [day.isoformat()]
            + [_fmt(x[t]) for x in (ind.adx, ind.spdi, ind.smdi, ind.sar)]
        )
    _emit(buf.getvalue(), args.out)
    return 0


def _cmd_tune(args, config) -> int:
    prices = ingest_prices(config.prices_path, config.universe)
    stocks = []
    for sym in config.universe:
        if sym in prices.series and sym not in prices.incomplete:
            series = prices.series[sym]
            stocks.append((series, indicator_pipeline(series, config.tau)))
    if not stocks:
        raise CounselorError("no usable symbols to tune on")
    report = tune_hyperparameters(
        stocks,
        windows=[int(w) for w in args.windows.split(",")],
        cs=[float(c) for c in args.cs.split(",")],
        gammas=[float(g) for g in args.gammas.split(",")],
        split=config.split,
    )
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["window", "c", "gamma", "mean_hit_rate"])
    for cell in report.cells:
        writer.writerow([cell.window, cell.c, cell.gamma, f"{cell.mean_hit_rate:.4f}"])
    window, c, gamma = report.best
    buf.write(f"# best window={window} c={c:g} gamma={gamma:g}\n")
    _emit(buf.getvalue(), args.out)
    return 0


def _cmd_forecast(args, config) -> int:
    prepared = pipeline.prepare(config, symbols=[args.symbol])
    result = prepared.forecasts[args.symbol]
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["date", "actual", "predicted", "normalized_predicted"])
    for k, day in enumerate(result.test_days):
        writer.writerow(
            [
                day.isoformat(),
                f"{result.actual[k]:.6f}",
                f"{result.predictions[k]:.6f}",
                f"{result.normalized_predictions[k]:.8f}",
            ]
        )
    _emit(buf.getvalue(), args.out)
    return 0


def _cmd_frontier(args, config) -> int:
    prepared = pipeline.prepare(config)
    data = prepared.data
    d = _resolve_date(prepared, args.date)
    expected = pipeline.expected_returns_at(data, d)
    cov = portfolio.estimate_covariance(
        pipeline.realized_returns(data), config.covariance_window, end_day=d - 1
    )
    schedule = portfolio.geometric_mu_schedule(
        config.mu_start, config.mu_ratio, config.mu_max, config.mu_max_points
    )
    frontier = portfolio.sweep_frontier(cov, expected, schedule, symbols=data.symbols)
    _emit(_frontier_csv(frontier, data.symbols), args.out)
    return 0


def _frontier_csv(frontier, symbols) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["mu", "risk", "expected_return", *(f"w_{s}" for s in symbols)])
    for p in frontier.points:
        writer.writerow(
            [f"{p.mu:.8g}", f"{p.risk:.8e}", f"{p.expected_return:.8e}"]
            + [f"{w:.8f}" for w in p.weights.weights]
        )
    return buf.getvalue()


def _cmd_recommend(args, config) -> int:
    prepared = pipeline.prepare(config)
    data = prepared.fic_data() if args.method == "fic" else prepared.data
    d = _resolve_date(prepared, args.date, data)
    expected = pipeline.expected_returns_at(data, d)
    cov = portfolio.estimate_covariance(
        pipeline.realized_returns(data), config.covariance_window, end_day=d - 1
    )
    if args.method == "portfolio":
        schedule = portfolio.geometric_mu_schedule(
            config.mu_start, config.mu_ratio, config.mu_max, config.mu_max_points
        )
        frontier = portfolio.sweep_frontier(cov, expected, schedule, symbols=data.symbols)
        point = portfolio.select_by_risk_tolerance(frontier, config.eta)
        weights = point.weights
        extra = {"risk": point.risk, "expected_return": point.expected_return}
    else:
        technical = fic.TechnicalInputs(
            expected_returns=expected,
            sigmas=cov.sigmas(),
            correlations=cov.correlations(),
            eta=config.eta,
        )
        features = np.stack(
            [
                bt.features_for(data.fundamentals, s, data.days[d], fic.N_F)
                for s in data.symbols
            ]
        )
        out = fic.counsel(
            technical,
            fic.FundamentalInputs(features=features),
            prepared.rulebases_or_default(),
            symbols=data.symbols,
        )
        weights = out.overall_weights
        extra = {"expected_return": float(weights.weights @ expected)}
        if args.audit:
            fic.write_audit_csv([(data.days[d], out)], args.audit)
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["symbol", "weight"])
    for sym, w in zip(weights.symbols, weights.weights):
        writer.writerow([sym, f"{w:.8f}"])
    buf.write(
        f"# method={args.method} eta={config.eta:g} date={data.days[d].isoformat()} "
        + " ".join(f"{k}={v:.6g}" for k, v in extra.items())
        + "\n"
    )
    _emit(buf.getvalue(), args.out)
    return 0


def _cmd_backtest(args, config) -> int:
    prepared = pipeline.prepare(config)
    methods = bt.STRATEGIES if args.method == "all" else (args.method,)
    summary = {}
    for method in methods:
        data = prepared.fic_data() if method == "fic" else prepared.data
        d = _resolve_date(prepared, args.start, data, default="first")
        ledger = bt.run_backtest(
            method,
            data,
            d,
            args.days,
            config.eta,
            initial_budget=args.budget,
            seed=config.seed,
            covariance_window=config.covariance_window,
            rulebases=prepared.rulebases_or_default() if method == "fic" else None,
        )
        summary[method] = round(ledger.final_budget, 4)
        if args.out:
            bt.write_ledger_csv(ledger, f"{args.out}.{method}.csv")
    sys.stdout.write(json.dumps({"final_budget": summary, "days": args.days}) + "\n")
    return 0


def _cmd_report(args, config) -> int:
    modes = [m.strip().upper() for m in args.modes.split(",") if m.strip()]
    evaluations = []
    for mode in modes:
        if mode not in ("NSP", "SP"):
            raise CounselorError(f"mode must be NSP or SP, got {mode!r}")
        cfg = config if mode == "SP" else with_overrides(config, smoothing=1)
        prepared = pipeline.prepare(cfg)
        for sym in prepared.symbols:
            result = prepared.forecasts[sym]
            evaluations.append((sym, mode, result.actual, result.predictions))
    reports = bt.table_report(evaluations)
    buf = io.StringIO()
    writer = csv.writer(buf)
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
    _emit(buf.getvalue(), args.out)
    return 0


def _cmd_serve(args, config) -> int:
    import uvicorn

    from .service import create_app

    prepared = pipeline.prepare(config)
    app = create_app(prepared, frontend_dir=args.frontend)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def _resolve_date(prepared, date_text, data=None, default="last") -> int:
    data = prepared.data if data is None else data
    lo, hi = pipeline.decision_day_range(data, prepared.config.covariance_window)
    if date_text is None:
        return lo if default == "first" else hi
    day = dt.date.fromisoformat(date_text)
    idx = data.day_index(day)
    if not lo <= idx <= hi:
        raise CounselorError(
            f"{date_text} outside usable range [{data.days[lo]}, {data.days[hi]}]"
        )
    return idx


def _fmt(x) -> str:
    return "" if not np.isfinite(x) else f"{x:.6f}"


if __name__ == "__main__":
    sys.exit(main())
