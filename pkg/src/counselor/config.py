"""Run configuration: published reference defaults, INI files, env overrides."""

from __future__ import annotations

import configparser
import hashlib
import json
import os
from dataclasses import dataclass, field, fields, replace

# The default 25-stock evaluation universe.
DEFAULT_UNIVERSE = (
    "AAPL", "AIG", "AMZN", "BA", "CAT", "COF", "EBAY", "F", "FDX", "GE",
    "GM", "GOOG", "HD", "IBM", "JNJ", "JPM", "KO", "MSFT", "NKE", "ORCL",
    "PEP", "T", "WMT", "XOM", "XRX",
)

ENV_PREFIX = "COUNSELOR_"


@dataclass(frozen=True)
class RunConfig:
    prices_path: str = "prices.csv"
    fundamentals_path: str = "fundamentals.csv"
    universe: tuple[str, ...] = DEFAULT_UNIVERSE
    fundamentals_years: tuple[int, ...] = (2013, 2014, 2015)

    smoothing: int = 50  # moving-average window, days
    window: int = 5  # normalization/feature window, days
    covariance_window: int = 100
    tau: int = 14  # indicator smoothing period

    svr_c: float = 1000.0
    svr_gamma: float = 0.001
    svr_epsilon: float = 0.1
    svr_tol: float = 1e-3
    svr_max_iter: int = 50_000_000

    mu_start: float = 1e-6
    mu_ratio: float = 1.25
    mu_max: float = 1e6
    mu_max_points: int = 1_000_000

    eta: float = 0.3
    split: float = 0.8
    seed: int = 0
    initial_budget: float = 1000.0

    rulebase_dir: str | None = None  # None = packaged defaults
    request_timeout: float = 30.0  # seconds, HTTP request path

    def __post_init__(self):
        if min(self.smoothing, self.window, self.covariance_window, self.tau) < 1:
            raise ValueError("all windows must be >= 1")
        if self.svr_c <= 0 or self.svr_gamma <= 0 or self.svr_epsilon < 0:
            raise ValueError("require C > 0, gamma > 0, epsilon >= 0")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("eta must be in [0, 1]")
        if not 0.0 < self.split < 1.0:
            raise ValueError("split must be inside (0, 1)")

    def fingerprint(self) -> str:
        """Short stable hash of every parameter, for cache validation."""
        payload = {f.name: getattr(self, f.name) for f in fields(self)}
        canonical = json.dumps(payload, sort_keys=True, default=list)
        return hashlib.sha256(canonical.encode()).hexdigest()[:12]


_INT_FIELDS = {"smoothing", "window", "covariance_window", "tau", "mu_max_points", "seed", "svr_max_iter"}
_FLOAT_FIELDS = {
    "svr_c", "svr_gamma", "svr_epsilon", "svr_tol", "mu_start", "mu_ratio", "mu_max",
    "eta", "split", "initial_budget", "request_timeout",
}
_TUPLE_FIELDS = {"universe", "fundamentals_years"}


def _coerce(name: str, value: str):
    if name in _INT_FIELDS:
        return int(value)
    if name in _FLOAT_FIELDS:
        return float(value)
    if name in _TUPLE_FIELDS:
        items = [v.strip() for v in value.split(",") if v.strip()]
        return tuple(int(v) for v in items) if name == "fundamentals_years" else tuple(items)
    return value


def load_config(path=None, env=None, overrides=None) -> RunConfig:
    """Defaults, then INI file values, then COUNSELOR_* env, then overrides."""
    values: dict = {}
    known = {f.name for f in fields(RunConfig)}
    if path is not None:
        parser = configparser.ConfigParser()
        with open(path, encoding="utf-8") as fh:
            parser.read_string(fh.read(), source=str(path))
        for section in parser.sections():
            for key, raw in parser.items(section):
                if key not in known:
                    raise ValueError(f"unknown config key {key!r} in {path}")
                values[key] = _coerce(key, raw)
    env = os.environ if env is None else env
    for key in known:
        env_key = ENV_PREFIX + key.upper()
        if env_key in env:
            values[key] = _coerce(key, env[env_key])
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(**values)


def with_overrides(config: RunConfig, **kwargs) -> RunConfig:
    return replace(config, **{k: v for k, v in kwargs.items() if v is not None})
