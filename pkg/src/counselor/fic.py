"""Fuzzy investment counselor: technical and fundamental weight suggestion.

Three rulebases cooperate: a self-stock system judging each stock on its
own normalized expected return and risk, a pairwise system transferring
every other stock's outlook through the correlation structure, and a
fundamental system scoring yearly accounting features against signed
impact coefficients.  Their outputs are fused with the documented
normalization formulas into one weight vector on the simplex.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .errors import NoRuleFiredError
from .fuzzy import RuleBase, defuzzify_centroid, infer, parse_rulebase
from .portfolio import WeightVector

logger = logging.getLogger(__name__)

# Impact coefficients for (accounts receivable, capital expenditure,
# inventory, gross margin, income tax), in [-1, 1].
DEFAULT_FUNDAMENTAL_COEFFICIENTS = np.array([0.3, 0.15, -0.4, -0.5, -0.9])
N_F = len(DEFAULT_FUNDAMENTAL_COEFFICIENTS)


@dataclass(frozen=True)
class TechnicalInputs:
    expected_returns: np.ndarray
    sigmas: np.ndarray
    correlations: np.ndarray
    eta: float

    def __post_init__(self):
        n = len(self.expected_returns)
        if self.sigmas.shape != (n,) or self.correlations.shape != (n, n):
            raise ValueError("technical inputs must align")
        if np.any(self.sigmas < 0):
            raise ValueError("sigmas must be non-negative")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("eta must be in [0, 1]")
        if np.max(np.abs(self.correlations - self.correlations.T)) > 1e-9:
            raise ValueError("correlation matrix must be symmetric")
        if np.max(np.abs(self.correlations)) > 1.0 + 1e-9:
            raise ValueError("correlations must lie in [-1, 1]")


@dataclass(frozen=True)
class FundamentalInputs:
    features: np.ndarray  # n_stocks x n_features
    coefficients: np.ndarray = field(
        default_factory=lambda: DEFAULT_FUNDAMENTAL_COEFFICIENTS.copy()
    )

    def __post_init__(self):
        if self.features.ndim != 2 or self.features.shape[1] != len(self.coefficients):
            raise ValueError("features must be n_stocks x n_features")
        if np.any(np.abs(self.coefficients) > 1.0):
            raise ValueError("coefficients must lie in [-1, 1]")


@dataclass(frozen=True)
class CounselorOutput:
    technical_weights: np.ndarray
    fundamental_weights: np.ndarray
    alpha: np.ndarray
    overall_weights: WeightVector
    intermediates: dict


@dataclass(frozen=True)
class CounselorRulebases:
    self_stock: RuleBase
    pairwise: RuleBase
    fundamental: RuleBase


def default_rulebases() -> CounselorRulebases:
    """Load the rulebase config files shipped with the package."""

    def load(name):
        text = resources.files("counselor.rulebases").joinpath(name).read_text()
        rb = parse_rulebase(text, source=name)
        rb.check_completeness()
        return rb

    return CounselorRulebases(
        self_stock=load("self_stock.rules"),
        pairwise=load("pairwise_stocks.rules"),
        fundamental=load("fundamental.rules"),
    )


def normalize_technical(expected_returns, sigmas, eta: float):
    """Scale raw expected returns and risks into the rulebase universes.

    E'_i = E_i / (0.001 + sum_j |E_j|)
    sigma'_i = sigma_i / ((sum_j sigma_j) * (0.0001 + sigma_scaling))
    sigma_scaling = eta + (1 - eta) * max_j sigma_j

    The risk denominator vanishes only when every sigma is zero, in which
    case sigma' is the zero vector.
    """
    e = np.asarray(expected_returns, dtype=float)
    s = np.asarray(sigmas, dtype=float)
    e_prime = e / (0.001 + np.abs(e).sum())
    total = s.sum()
    if total > 0:
        scaling = eta + (1.0 - eta) * s.max()
        s_prime = s / (total * (0.0001 + scaling))
    else:
        s_prime = np.zeros_like(s)
    return e_prime, s_prime


def self_stock_weights(inputs: TechnicalInputs, rulebase: RuleBase) -> np.ndarray:
    """Defuzzified per-stock weight from each stock's own statistics."""
    e_prime, s_prime = normalize_technical(inputs.expected_returns, inputs.sigmas, inputs.eta)
    out = np.empty(len(e_prime))
    for i in range(len(e_prime)):
        crisp = {
            "return_score": e_prime[i],
            "risk_score": s_prime[i],
            "risk_tolerance": inputs.eta,
        }
        try:
            out[i] = defuzzify_centroid(infer(rulebase, crisp))
        except NoRuleFiredError as exc:
            raise NoRuleFiredError(f"self-stock system, stock {i}: {exc}") from None
    return out


def pairwise_weights(inputs: TechnicalInputs, rulebase: RuleBase):
    """Cross-stock weights and their correlation-weighted fusion.

    Returns ``(pair_matrix, fused)`` where ``pair_matrix[i, j]`` is the
    defuzzified weight stock j's outlook suggests for stock i (NaN on the
    diagonal) and ``fused[i] = sum_{j != i} rho[i, j] * pair_matrix[i, j]``
    with the raw signed correlations.  With fewer than two stocks the stage
    is skipped and the fusion is the zero vector.
    """
    n = len(inputs.expected_returns)
    pair_matrix = np.full((n, n), np.nan)
    fused = np.zeros(n)
    if n < 2:
        return pair_matrix, fused
    e_prime, s_prime = normalize_technical(inputs.expected_returns, inputs.sigmas, inputs.eta)
    rho = inputs.correlations
    cache: dict[tuple, float] = {}
    for i in range(n):
        for j in range(n):
            if j == i:
                continue
            key = (e_prime[j], s_prime[j], rho[i, j])
            if key not in cache:
                crisp = {
                    "other_return_score": e_prime[j],
                    "other_risk_score": s_prime[j],
                    "correlation": rho[i, j],
                    "risk_tolerance": inputs.eta,
                }
                try:
                    cache[key] = defuzzify_centroid(infer(rulebase, crisp))
                except NoRuleFiredError as exc:
                    raise NoRuleFiredError(
                        f"pairwise system, stocks ({i}, {j}): {exc}"
                    ) from None
            pair_matrix[i, j] = cache[key]
            fused[i] += rho[i, j] * pair_matrix[i, j]
    return pair_matrix, fused


def fuse_technical(self_w, pairwise_w, eta: float) -> np.ndarray:
    """w_t = eta * pairwise + self, clamped to >= 0 and sum-normalized.

    Negative correlations can push single entries negative; they are
    clamped before normalizing so the output stays on the simplex.  An
    all-zero vector falls back to uniform weights with a logged warning.
    """
    raw = eta * np.asarray(pairwise_w, float) + np.asarray(self_w, float)
    clamped = np.maximum(raw, 0.0)
    total = clamped.sum()
    if total <= 0:
        logger.warning("technical weights all zero after clamping; using uniform")
        return np.full(len(clamped), 1.0 / len(clamped))
    return clamped / total


def normalize_fundamentals(features) -> np.ndarray:
    """f'_{i,k} = f_{i,k} / (0.001 + sum_k |f_{i,k}|), per stock."""
    f = np.asarray(features, dtype=float)
    denom = 0.001 + np.abs(f).sum(axis=1, keepdims=True)
    return f / denom


def fundamental_weights(inputs: FundamentalInputs, rulebase: RuleBase) -> np.ndarray:
    """Per-stock weight from yearly accounting features, sum-normalized.

    For each stock the rules fire once per (feature, coefficient) pair and
    all fired consequents aggregate into a single membership that is
    defuzzified once.
    """
    f_prime = normalize_fundamentals(inputs.features)
    n, n_f = f_prime.shape
    out = np.empty(n)
    for i in range(n):
        aggregate = None
        for k in range(n_f):
            crisp = {
                "feature_score": f_prime[i, k],
                "feature_coefficient": float(inputs.coefficients[k]),
            }
            fired = infer(rulebase, crisp)
            if aggregate is None:
                aggregate = fired
            else:
                aggregate.fired.extend(fired.fired)
        try:
            out[i] = defuzzify_centroid(aggregate)
        except NoRuleFiredError as exc:
            raise NoRuleFiredError(f"fundamental system, stock {i}: {exc}") from None
    total = out.sum()
    if total <= 0:
        logger.warning("fundamental weights sum to zero; using uniform")
        return np.full(n, 1.0 / n)
    return out / total


def combine(w_t, w_f, f_prime, coefficients, symbols=None) -> CounselorOutput:
    """Blend technical and fundamental weights through the alpha gate.

    alpha_i = (n_f + c_f . f'_i) / (2 n_f) in [0, 1] weighs the fundamental
    side; w_i = alpha_i w^f_i + w^t_i is then sum-normalized.
    """
    w_t = np.asarray(w_t, dtype=float)
    w_f = np.asarray(w_f, dtype=float)
    f_prime = np.asarray(f_prime, dtype=float)
    c_f = np.asarray(coefficients, dtype=float)
    n_f = len(c_f)
    alpha = (n_f + f_prime @ c_f) / (2.0 * n_f)
    if np.any(alpha < -1e-12) or np.any(alpha > 1 + 1e-12):
        raise ValueError(f"alpha left [0, 1]: {alpha}")
    alpha = np.clip(alpha, 0.0, 1.0)
    raw = alpha * w_f + w_t
    total = raw.sum()
    if total <= 0:
        logger.warning("combined weights sum to zero; using uniform")
        overall = np.full(len(raw), 1.0 / len(raw))
    else:
        overall = raw / total
    if symbols is None:
        symbols = tuple(f"s{i}" for i in range(len(raw)))
    return CounselorOutput(
        technical_weights=w_t,
        fundamental_weights=w_f,
        alpha=alpha,
        overall_weights=WeightVector(weights=overall, symbols=tuple(symbols)),
        intermediates={},
    )


def write_audit_csv(entries, path):
    """Per-day CSV of every counselor intermediate, one row per stock.

    ``entries`` is an iterable of (date, CounselorOutput) pairs; columns
    cover the self-stock, pairwise-fused, technical, fundamental, alpha
    and overall values so the final weights can be reconstructed from the
    file alone.
    """
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["date", "symbol", "self_stock", "pairwise_fused", "technical",
             "fundamental", "alpha", "overall"]
        )
        for date, out in entries:
            im = out.intermediates
            for i, sym in enumerate(out.overall_weights.symbols):
                writer.writerow(
                    [
                        date.isoformat() if hasattr(date, "isoformat") else date,
                        sym,
                        f"{im['self_stock'][i]:.10f}",
                        f"{im['pairwise_fused'][i]:.10f}",
                        f"{im['technical'][i]:.10f}",
                        f"{im['fundamental'][i]:.10f}",
                        f"{out.alpha[i]:.10f}",
                        f"{out.overall_weights.weights[i]:.10f}",
                    ]
                )


def counsel(
    technical: TechnicalInputs,
    fundamental: FundamentalInputs,
    rulebases: CounselorRulebases | None = None,
    symbols=None,
) -> CounselorOutput:
    """Full pipeline: self-stock, pairwise, fusion, fundamentals, blend.

    ``intermediates`` carries every stage for audit: the normalized inputs,
    per-stock and per-pair weights, both fused vectors and alpha, enough to
    reconstruct the final weights from the stated formulas alone.
    """
    if rulebases is None:
        rulebases = default_rulebases()
    e_prime, s_prime = normalize_technical(
        technical.expected_returns, technical.sigmas, technical.eta
    )
    w_ts = self_stock_weights(technical, rulebases.self_stock)
    pair_matrix, w_tp = pairwise_weights(technical, rulebases.pairwise)
    w_t = fuse_technical(w_ts, w_tp, technical.eta)
    f_prime = normalize_fundamentals(fundamental.features)
    w_f = fundamental_weights(fundamental, rulebases.fundamental)
    out = combine(w_t, w_f, f_prime, fundamental.coefficients, symbols=symbols)
    out.intermediates.update(
        {
            "e_prime": e_prime,
            "sigma_prime": s_prime,
            "self_stock": w_ts,
            "pairwise_matrix": pair_matrix,
            "pairwise_fused": w_tp,
            "technical": w_t,
            "fundamental": w_f,
            "f_prime": f_prime,
            "alpha": out.alpha,
        }
    )
    return out
