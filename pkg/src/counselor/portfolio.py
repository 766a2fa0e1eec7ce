"""Mean-variance weight suggestion on the budget simplex.

Solves   minimize_w  (1/mu) w' S w - w' r   s.t.  w >= 0, sum(w) = 1
for a sweep of regularization values mu, yielding the risk/return frontier,
then maps an investor's risk tolerance eta in [0, 1] linearly across the
frontier's risk range and picks the highest-return point under that cap.

The solver is a projected-gradient / active-set hybrid: accelerated
projected gradient descent localizes the support, then the reduced KKT
system is solved exactly on that support and verified.  Every solve returns
a KKT certificate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DataIntegrityError, DimensionMismatchError
from .market_data import ReturnSeries

DEFAULT_COVARIANCE_WINDOW = 100
KKT_TOL = 1e-8
_EIG_FLOOR = -1e-9

DEFAULT_MU_START = 1e-6
DEFAULT_MU_RATIO = 1.25
DEFAULT_MU_MAX = 1e6
DEFAULT_MU_MAX_POINTS = 1_000_000


@dataclass(frozen=True)
class CovarianceEstimate:
    """Trailing-window covariance of per-stock returns."""

    matrix: np.ndarray
    window: int
    mean_returns: np.ndarray

    def sigmas(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.matrix), 0.0, None))

    def correlations(self) -> np.ndarray:
        """rho[i, j] = S[i, j] / (sigma_i sigma_j); 0 where a sigma is 0."""
        s = self.sigmas()
        denom = np.outer(s, s)
        rho = np.zeros_like(self.matrix)
        np.divide(self.matrix, denom, out=rho, where=denom > 0)
        return rho


@dataclass(frozen=True)
class WeightVector:
    weights: np.ndarray
    symbols: tuple[str, ...]

    def __post_init__(self):
        if len(self.weights) != len(self.symbols):
            raise DimensionMismatchError("weights and symbols must align")
        if np.any(self.weights < -1e-12) or abs(self.weights.sum() - 1.0) > 1e-9:
            raise DataIntegrityError("weights must lie on the simplex")


@dataclass(frozen=True)
class FrontierPoint:
    mu: float
    risk: float  # sqrt(w' S w)
    expected_return: float  # w' r
    weights: WeightVector


@dataclass(frozen=True)
class Frontier:
    points: tuple[FrontierPoint, ...]

    @property
    def risk_min(self) -> float:
        return min(p.risk for p in self.points)

    @property
    def risk_max(self) -> float:
        return max(p.risk for p in self.points)


def estimate_covariance(
    returns, window: int = DEFAULT_COVARIANCE_WINDOW, end_day: int | None = None
) -> CovarianceEstimate:
    """Covariance of the trailing ``window`` returns ending at ``end_day``.

    ``returns`` is a list of aligned :class:`ReturnSeries` (or plain arrays).
    Element (i, j) is the population expectation E[(r_i - rbar_i)(r_j - rbar_j)]
    over the window.  Eigenvalues in [-1e-9, 0) are clipped to zero; anything
    more negative is a data bug and raises.
    """
    rows = [r.values if isinstance(r, ReturnSeries) else np.asarray(r, float) for r in returns]
    length = min(len(r) for r in rows)
    if end_day is None:
        end_day = length - 1
    if end_day >= length or end_day + 1 < window:
        from .errors import InsufficientHistoryError

        raise InsufficientHistoryError(
            f"need {window} returns ending at index {end_day}, have {end_day + 1}"
        )
    data = np.stack([r[end_day + 1 - window : end_day + 1] for r in rows])
    means = data.mean(axis=1)
    centered = data - means[:, None]
    matrix = centered @ centered.T / window
    matrix = 0.5 * (matrix + matrix.T)
    eigs = np.linalg.eigvalsh(matrix)
    if eigs.min() < _EIG_FLOOR:
        raise DataIntegrityError(
            f"covariance has eigenvalue {eigs.min():.3e} below the numerical floor"
        )
    if eigs.min() < 0:
        vals, vecs = np.linalg.eigh(matrix)
        matrix = (vecs * np.clip(vals, 0.0, None)) @ vecs.T
        matrix = 0.5 * (matrix + matrix.T)
    return CovarianceEstimate(matrix=matrix, window=window, mean_returns=means)


def project_to_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto {w : w >= 0, sum(w) = 1} (sort-based)."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ks = np.arange(1, len(v) + 1)
    cond = u - css / ks > 0
    k = ks[cond][-1]
    theta = css[k - 1] / k
    return np.maximum(v - theta, 0.0)


def kkt_residual(S: np.ndarray, r: np.ndarray, mu: float, w: np.ndarray) -> float:
    """Certificate for a candidate solution of the simplex QP.

    Returns the max of primal feasibility violations and the complementary
    slackness / stationarity defect max_i w_i * (g_i - min_j g_j) where
    g = (2/mu) S w - r.  Zero iff w satisfies the KKT conditions.
    """
    g = (2.0 / mu) * (S @ w) - r
    lam = g.min()
    comp = float(np.max(w * (g - lam)))
    feas = max(abs(w.sum() - 1.0), float(np.max(np.maximum(-w, 0.0))))
    return max(comp, feas)


def solve_markowitz(S, r, mu: float, symbols=None, tol: float = KKT_TOL) -> WeightVector:
    """Minimize (1/mu) w'Sw - w'r over the simplex, to a KKT certificate."""
    if mu <= 0:
        raise ValueError("mu must be positive")
    S = S.matrix if isinstance(S, CovarianceEstimate) else np.asarray(S, dtype=float)
    r = np.asarray(r, dtype=float)
    n = len(r)
    if S.shape != (n, n):
        raise DimensionMismatchError(f"S is {S.shape}, r has length {n}")
    if symbols is None:
        symbols = tuple(f"w{i}" for i in range(n))
    if n == 1:
        return WeightVector(weights=np.array([1.0]), symbols=tuple(symbols))

    w = _projected_gradient(S, r, mu, tol)
    w = _active_set_polish(S, r, mu, w, tol)
    res = kkt_residual(S, r, mu, w)
    if res > tol:
        retry = _projected_gradient(S, r, mu, tol * 1e-2, max_iter=200_000, w0=w)
        retry = _active_set_polish(S, r, mu, retry, tol)
        if kkt_residual(S, r, mu, retry) < res:
            w = retry
            res = kkt_residual(S, r, mu, w)
    if res > tol:
        raise ConvergenceError("markowitz solve did not reach KKT tolerance", residual=res)
    w = np.maximum(w, 0.0)
    w /= w.sum()
    return WeightVector(weights=w, symbols=tuple(symbols))


def sweep_frontier(S, r, mu_schedule, symbols=None) -> Frontier:
    """One frontier point per mu, stopping once w'Sw reaches max(diag(S)).

    The stopping point itself is included.  The schedule must be positive
    and strictly increasing.
    """
    S_mat = S.matrix if isinstance(S, CovarianceEstimate) else np.asarray(S, dtype=float)
    mu_schedule = list(mu_schedule)
    if not mu_schedule:
        raise ValueError("mu schedule is empty")
    if any(b <= a for a, b in zip(mu_schedule, mu_schedule[1:])) or mu_schedule[0] <= 0:
        raise ValueError("mu schedule must be positive and strictly increasing")
    max_var = float(np.max(np.diag(S_mat)))
    points = []
    for mu in mu_schedule:
        wv = solve_markowitz(S_mat, r, mu, symbols=symbols)
        w = wv.weights
        variance = float(w @ S_mat @ w)
        points.append(
            FrontierPoint(
                mu=mu,
                risk=float(np.sqrt(max(variance, 0.0))),
                expected_return=float(w @ np.asarray(r, dtype=float)),
                weights=wv,
            )
        )
        if variance >= max_var - 1e-15:
            break
    return Frontier(points=tuple(points))


def geometric_mu_schedule(
    start: float = DEFAULT_MU_START,
    ratio: float = DEFAULT_MU_RATIO,
    mu_max: float = DEFAULT_MU_MAX,
    max_points: int = DEFAULT_MU_MAX_POINTS,
):
    """Strictly increasing geometric schedule, capped by value and count."""
    out = []
    mu = start
    while mu <= mu_max and len(out) < max_points:
        out.append(mu)
        mu *= ratio
    return out


def select_by_risk_tolerance(frontier: Frontier, eta: float) -> FrontierPoint:
    """Highest-return frontier point with risk at most
    risk_min + eta * (risk_max - risk_min)."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must be in [0, 1], got {eta}")
    if not frontier.points:
        raise ValueError("empty frontier")
    cap = frontier.risk_min + eta * (frontier.risk_max - frontier.risk_min)
    candidates = [p for p in frontier.points if p.risk <= cap + 1e-12]
    return max(candidates, key=lambda p: p.expected_return)


def _projected_gradient(S, r, mu, tol, max_iter=20_000, w0=None):
    """FISTA-style accelerated projected gradient on the simplex."""
    n = len(r)
    scale = 2.0 / mu
    lam_max = float(np.linalg.eigvalsh(S).max())
    step = 1.0 / (scale * lam_max) if lam_max > 0 else 1.0
    w = np.full(n, 1.0 / n) if w0 is None else w0.copy()
    y = w.copy()
    t_k = 1.0
    for _ in range(max_iter):
        grad = scale * (S @ y) - r
        w_next = project_to_simplex(y - step * grad)
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_k * t_k))
        y = w_next + ((t_k - 1.0) / t_next) * (w_next - w)
        moved = float(np.max(np.abs(w_next - w)))
        w, t_k = w_next, t_next
        if moved < 1e-13:
            break
        if kkt_residual(S, r, mu, w) <= tol * 0.1:
            break
    return w


def _active_set_polish(S, r, mu, w, tol, max_iter=200):
    """Exact solve on the PG-identified support, with active-set exchanges."""
    n = len(r)
    scale = 2.0 / mu
    free = w > 1e-10
    if not free.any():
        free = np.ones(n, dtype=bool)
    best = w
    best_res = kkt_residual(S, r, mu, w)
    visited = set()
    for _ in range(max_iter):
        key = frozenset(np.flatnonzero(free).tolist())
        if key in visited:
            break
        visited.add(key)
        idx = np.flatnonzero(free)
        k = len(idx)
        kkt = np.zeros((k + 1, k + 1))
        kkt[:k, :k] = scale * S[np.ix_(idx, idx)]
        kkt[:k, k] = -1.0
        kkt[k, :k] = 1.0
        rhs = np.concatenate([r[idx], [1.0]])
        sol, *_ = np.linalg.lstsq(kkt, rhs, rcond=None)
        w_f = sol[:k]
        if w_f.min() < -1e-12:
            # Drop the most negative coordinate and re-solve.
            drop = idx[np.argmin(w_f)]
            free[drop] = False
            if not free.any():
                break
            continue
        cand = np.zeros(n)
        cand[idx] = np.maximum(w_f, 0.0)
        total = cand.sum()
        if total <= 0:
            break
        cand /= total
        res = kkt_residual(S, r, mu, cand)
        if res < best_res:
            best, best_res = cand, res
        if res <= tol * 1e-2:
            return cand
        # Add the most violating zero coordinate (gradient below the support level).
        g = scale * (S @ cand) - r
        lam = g[idx].mean() if k else g.min()
        zeros = np.flatnonzero(~free)
        if len(zeros) == 0:
            break
        viol = lam - g[zeros]
        j = np.argmax(viol)
        if viol[j] <= tol * 1e-3:
            break
        free[zeros[j]] = True
    return best
