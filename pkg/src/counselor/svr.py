"""Epsilon-insensitive support vector regression with an RBF kernel.

The dual is solved by sequential minimal optimization over the stacked
variables z = [alpha; alpha*] in [0, C]^(2l):

    minimize  (1/2) z' Q z + p' z   s.t.  q' z = 0,
    Q[s, t] = q_s q_t k(x_{s mod l}, x_{t mod l}),
    p = [eps - y; eps + y],  q = [+1...; -1...]

At each step the maximal-violating pair is updated in closed form; the
stopping rule is the standard duality-gap bound m(z) - M(z) <= tol.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DimensionMismatchError

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAS_NUMBA = False

DEFAULT_C = 1000.0
DEFAULT_GAMMA = 0.001
DEFAULT_EPSILON = 0.1

_SV_FLOOR = 1e-9  # |beta| below this is not a support vector
_JIT_THRESHOLD = 64  # samples; below this the numpy loop is fast enough


def rbf_kernel(x, y, gamma: float) -> float:
    """k(x, y) = exp(-gamma * ||x - y||^2)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise DimensionMismatchError(f"kernel inputs {x.shape} vs {y.shape}")
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    d = x - y
    return float(np.exp(-gamma * np.dot(d, d)))


def rbf_gram(X, Y, gamma: float) -> np.ndarray:
    """Kernel matrix between the rows of X and the rows of Y."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    sq = (
        np.sum(X * X, axis=1)[:, None]
        + np.sum(Y * Y, axis=1)[None, :]
        - 2.0 * (X @ Y.T)
    )
    return np.exp(-gamma * np.clip(sq, 0.0, None))


@dataclass(frozen=True)
class SvrModel:
    """Trained regressor: f(x) = sum_i beta_i k(sv_i, x) + bias."""

    support_vectors: np.ndarray
    dual_coefficients: np.ndarray  # beta = alpha - alpha*, in [-C, C]
    bias: float
    gamma: float
    c: float
    epsilon: float

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.support_vectors.shape[1]:
            raise DimensionMismatchError(
                f"expected dimension {self.support_vectors.shape[1]}, got {X.shape[1]}"
            )
        k = rbf_gram(X, self.support_vectors, self.gamma)
        return k @ self.dual_coefficients + self.bias

    def save(self, path):
        payload = {
            "format": "svr-model/1",
            "gamma": self.gamma,
            "c": self.c,
            "epsilon": self.epsilon,
            "bias": self.bias,
            "support_vectors": self.support_vectors.tolist(),
            "dual_coefficients": self.dual_coefficients.tolist(),
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh)

    @classmethod
    def load(cls, path) -> "SvrModel":
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        if payload.get("format") != "svr-model/1":
            raise ValueError(f"unsupported model file format: {payload.get('format')!r}")
        return cls(
            support_vectors=np.asarray(payload["support_vectors"], dtype=float),
            dual_coefficients=np.asarray(payload["dual_coefficients"], dtype=float),
            bias=float(payload["bias"]),
            gamma=float(payload["gamma"]),
            c=float(payload["c"]),
            epsilon=float(payload["epsilon"]),
        )


@dataclass(frozen=True)
class SmoTelemetry:
    iterations: int
    final_gap: float
    objective: float


def train_svr(
    X,
    y,
    c: float = DEFAULT_C,
    gamma: float = DEFAULT_GAMMA,
    epsilon: float = DEFAULT_EPSILON,
    tol: float = 1e-6,
    max_iter: int = 1_000_000,
    return_telemetry: bool = False,
    use_jit: bool | None = None,
):
    """Fit the epsilon-SVR dual by SMO.

    Deterministic for a fixed sample order.  Raises
    :class:`ConvergenceError` carrying the final violating-pair gap if the
    iteration cap is reached first.  Large problems run a compiled version
    of the identical update loop (``use_jit`` overrides the size-based
    choice); both paths produce the same iterates.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    l = len(y)
    if X.shape[0] != l:
        raise DimensionMismatchError(f"{X.shape[0]} samples vs {l} targets")
    if l < 2:
        raise ValueError("need at least 2 samples")
    if c <= 0 or gamma <= 0 or epsilon < 0:
        raise ValueError("require c > 0, gamma > 0, epsilon >= 0")

    K = rbf_gram(X, X, gamma)
    q = np.concatenate([np.ones(l), -np.ones(l)])
    p = np.concatenate([epsilon - y, epsilon + y])
    idx = np.concatenate([np.arange(l), np.arange(l)])  # sample index per variable

    if use_jit is None:
        use_jit = HAS_NUMBA and l >= _JIT_THRESHOLD
    if use_jit and HAS_NUMBA:
        z, grad, gap, it = _smo_jit(K, y, q, idx, c, epsilon, tol, max_iter)
    else:
        z, grad, gap, it = _smo_numpy(K, y, q, idx, c, epsilon, tol, max_iter)
    if gap > tol:
        raise ConvergenceError(
            f"SMO stopped after {it} iterations above tolerance", residual=float(gap)
        )

    beta = z[:l] - z[l:]
    bias = _bias_from_kkt(z, grad, q, c)
    keep = np.abs(beta) > _SV_FLOOR
    if not keep.any():
        keep = np.zeros(l, dtype=bool)
        keep[0] = True
    model = SvrModel(
        support_vectors=X[keep],
        dual_coefficients=beta[keep],
        bias=bias,
        gamma=gamma,
        c=c,
        epsilon=epsilon,
    )
    if return_telemetry:
        objective = 0.5 * float(beta @ K @ beta) + float(p @ z)
        return model, SmoTelemetry(iterations=it, final_gap=float(gap), objective=objective)
    return model


def dual_objective(K: np.ndarray, y: np.ndarray, epsilon: float, z: np.ndarray) -> float:
    """(1/2) z'Qz + p'z for the stacked dual variables."""
    l = len(y)
    beta = z[:l] - z[l:]
    p = np.concatenate([epsilon - y, epsilon + y])
    return 0.5 * float(beta @ K @ beta) + float(p @ z)


def _smo_numpy(K, y, q, idx, c, epsilon, tol, max_iter):
    """Vectorized SMO: maximal violator plus second-order partner."""
    l = len(y)
    z = np.zeros(2 * l)
    grad = np.concatenate([epsilon - y, epsilon + y])
    diag = np.diag(K)[idx]
    gap = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        # -q_t grad_t over coordinates that can move up (I_up) / down (I_low)
        qg = -q * grad
        up = ((q > 0) & (z < c)) | ((q < 0) & (z > 0))
        low = ((q > 0) & (z > 0)) | ((q < 0) & (z < c))
        i = int(np.flatnonzero(up)[np.argmax(qg[up])])
        gap = qg[i] - float(qg[low].min())
        if gap <= tol:
            break

        # Partner maximizing the second-order decrease b^2/a below the leader.
        k_col = K[idx, idx[i]]
        b_all = qg[i] - qg
        a_all = diag[i] + diag - 2.0 * q[i] * q * k_col
        a_all = np.where(a_all > 1e-12, a_all, 1e-12)
        gain = np.where(low & (b_all > 0), (b_all * b_all) / a_all, -np.inf)
        j = int(np.argmax(gain))
        if not np.isfinite(gain[j]):
            break

        a = diag[i] + diag[j] - 2.0 * q[i] * q[j] * K[idx[i], idx[j]]
        b = q[i] * grad[i] - q[j] * grad[j]
        delta = -b / a if a > 1e-300 else (np.inf if b < 0 else -np.inf)

        # Box bounds for the feasible step z_i += q_i d, z_j -= q_j d.
        lo_i, hi_i = (-z[i], c - z[i]) if q[i] > 0 else (z[i] - c, z[i])
        lo_j, hi_j = (z[j] - c, z[j]) if q[j] > 0 else (-z[j], c - z[j])
        delta = float(np.clip(delta, max(lo_i, lo_j), min(hi_i, hi_j)))
        if delta == 0.0:
            break
        z[i] += q[i] * delta
        z[j] -= q[j] * delta
        grad += delta * q * (K[idx, idx[i]] - K[idx, idx[j]])
    return z, grad, float(gap), it


def _smo_jit_impl(K, y, q, idx, c, epsilon, tol, max_iter):  # pragma: no cover
    n = 2 * len(y)
    l = len(y)
    z = np.zeros(n)
    grad = np.empty(n)
    for s in range(n):
        grad[s] = epsilon - y[s] if s < l else epsilon + y[s - l]
    diag = np.empty(n)
    for s in range(n):
        diag[s] = K[idx[s], idx[s]]
    gap = np.inf
    it = 0
    while it < max_iter:
        it += 1
        best = -np.inf
        i = -1
        for s in range(n):
            if (q[s] > 0 and z[s] < c) or (q[s] < 0 and z[s] > 0):
                v = -q[s] * grad[s]
                if v > best:
                    best = v
                    i = s
        m_low = np.inf
        j = -1
        best_gain = -np.inf
        for s in range(n):
            if (q[s] > 0 and z[s] > 0) or (q[s] < 0 and z[s] < c):
                v = -q[s] * grad[s]
                if v < m_low:
                    m_low = v
                b = best - v
                if b > 0:
                    a = diag[i] + diag[s] - 2.0 * q[i] * q[s] * K[idx[i], idx[s]]
                    if a < 1e-12:
                        a = 1e-12
                    g = (b * b) / a
                    if g > best_gain:
                        best_gain = g
                        j = s
        gap = best - m_low
        if gap <= tol or j < 0:
            break
        a = diag[i] + diag[j] - 2.0 * q[i] * q[j] * K[idx[i], idx[j]]
        b = q[i] * grad[i] - q[j] * grad[j]
        if a > 1e-300:
            delta = -b / a
        else:
            delta = np.inf if b < 0 else -np.inf
        if q[i] > 0:
            lo_i, hi_i = -z[i], c - z[i]
        else:
            lo_i, hi_i = z[i] - c, z[i]
        if q[j] > 0:
            lo_j, hi_j = z[j] - c, z[j]
        else:
            lo_j, hi_j = -z[j], c - z[j]
        lo = max(lo_i, lo_j)
        hi = min(hi_i, hi_j)
        if delta < lo:
            delta = lo
        if delta > hi:
            delta = hi
        if delta == 0.0:
            break
        z[i] += q[i] * delta
        z[j] -= q[j] * delta
        for s in range(n):
            grad[s] += delta * q[s] * (K[idx[s], idx[i]] - K[idx[s], idx[j]])
    return z, grad, gap, it


if HAS_NUMBA:
    _smo_jit = numba.njit(cache=True)(_smo_jit_impl)
else:  # pragma: no cover
    _smo_jit = _smo_numpy


def _bias_from_kkt(z, grad, q, c):
    """-q_s grad_s equals the bias for every free variable; average them.

    Falls back to the midpoint of the feasibility band when no variable is
    strictly inside the box.
    """
    qg = -q * grad
    free = (z > 1e-12 * c) & (z < c * (1 - 1e-12))
    if free.any():
        return float(qg[free].mean())
    up = ((q > 0) & (z < c)) | ((q < 0) & (z > 0))
    low = ((q > 0) & (z > 0)) | ((q < 0) & (z < c))
    hi = qg[up].max() if up.any() else 0.0
    lo = qg[low].min() if low.any() else 0.0
    return float(0.5 * (hi + lo))
