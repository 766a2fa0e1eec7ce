"""Dense reference solve of the epsilon-SVR dual for tiny problems.

Builds the full stacked QP over z = [alpha; alpha*] and hands it to a
general-purpose convex QP solver; used only to certify the package's SMO
solver at toy scale.
"""

import numpy as np
from cvxopt import matrix, solvers

solvers.options["show_progress"] = False
solvers.options["abstol"] = 1e-10
solvers.options["reltol"] = 1e-10
solvers.options["feastol"] = 1e-10


def rbf(X, gamma):
    sq = (
        np.sum(X * X, axis=1)[:, None]
        + np.sum(X * X, axis=1)[None, :]
        - 2.0 * (X @ X.T)
    )
    return np.exp(-gamma * np.clip(sq, 0.0, None))


def solve_dual(X, y, c, gamma, epsilon, ridge=1e-10):
    """Return (z, objective) for the stacked dual, solved densely."""
    X = np.atleast_2d(np.asarray(X, float))
    y = np.asarray(y, float)
    l = len(y)
    K = rbf(X, gamma)
    Q = np.block([[K, -K], [-K, K]]) + ridge * np.eye(2 * l)
    p = np.concatenate([epsilon - y, epsilon + y])
    G = np.vstack([np.eye(2 * l), -np.eye(2 * l)])
    h = np.concatenate([np.full(2 * l, c), np.zeros(2 * l)])
    A = np.concatenate([np.ones(l), -np.ones(l)])[None, :]
    sol = solvers.qp(
        matrix(Q), matrix(p), matrix(G), matrix(h), matrix(A), matrix([0.0])
    )
    z = np.array(sol["x"]).ravel()
    beta = z[:l] - z[l:]
    objective = 0.5 * float(beta @ K @ beta) + float(p @ z)
    return z, objective
