"""Straight-line reference of the counselor's two weight algorithms.

Every normalization, loop and fusion is written out verbatim as scalar
arithmetic; only the (separately certified) fuzzy inference engine is
shared with the package.
"""

from counselor.fuzzy import defuzzify_centroid, infer


def ref_counsel(E, sigma, rho, eta, features, c_f, rulebases):
    """Return a dict of every intermediate of the technical+fundamental flow."""
    n = len(E)
    n_f = len(c_f)

    # --- technical analysis -------------------------------------------------
    sum_abs_e = sum(abs(x) for x in E)
    e_prime = [E[i] / (0.001 + sum_abs_e) for i in range(n)]
    sum_sigma = sum(sigma)
    max_sigma = max(sigma)
    sigma_scaling = eta + (1.0 - eta) * max_sigma
    if sum_sigma > 0:
        s_prime = [sigma[i] / (sum_sigma * (0.0001 + sigma_scaling)) for i in range(n)]
    else:
        s_prime = [0.0] * n

    w_ts = []
    for i in range(n):
        agg = infer(
            rulebases.self_stock,
            {
                "return_score": e_prime[i],
                "risk_score": s_prime[i],
                "risk_tolerance": eta,
            },
        )
        w_ts.append(defuzzify_centroid(agg))

    w_tp = []
    pair = {}
    for i in range(n):
        total = 0.0
        for j in range(n):
            if j == i:
                continue
            agg = infer(
                rulebases.pairwise,
                {
                    "other_return_score": e_prime[j],
                    "other_risk_score": s_prime[j],
                    "correlation": rho[i][j],
                    "risk_tolerance": eta,
                },
            )
            pair[(i, j)] = defuzzify_centroid(agg)
            total += rho[i][j] * pair[(i, j)]
        w_tp.append(total)

    w_t = [eta * w_tp[i] + w_ts[i] for i in range(n)]
    w_t = [max(x, 0.0) for x in w_t]
    total = sum(w_t)
    w_t = [x / total for x in w_t] if total > 0 else [1.0 / n] * n

    # --- fundamental analysis -----------------------------------------------
    f_prime = []
    for i in range(n):
        denom = 0.001 + sum(abs(features[i][k]) for k in range(n_f))
        f_prime.append([features[i][k] / denom for k in range(n_f)])

    w_f = []
    for i in range(n):
        merged = None
        for k in range(n_f):
            agg = infer(
                rulebases.fundamental,
                {"feature_score": f_prime[i][k], "feature_coefficient": c_f[k]},
            )
            if merged is None:
                merged = agg
            else:
                merged.fired.extend(agg.fired)
        w_f.append(defuzzify_centroid(merged))
    total = sum(w_f)
    w_f = [x / total for x in w_f]

    # --- combination ----------------------------------------------------------
    alpha = [
        (n_f + sum(c_f[k] * f_prime[i][k] for k in range(n_f))) / (2.0 * n_f)
        for i in range(n)
    ]
    w = [alpha[i] * w_f[i] + w_t[i] for i in range(n)]
    total = sum(w)
    w = [x / total for x in w]
    return {
        "e_prime": e_prime,
        "s_prime": s_prime,
        "w_ts": w_ts,
        "pair": pair,
        "w_tp": w_tp,
        "w_t": w_t,
        "f_prime": f_prime,
        "w_f": w_f,
        "alpha": alpha,
        "w": w,
    }
