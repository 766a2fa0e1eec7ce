"""Ask the fuzzy counselor for weights and inspect every intermediate.

Feeds the counselor hand-picked technical statistics (expected returns,
volatilities, correlations) and yearly fundamentals for three stocks, then
prints the audit trail: self-stock weights, pairwise transfers, the fused
technical vector, fundamental weights, and the alpha blend.

Run:  python demos/demo_counselor.py
"""

import numpy as np

from counselor.fic import (
    FundamentalInputs,
    TechnicalInputs,
    counsel,
    default_rulebases,
)

symbols = ("GROWER", "STEADY", "DECLINER")
technical = TechnicalInputs(
    expected_returns=np.array([0.018, 0.004, -0.011]),
    sigmas=np.array([0.22, 0.06, 0.14]),
    correlations=np.array(
        [
            [1.0, 0.35, -0.10],
            [0.35, 1.0, 0.20],
            [-0.10, 0.20, 1.0],
        ]
    ),
    eta=0.4,
)
# rows: accounts receivable, capital expenditure, inventory, gross margin, income tax
fundamental = FundamentalInputs(
    features=np.array(
        [
            [4200.0, 1300.0, 900.0, 5200.0, 800.0],
            [800.0, 300.0, 1200.0, 2100.0, 350.0],
            [2500.0, 2400.0, 4800.0, 900.0, 120.0],
        ]
    )
)

out = counsel(technical, fundamental, default_rulebases(), symbols=symbols)
im = out.intermediates

def row(label, values):
    print(f"{label:<22}" + " ".join(f"{v:9.4f}" for v in values))

print(f"risk tolerance eta = {technical.eta}\n")
row("normalized return", im["e_prime"])
row("normalized risk", im["sigma_prime"])
row("self-stock weight", im["self_stock"])
row("pairwise fusion", im["pairwise_fused"])
row("technical (fused)", im["technical"])
row("fundamental weight", im["fundamental"])
row("alpha (fund. gate)", im["alpha"])
row("overall weight", out.overall_weights.weights)

print("\npairwise transfer matrix (row = receiving stock):")
with np.printoptions(precision=3, nanstr="  -  "):
    print(im["pairwise_matrix"])

best = symbols[int(np.argmax(out.overall_weights.weights))]
print(f"\nthe counselor allocates most of the budget to {best}")
