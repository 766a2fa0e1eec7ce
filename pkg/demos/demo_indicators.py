"""Walk through the trend indicators on a synthetic stock.

Generates a 120-day random-walk OHLCV series, computes the ADX family and
the parabolic stop-and-reverse level, and prints a small table showing how
the indicators react to the price path.

Run:  python demos/demo_indicators.py
"""

import numpy as np

from counselor.indicators import indicator_pipeline
from demo_data import make_series

series = make_series(n=120, seed=7, trend=0.002)
out = indicator_pipeline(series, tau=14)

print(f"symbol {series.symbol}: {len(series)} days, indicators valid from "
      f"index {out.valid_from} ({series.days[out.valid_from]})")
print(f"{'day':>12} {'close':>9} {'ADX':>7} {'SPDI':>7} {'SMDI':>7} {'SAR':>9}")
for t in range(out.valid_from, len(series), 5):
    print(
        f"{series.days[t].isoformat():>12} {series.close[t]:9.2f} "
        f"{out.adx[t]:7.2f} {out.spdi[t]:7.2f} {out.smdi[t]:7.2f} {out.sar[t]:9.2f}"
    )

adx_valid = out.adx[out.valid_from:]
print(f"\nADX range [{adx_valid.min():.1f}, {adx_valid.max():.1f}] "
      f"(trend strength, 0-100)")
gap = np.abs(out.spdi[out.valid_from:] - out.smdi[out.valid_from:])
print(f"mean |SPDI - SMDI| = {gap.mean():.2f}; "
      "a wide gap between the directional indicators is what lifts ADX")
