"""Where the multiplicity condition switches on.

For the bundle metric with fiber radius r the condition
-a^2 r^2 + k(k-1)/r^2 > l(l+m-1)(m+k-1) - m(m-1) holds for small r only.
A sweep locates the flip; root finding on the margin pins it down.

Run:  python3 demos/04_threshold_sweep.py
"""
import numpy as np
from scipy.optimize import brentq

from cscbundles import bundle_thresholds

m, k, a, l = 2, 3, 1.0, 1
rs = np.linspace(0.2, 1.2, 11)
for r in rs:
    pred = bundle_thresholds(m, k, a, float(r), l)["multiplicity_base"]
    print(f"r = {r:.2f}  holds = {str(pred.holds):5}  margin = {pred.margin:9.4f}")

root = brentq(lambda r: bundle_thresholds(m, k, a, r, l)["multiplicity_base"].margin, 0.2, 1.2)
print(f"\nmargin vanishes at r = {root:.12f}")
