"""Jacobi functions and the warping profiles they produce.

Run:  python3 demos/01_elliptic_profiles.py
"""
import math

import numpy as np

from cscbundles import jacobi, quarter_period

# K grows only logarithmically as the modulus approaches 1
for k in (0.0, 0.5, 1 / math.sqrt(2), 0.99, 1 - 1e-9):
    print(f"k = {k:<20.12g} K(k) = {quarter_period(k):.15f}")

# cn and sn trade places over a quarter period; dn never drops below k'
k = 0.8
K = quarter_period(k)
t = np.linspace(0, K, 6)
cn, sn, dn, _ = jacobi(t, k)
print("\n     t        cn        sn        dn")
for row in zip(t, cn, sn, dn):
    print("  ".join(f"{x:8.5f}" for x in row))

# identities hold to rounding on a wide argument range
t = np.linspace(-40, 40, 2001)
cn, sn, dn, _ = jacobi(t, k)
print("\nmax |cn^2 + sn^2 - 1|     =", np.abs(cn**2 + sn**2 - 1).max())
print("max |dn^2 + k^2 sn^2 - 1| =", np.abs(dn**2 + k * k * sn**2 - 1).max())
