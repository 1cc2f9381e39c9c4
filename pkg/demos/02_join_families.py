"""Constant scalar curvature metrics on a fiberwise join.

Two sphere bundles with O'Neill norms a1, a2 are joined fiberwise.  For each
admissible modulus the warping profiles are Jacobi functions and the
resulting metric has constant scalar curvature R.

Run:  python3 demos/02_join_families.py
"""
import math

import numpy as np

from cscbundles import (BaseGeometry, JoinParams, admissible_modulus_range, build_profiles,
                        family_scan, limit_probe, scal_join_total, solve)

# the worked instance: k1 = k2 = 1, a1 = a2 = sqrt(10), k^2 = 1/2
p = JoinParams(BaseGeometry(2, 0.0), 1, 1, math.sqrt(10), math.sqrt(10))
for b in admissible_modulus_range(p):
    print(b.branch.value, "k^2 in", b.k_sq_range if not b.is_round else "{0}, gamma free")

ell = [b for b in admissible_modulus_range(p) if not b.is_round][0]
sol = solve(p, k=math.sqrt(0.5), branch=ell)
print(f"\ngamma^2 = {sol.gamma**2:.15f}   (sqrt 2 = {math.sqrt(2):.15f})")
print(f"R       = {sol.scal_total:.15f}   (-3 sqrt 2 = {-3 * math.sqrt(2):.15f})")

# evaluate the scalar curvature pointwise: it really is constant
prof = build_profiles(sol)
t = prof.interior_grid(7)
print("scal(t) =", np.array2string(scal_join_total(p.base, p.constants, prof, t), precision=12))

# unequal norms: two families, one for each order of the summands
p = JoinParams(BaseGeometry(2, 0.0), 1, 2, 2.0, 1.0)
for (branch, swapped), rows in family_scan(p, n_points=5).items():
    print(f"\n{branch.value}{' (swapped)' if swapped else ''}")
    for r in rows:
        print(f"  k={r.k:.4f} gamma={r.gamma:8.4f} R={r.R:12.5f} residual={r.residual:.1e}")

# behaviour as k -> 1 depends on k2 - (k1 + 1)
for k1, k2 in ((1, 3), (1, 2), (3, 1)):
    q = JoinParams(BaseGeometry(2, 0.0), k1, k2, 1.0, 1.0)
    b = [x for x in admissible_modulus_range(q) if not x.is_round][0]
    probe = limit_probe(q, b, "upper")
    print(f"\n(k1,k2)=({k1},{k2}) expected {probe.expected}, observed {probe.observed}")
    print("  R - R_base:", np.array2string(probe.r_minus_base[-4:], precision=4))
