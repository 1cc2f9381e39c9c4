"""Counting radial solutions of the Yamabe equation by shooting.

On S^2(1) x S^3(r) the conformal factor depends only on the polar distance
on the S^3 factor.  For r = 2 the first eigenvalue 3/4 is below
R/(N-1) = 7/8, so at least one non-constant solution must exist.

Run:  python3 demos/03_yamabe_counts.py
"""
from cscbundles import YamabeProblem, count_radial_solutions, uniqueness_predicate

cases = {
    "S^2 x S^3(2)": YamabeProblem.from_bundle(2, 3, 0.0, 2.0),
    "circle, R=2.5": YamabeProblem(3, 2.5, 1, 1.0),
    "circle, R=1.9": YamabeProblem(3, 1.9, 1, 1.0),
}
for name, prob in cases.items():
    rep = count_radial_solutions(prob)
    print(f"{name}: N={prob.n}, R={prob.R}, d={prob.d}, r={prob.r}")
    print(f"  uniqueness hypothesis: {uniqueness_predicate(prob)}, "
          f"guaranteed at least {rep.guaranteed_lower_bound}")
    for s in rep.solutions:
        tag = "constant" if s.is_constant else f"v(pi r) = {s.far_value:.6f}"
        print(f"  alpha = {s.alpha:.10f}  flux residual {s.boundary_residual:.1e}  "
              f"ODE residual {s.ode_residual:.1e}  {tag}")
    print(f"  {rep.count} solutions, {rep.reflection_collapsed_count} up to reflection\n")
