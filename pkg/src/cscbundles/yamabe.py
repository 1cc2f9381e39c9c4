"""Counting positive radial solutions of subcritical Yamabe-type equations.

On a round sphere ``S^d(r)`` and for ``N > d``, ``R > 0`` we look for positive
solutions of

    -a_N Lap v + R v = R v^(p_N - 1),   a_N = 4(N-1)/(N-2),  p_N = 2N/(N-2),

that depend only on the distance ``t`` from a pole.  With the round-sphere
Laplacian ``Lap v = v'' + (d-1)/r cot(t/r) v'`` this is the ODE

    v'' + (d-1)/r cot(t/r) v' + (R/a_N) (v^(p_N-1) - v) = 0,   0 < t < pi r,

with ``v'(0) = 0`` and regularity at the far pole ``t = pi r``.  For
``d = 1`` the cot term is absent and ``[0, pi r]`` carries Neumann
conditions (even, ``2 pi r``-periodic solutions on the circle).

Solutions are found by shooting on ``alpha = v(0)``.  Both poles are
regular-singular for ``d >= 2``: a generic shot picks up a component
behaving like ``(pi r - t)^(2-d)`` (log for ``d = 2``), so ``v'`` is unbounded
there.  The matching function is therefore the flux
``sin(t/r)^(d-1) v'(t)`` evaluated just before the far pole: it tends to a
finite multiple of the singular coefficient and vanishes for regular
solutions (for ``d = 1`` it is plainly ``v'(pi r)``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .exceptions import DomainError
from .fiber_geometry import BaseGeometry, sphere_bundle_scalar
from .tolerances import DEFAULT, Tolerances

#: Integration starts this fraction of the pole-to-pole distance away from each pole.
POLE_OFFSET = 1e-6


def yamabe_constants(n: int) -> tuple:
    """``(a_n, p_n) = (4(n-1)/(n-2), 2n/(n-2))``."""
    if n < 3:
        raise DomainError(f"dimension must be >= 3, got {n!r}")
    return 4.0 * (n - 1) / (n - 2), 2.0 * n / (n - 2)


@dataclass(frozen=True)
class YamabeProblem:
    """Radial subcritical problem on ``S^d(r)`` with exponent from dimension ``n``."""

    n: int
    R: float
    d: int
    r: float

    def __post_init__(self):
        if self.n < 3:
            raise DomainError(f"n must be >= 3, got {self.n!r}")
        if self.d < 1 or self.n <= self.d:
            raise DomainError(f"need 1 <= d < n, got d={self.d!r}, n={self.n!r}")
        if not self.R > 0:
            raise DomainError(f"R must be positive (only constant solutions when R <= 0), got {self.R!r}")
        if not self.r > 0:
            raise DomainError(f"sphere radius must be positive, got {self.r!r}")

    @property
    def reaction(self) -> float:
        """``R / a_n``, the coefficient of the nonlinearity."""
        return self.R / yamabe_constants(self.n)[0]

    @property
    def exponent(self) -> float:
        """``p_n - 1``."""
        return yamabe_constants(self.n)[1] - 1.0

    @property
    def length(self) -> float:
        return math.pi * self.r

    def eigenvalue(self, l: int) -> float:
        """``l``-th distinct eigenvalue ``l(l+d-1)/r^2`` of the Laplacian on ``S^d(r)``."""
        return l * (l + self.d - 1) / self.r**2

    @classmethod
    def from_bundle(cls, m: int, k: int, a: float, r: float, factor: str = "fiber") -> "YamabeProblem":
        """Problem induced on one factor of an ``S^k(r)`` bundle over ``S^m(1)``.

        ``factor='fiber'`` gives conformal factors depending on the fiber
        sphere ``S^k(r)`` only, ``'base'`` those constant along fibers
        (functions on ``S^m(1)``).  The scalar curvature is
        ``m(m-1) + k(k-1)/r^2 - a^2 r^2``.
        """
        R = sphere_bundle_scalar(BaseGeometry(m, m * (m - 1)), k, a, r)
        if factor == "fiber":
            return cls(m + k, R, k, r)
        if factor == "base":
            return cls(m + k, R, m, 1.0)
        raise DomainError(f"factor must be 'fiber' or 'base', got {factor!r}")


# -- threshold predicates ------------------------------------------------------------

def uniqueness_predicate(prob: YamabeProblem) -> bool:
    """Hypothesis under which ``v = 1`` is the only solution.

    ``d = 1``: first eigenvalue ``1/r^2 >= R/(N-1)``.  ``d >= 2``: the Ricci
    bound ``(d-1)/r^2 >= (d-1)/d * R/(N-1)``, i.e. ``d/r^2 >= R/(N-1)``.
    """
    return _uniqueness_margin(prob) >= 0


def _uniqueness_margin(prob: YamabeProblem) -> float:
    rhs = prob.R / (prob.n - 1)
    if prob.d == 1:
        return 1.0 / prob.r**2 - rhs
    return prob.d / prob.r**2 - rhs


def multiplicity_predicate(prob: YamabeProblem, l: int) -> bool:
    """``l(l+d-1)/r^2 < R/(N-1)``: at least ``l + 1`` radial solutions exist."""
    if l < 1:
        raise DomainError("l must be >= 1")
    return prob.eigenvalue(l) < prob.R / (prob.n - 1)


def guaranteed_lower_bound(prob: YamabeProblem) -> int:
    """``1 + max{l : multiplicity_predicate(prob, l)}`` (1 when no ``l`` qualifies)."""
    l = 0
    while multiplicity_predicate(prob, l + 1):
        l += 1
    return l + 1


@dataclass(frozen=True)
class Predicate:
    name: str
    holds: bool
    margin: float


@dataclass(frozen=True)
class ThresholdRecord:
    """Named predicates with signed margins, positive (or zero for ``<=``) when they hold."""

    predicates: tuple
    scal: float

    def __getitem__(self, name) -> Predicate:
        for p in self.predicates:
            if p.name == name:
                return p
        raise KeyError(name)

    def as_dict(self) -> dict:
        return {p.name: {"holds": p.holds, "margin": p.margin} for p in self.predicates}


def _le(name, lhs, rhs):
    return Predicate(name, bool(lhs <= rhs), float(rhs - lhs))


def _gt(name, lhs, rhs):
    return Predicate(name, bool(lhs > rhs), float(lhs - rhs))


def product_thresholds(m: int, k: int, r: float, l: int = 1) -> ThresholdRecord:
    """Uniqueness and multiplicity conditions for the product ``S^m(1) x S^k(r)``."""
    if m + k < 3 or not r > 0 or l < 1:
        raise DomainError("need m + k >= 3, r > 0, l >= 1")
    n1 = m + k - 1
    preds = (
        _le("uniqueness_fiber", (m - 1) * r**2, k),
        _le("uniqueness_base", (k - 1) / r**2, m),
        _gt("multiplicity_fiber", m * (m - 1) * r**2, l * (l + k - 1) * n1 - k * (k - 1)),
        _gt("multiplicity_base", k * (k - 1) / r**2, l * (l + m - 1) * n1 - m * (m - 1)),
    )
    return ThresholdRecord(preds, m * (m - 1) + k * (k - 1) / r**2)


def bundle_thresholds(m: int, k: int, a: float, r: float, l: int = 1) -> ThresholdRecord:
    """Conditions for the sphere bundle metric with O'Neill constant ``a`` and fiber radius ``r``."""
    if m + k < 3 or m < 1 or k < 1 or a < 0 or not r > 0 or l < 1:
        raise DomainError("need m, k >= 1, m + k >= 3, a >= 0, r > 0, l >= 1")
    preds = (
        _le("uniqueness_fiber", -(a**2 / m) * r**4 + (m - 1) * r**2, k),
        _le("uniqueness_base", -(a**2 / k) * r**2 + (k - 1) / r**2, m),
        _gt("multiplicity_base", -a**2 * r**2 + k * (k - 1) / r**2,
            l * (l + m - 1) * (m + k - 1) - m * (m - 1)),
    )
    return ThresholdRecord(preds, sphere_bundle_scalar(BaseGeometry(m, m * (m - 1)), k, a, r))


# -- shooting ----------------------------------------------------------------------

def _rhs_factory(prob: YamabeProblem):
    d, r, c, q = prob.d, prob.r, prob.reaction, prob.exponent

    def rhs(t, y):
        n = y.shape[0] // 2
        v, dv = y[:n], y[n:]
        # odd extension of v^q keeps the flow defined when a shot leaves v > 0
        force = c * (np.abs(v) ** (q - 1.0) * v - v)
        if d == 1:
            return np.concatenate([dv, -force])
        return np.concatenate([dv, -(d - 1) / (r * math.tan(t / r)) * dv - force])

    return rhs


def _span(prob: YamabeProblem):
    L = prob.length
    if prob.d == 1:
        return 0.0, L
    t0 = POLE_OFFSET * L
    return t0, L - t0


def _initial_state(prob: YamabeProblem, alpha: np.ndarray):
    t0, _ = _span(prob)
    if prob.d == 1:
        return np.concatenate([alpha, np.zeros_like(alpha)])
    # regular series at the pole: d v''(0) = (R/a_N)(alpha - alpha^q)
    v2 = prob.reaction * (alpha - np.abs(alpha) ** (prob.exponent - 1.0) * alpha) / prob.d
    return np.concatenate([alpha + 0.5 * v2 * t0**2, v2 * t0])


def _flux_weight(prob: YamabeProblem, t: float) -> float:
    return math.sin(t / prob.r) ** (prob.d - 1) if prob.d > 1 else 1.0


def _integrate(prob: YamabeProblem, alpha, tol: Tolerances, t_eval=None, dense=False,
               tol_scale: float = 1.0):
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    t0, t1 = _span(prob)
    return solve_ivp(_rhs_factory(prob), (t0, t1), _initial_state(prob, alpha), method="DOP853",
                     rtol=tol.ode_rtol * tol_scale, atol=tol.ode_atol * tol_scale,
                     max_step=prob.length / 200.0, t_eval=t_eval, dense_output=dense)


def shoot(prob: YamabeProblem, alpha, tol: Tolerances = DEFAULT, tol_scale: float = 1.0) -> np.ndarray:
    """Far-pole flux mismatch ``sin(t/r)^(d-1) v'(t)`` for each initial value."""
    sol = _integrate(prob, alpha, tol, tol_scale=tol_scale)
    if sol.status != 0:
        raise RuntimeError(sol.message)
    n = sol.y.shape[0] // 2
    return _flux_weight(prob, sol.t[-1]) * sol.y[n:, -1]


@dataclass
class RadialSolution:
    alpha: float
    t: np.ndarray = field(repr=False)
    v: np.ndarray = field(repr=False)
    boundary_residual: float
    is_constant: bool
    far_value: float
    ode_residual: float = 0.0

    @property
    def samples(self):
        return list(zip(self.t.tolist(), self.v.tolist()))


@dataclass
class CountReport:
    problem: YamabeProblem
    solutions: list
    scan_range: tuple
    n_scan: int
    guaranteed_lower_bound: int
    excluded: list
    brackets: list
    rejected: list
    pairs: list

    @property
    def count(self) -> int:
        return len(self.solutions)

    @property
    def reflection_collapsed_count(self) -> int:
        return len(self.pairs)

    @property
    def nonconstant_brackets(self) -> list:
        """Brackets whose refined root is not the constant solution."""
        return [b for b, root in self.brackets if root is None or abs(root - 1.0) > 1e-6]


def _interior_limit(prob: YamabeProblem) -> float:
    # positivity is required up to here; beyond it the far-pole singular mode may dominate a shot
    return prob.length if prob.d == 1 else 0.9 * prob.length


def _sample_grid(prob: YamabeProblem, n: int = 801) -> np.ndarray:
    t0, t1 = _span(prob)
    return np.linspace(t0, t1, n)


def _constant_solution(prob: YamabeProblem) -> RadialSolution:
    t = _sample_grid(prob)
    return RadialSolution(1.0, t, np.ones_like(t), 0.0, True, 1.0, 0.0)


def ode_residual(prob: YamabeProblem, alpha: float, tol: Tolerances = DEFAULT, n: int = 400) -> float:
    """Residual of the radial ODE along a re-integration at half the tolerances.

    Second and first derivatives of the dense-output ``v'`` are taken by
    fourth-order central differences on ``[0.02, 0.98] * pi r``, so the check
    does not reuse the right-hand side evaluations of the integrator.
    """
    sol = _integrate(prob, alpha, tol, dense=True, tol_scale=0.5)
    L = prob.length
    t = np.linspace(0.02 * L, 0.98 * L, n)
    h = 1e-3 * L
    dv = lambda s: sol.sol(s)[1]  # noqa: E731
    d2v = (-dv(t + 2 * h) + 8 * dv(t + h) - 8 * dv(t - h) + dv(t - 2 * h)) / (12 * h)
    v = sol.sol(t)[0]
    cot = 0.0 if prob.d == 1 else (prob.d - 1) / (prob.r * np.tan(t / prob.r))
    res = d2v + cot * dv(t) + prob.reaction * (v ** prob.exponent - v)
    return float(np.abs(res).max())


def count_radial_solutions(prob: YamabeProblem, alpha_range=(0.05, 5.0), n_scan: int = 400,
                           tol: Tolerances = DEFAULT, max_iter: int = 60,
                           verify: bool = True) -> CountReport:
    """Count positive radial solutions by an initial-value scan and bracket refinement.

    Parameters
    ----------
    prob : YamabeProblem
    alpha_range : (float, float)
        Scan interval for ``v(0)``, inside ``(0, inf)``.
    n_scan : int
        Number of uniformly spaced initial values (at least 10).
    tol : Tolerances
        ``ode_rtol``/``ode_atol`` for the integrator, ``matching`` for the
        far-pole flux, ``dedup`` for merging roots.
    max_iter : int
        Iteration cap of the bracket refinement.
    verify : bool
        Recompute each non-constant solution at half the integrator
        tolerance and store its ODE residual.

    Returns
    -------
    CountReport
        Distinct positive solutions sorted by ``alpha`` (the constant one is
        always present).  Shots that become non-positive before the
        far-pole layer are listed in ``excluded``; refined roots that are not
        positive solutions in ``rejected``.
    """
    lo, hi = map(float, alpha_range)
    if not (0 < lo < hi):
        raise DomainError(f"empty or non-positive scan range {alpha_range!r}")
    if n_scan < 10:
        raise DomainError("n_scan must be >= 10")

    alphas = np.linspace(lo, hi, n_scan)
    t_grid = _sample_grid(prob)
    sol = _integrate(prob, alphas, tol, t_eval=t_grid)
    if sol.status != 0:
        raise RuntimeError(sol.message)
    v = sol.y[:n_scan]
    interior = t_grid <= _interior_limit(prob)
    finite = np.all(np.isfinite(sol.y[:n_scan]), axis=1) & np.all(np.isfinite(sol.y[n_scan:]), axis=1)
    positive = np.all(v[:, interior] > 0, axis=1) & finite
    mismatch = _flux_weight(prob, sol.t[-1]) * sol.y[n_scan:, -1]
    excluded = alphas[~positive].tolist()

    brackets = []
    for i in range(n_scan - 1):
        if positive[i] and positive[i + 1] and np.sign(mismatch[i]) != np.sign(mismatch[i + 1]):
            brackets.append((alphas[i], alphas[i + 1]))

    g = lambda a: float(shoot(prob, a, tol)[0])  # noqa: E731
    roots, bracket_roots, rejected = [], [], []
    for a, b in brackets:
        root = brentq(g, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=max_iter)
        bracket_roots.append(((a, b), root))
        if abs(root - 1.0) <= tol.dedup:
            continue  # the constant solution is added separately
        cand = _solution_at(prob, root, tol, t_grid)
        if cand is None:
            rejected.append(root)
            continue
        roots.append(cand)

    solutions = [_constant_solution(prob)]
    for cand in sorted(roots, key=lambda s: s.alpha):
        if all(abs(cand.alpha - s.alpha) > tol.dedup for s in solutions):
            if verify:
                cand.ode_residual = ode_residual(prob, cand.alpha, tol)
            solutions.append(cand)
    solutions.sort(key=lambda s: s.alpha)

    return CountReport(
        problem=prob,
        solutions=solutions,
        scan_range=(lo, hi),
        n_scan=n_scan,
        guaranteed_lower_bound=guaranteed_lower_bound(prob),
        excluded=excluded,
        brackets=bracket_roots,
        rejected=rejected,
        pairs=reflection_pairs(solutions),
    )


def _solution_at(prob, alpha, tol, t_grid):
    sol = _integrate(prob, alpha, tol, t_eval=t_grid)
    if sol.status != 0:
        return None
    v, dv = sol.y[0], sol.y[1]
    if np.any(v <= 0) or not np.all(np.isfinite(v)):
        return None
    residual = abs(_flux_weight(prob, sol.t[-1]) * dv[-1])
    return RadialSolution(float(alpha), sol.t, v, float(residual), False, float(v[-1]))


def reflection_pairs(solutions, atol: float = 1e-6) -> list:
    """Group solutions ``v(t)`` and ``v(pi r - t)``; each group is a tuple of alphas.

    A solution whose far-pole value matches its own initial value is
    symmetric and forms a group of one.  Solutions whose partner was not found
    also stand alone.
    """
    groups, used = [], set()
    for i, s in enumerate(solutions):
        if i in used:
            continue
        used.add(i)
        partner = None
        if not s.is_constant and abs(s.far_value - s.alpha) > atol:
            for j, o in enumerate(solutions):
                if j not in used and abs(o.alpha - s.far_value) <= atol:
                    partner = j
                    break
        if partner is None:
            groups.append((s.alpha,))
        else:
            used.add(partner)
            groups.append((s.alpha, solutions[partner].alpha))
    return groups
