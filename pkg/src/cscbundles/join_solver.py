"""Constant scalar curvature connection metrics on fiberwise joins.

With profiles built from Jacobi functions,

    f1(t) = cn_k(gamma t) / (gamma k'),   f2(t) = sn_k(gamma t) / gamma,
    0 < t < T = K(k) / gamma,

the scalar curvature of the join connection metric is constant exactly when

    (k1 + k2)(k1 + k2 + 3) gamma^4 k^2 (1 - k^2) = a1^2 - (1 - k^2) a2^2,

and the constant is

    R = R_base - 2(k1 + k2)(k1 + 1) gamma^2 k^2
        + (k1 + k2)(k1 + k2 + 1) gamma^2 - a2^2 / gamma^2.

Elliptic branches are parameterized by the modulus, with gamma determined by
the relation above.  On a flat branch (``k = 0``, needs ``a1 == a2``) gamma is
the free parameter.  A branch may be *swapped*: it is the solution for the
summands taken in the opposite order, with the profiles reflected
``t -> T - t`` so that ``f1`` always warps the ``S^k1`` factor.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import elliptic
from .exceptions import DomainError, InadmissibleModulusError
from .fiber_geometry import (BaseGeometry, ProfilePair, SubmersionConstants,
                             check_boundary, scal_join_total)
from .tolerances import DEFAULT, Tolerances

#: Moduli used inside elliptic branches are clamped to this range.
K_CLAMP = (1e-8, 1.0 - 1e-10)


class Branch(str, enum.Enum):
    FLAT = "flat"
    CASE1 = "case1"
    CASE2_ROUND = "case2-round"
    CASE2_ELLIPTIC = "case2-elliptic"
    CASE3 = "case3"


@dataclass(frozen=True)
class JoinParams:
    base: BaseGeometry
    k1: int
    k2: int
    a1: float
    a2: float

    def __post_init__(self):
        if int(self.k1) != self.k1 or int(self.k2) != self.k2 or min(self.k1, self.k2) < 1:
            raise DomainError(f"join solver needs integer k1, k2 >= 1, got ({self.k1}, {self.k2})")
        if min(self.a1, self.a2) < 0:
            raise DomainError(f"O'Neill norms must be >= 0, got ({self.a1}, {self.a2})")

    @property
    def constants(self) -> SubmersionConstants:
        return SubmersionConstants(self.k1, self.k2, self.a1, self.a2)

    def swapped(self) -> "JoinParams":
        return JoinParams(self.base, self.k2, self.k1, self.a2, self.a1)

    def oriented(self, swapped: bool) -> "JoinParams":
        return self.swapped() if swapped else self


@dataclass(frozen=True)
class BranchInterval:
    """One admissible family.

    For elliptic branches ``k_sq_range`` is the open interval of admissible
    squared moduli; for k = 0 branches it is ``(0.0, 0.0)`` and gamma is free.
    """

    branch: Branch
    swapped: bool
    k_sq_range: tuple

    @property
    def is_round(self) -> bool:
        return self.branch in (Branch.FLAT, Branch.CASE2_ROUND)

    @property
    def k_range(self) -> tuple:
        lo, hi = self.k_sq_range
        return math.sqrt(lo), math.sqrt(hi)


@dataclass(frozen=True)
class WarpSolution:
    k: float
    gamma: float
    T: float
    scal_total: float
    family: Branch
    swapped: bool = False


# -- parameter equation ------------------------------------------------------------

def parameter_residual(p: JoinParams, k: float, gamma: float) -> float:
    """Left minus right side of the (gamma, k) relation, in the given orientation."""
    k2 = k * k
    s = p.k1 + p.k2
    return s * (s + 3) * gamma**4 * k2 * (1.0 - k2) - (p.a1**2 - (1.0 - k2) * p.a2**2)


def _positive_k_sq_range(p: JoinParams):
    """Squared moduli in (0, 1) making ``a1^2 - (1 - k^2) a2^2`` positive, or None."""
    a1_sq, a2_sq = p.a1**2, p.a2**2
    if a1_sq <= 0:
        return None
    if a1_sq >= a2_sq:
        return (0.0, 1.0)
    return (1.0 - a1_sq / a2_sq, 1.0)


def gamma_from_modulus(p: JoinParams, k) -> float:
    """Scale ``gamma > 0`` solving the parameter relation for modulus ``k`` in (0, 1).

    Raises
    ------
    InadmissibleModulusError
        If ``a1^2 - (1 - k^2) a2^2 <= 0``; the exception carries the
        admissible ``k^2`` interval (``None`` if there is none).
    """
    k = float(k)
    if not 0.0 < k < 1.0:
        raise InadmissibleModulusError(f"elliptic branches need 0 < k < 1, got {k!r}",
                                       _positive_k_sq_range(p))
    kp2 = (1.0 - k) * (1.0 + k)
    num = p.a1**2 - kp2 * p.a2**2
    if not num > 0:
        rng = _positive_k_sq_range(p)
        raise InadmissibleModulusError(
            f"inadmissible modulus k={k!r}: a1^2 - (1-k^2) a2^2 = {num!r} <= 0; "
            f"admissible k^2 interval: {rng}", rng)
    s = p.k1 + p.k2
    return (num / (s * (s + 3) * k * k * kp2)) ** 0.25


def scalar_from_solution(p: JoinParams, k: float, gamma: float) -> float:
    """Constant scalar curvature of the join metric with parameters ``(k, gamma)``."""
    if not gamma > 0:
        raise DomainError(f"gamma must be positive, got {gamma!r}")
    s = p.k1 + p.k2
    g2 = gamma * gamma
    return p.base.scal - 2 * s * (p.k1 + 1) * g2 * k * k + s * (s + 1) * g2 - p.a2**2 / g2


# -- branches ------------------------------------------------------------------------

def admissible_modulus_range(p: JoinParams) -> list:
    """All families of solutions for the two summands in either order.

    k = 0 branches exist iff ``a1 == a2`` (flat if both vanish).  The given
    order has an elliptic branch whenever ``a1 > 0`` and ``a1^2 > (1-k^2) a2^2``
    for some k; the opposite order contributes its Case 1 or Case 3 branch
    unless ``a1 == a2`` (then it duplicates the Case 2 family).
    """
    out = []
    if p.a1 == p.a2:
        if p.a1 == 0:
            return [BranchInterval(Branch.FLAT, False, (0.0, 0.0))]
        out.append(BranchInterval(Branch.CASE2_ROUND, False, (0.0, 0.0)))
        out.append(BranchInterval(Branch.CASE2_ELLIPTIC, False, (0.0, 1.0)))
        return out
    for swapped in (False, True):
        q = p.oriented(swapped)
        rng = _positive_k_sq_range(q)
        if rng is None:
            continue
        out.append(BranchInterval(Branch.CASE1 if q.a1 > q.a2 else Branch.CASE3, swapped, rng))
    return out


def _clamp_k(k: float) -> float:
    return min(max(k, K_CLAMP[0]), K_CLAMP[1])


def solve(p: JoinParams, k: float | None = None, gamma: float | None = None,
          branch: BranchInterval | None = None) -> WarpSolution:
    """Assemble a :class:`WarpSolution` on a branch.

    Round branches take ``gamma``; elliptic branches take ``k`` (clamped to
    :data:`K_CLAMP`).  Without ``branch`` the first admissible branch in the
    given order whose kind matches the supplied argument is used.
    """
    if branch is None:
        branches = admissible_modulus_range(p)
        want_round = k is None or k == 0
        candidates = [b for b in branches if b.is_round == want_round]
        if not want_round:
            candidates.sort(key=lambda b: b.swapped)
        if not candidates:
            if want_round:
                raise DomainError("k = 0 needs a1 == a2 (round join fiber)")
            raise InadmissibleModulusError(
                f"no elliptic branch for a1={p.a1}, a2={p.a2}", None)
        branch = candidates[0]
    if branch.is_round:
        if gamma is None or not gamma > 0:
            raise DomainError("round branches need a positive gamma")
        T = elliptic.quarter_period(0.0) / gamma
        return WarpSolution(0.0, float(gamma), T, scalar_from_solution(p, 0.0, gamma),
                            branch.branch, False)
    if k is None:
        raise DomainError("elliptic branches need a modulus k")
    k = _clamp_k(float(k))
    q = p.oriented(branch.swapped)
    g = gamma_from_modulus(q, k)
    T = elliptic.quarter_period(k) / g
    return WarpSolution(k, g, T, scalar_from_solution(q, k, g), branch.branch, branch.swapped)


def build_profiles(sol: WarpSolution) -> ProfilePair:
    """Jacobi warping profiles of a solution, in the orientation of the given summands."""
    k, g, T = sol.k, sol.gamma, sol.T
    kp = elliptic.complementary_modulus(k)

    def cn_profile(t):
        cn, sn, dn, _ = elliptic.jacobi(g * t, k)
        return cn / (g * kp)

    def cn_profile_d1(t):
        d = elliptic.jacobi_derivatives(g * t, k)
        return d.cn1 / kp

    def cn_profile_d2(t):
        d = elliptic.jacobi_derivatives(g * t, k)
        return g * d.cn2 / kp

    def sn_profile(t):
        return elliptic.jacobi(g * t, k).sn / g

    def sn_profile_d1(t):
        return elliptic.jacobi_derivatives(g * t, k).sn1

    def sn_profile_d2(t):
        return g * elliptic.jacobi_derivatives(g * t, k).sn2

    if not sol.swapped:
        return ProfilePair(T, cn_profile, cn_profile_d1, cn_profile_d2,
                           sn_profile, sn_profile_d1, sn_profile_d2)
    # reflected: f1 is the sn-profile and f2 the cn-profile, read from the far end
    return ProfilePair(
        T,
        lambda t: sn_profile(T - t), lambda t: -sn_profile_d1(T - t), lambda t: sn_profile_d2(T - t),
        lambda t: cn_profile(T - t), lambda t: -cn_profile_d1(T - t), lambda t: cn_profile_d2(T - t),
    )


def conservation_residuals(sol: WarpSolution, profiles: ProfilePair, t) -> tuple:
    """Max violations of ``(1-k^2) F1^2 + F2^2 = 1/gamma^2`` and its derivative.

    ``F1`` is the cn-profile and ``F2`` the sn-profile, whichever sphere
    factor they warp.
    """
    t = np.asarray(t, dtype=float)
    kp2 = (1.0 - sol.k) * (1.0 + sol.k)
    if sol.swapped:
        F1, dF1, F2, dF2 = profiles.f2(t), profiles.df2(t), profiles.f1(t), profiles.df1(t)
    else:
        F1, dF1, F2, dF2 = profiles.f1(t), profiles.df1(t), profiles.f2(t), profiles.df2(t)
    level = np.abs(kp2 * F1**2 + F2**2 - 1.0 / sol.gamma**2).max()
    flux = np.abs(kp2 * F1 * dF1 + F2 * dF2).max()
    return float(level), float(flux)


# -- verification ------------------------------------------------------------------------

@dataclass
class ResidualReport:
    max_deviation: float
    spread: float
    parameter_residual: float
    scalar_consistency: float
    boundary_residuals: dict
    conservation: tuple
    grid_size: int
    tol: Tolerances = field(default=DEFAULT, repr=False)

    @property
    def passed(self) -> bool:
        return (self.max_deviation < self.tol.residual
                and abs(self.parameter_residual) < self.tol.parameter_equation
                and self.scalar_consistency < self.tol.scalar_consistency
                and max(self.boundary_residuals.values()) < self.tol.boundary
                and max(self.conservation) < self.tol.conservation)


def verify_residual(p: JoinParams, sol: WarpSolution, grid_size: int = 500,
                    tol: Tolerances = DEFAULT) -> ResidualReport:
    """Evaluate the join scalar curvature on a grid and compare with ``sol.scal_total``.

    The grid is uniform on ``[T/100, T - T/100]``.  Besides the maximal
    deviation, the report carries the parameter-equation residual, the
    boundary-condition residuals and the conservation-law violations.
    """
    if grid_size < 2:
        raise DomainError("grid_size must be >= 2")
    prof = build_profiles(sol)
    t = prof.interior_grid(grid_size)
    scal = scal_join_total(p.base, p.constants, prof, t)
    q = p.oriented(sol.swapped)
    return ResidualReport(
        max_deviation=float(np.abs(scal - sol.scal_total).max()),
        spread=float(scal.max() - scal.min()),
        parameter_residual=parameter_residual(q, sol.k, sol.gamma),
        scalar_consistency=abs(scalar_from_solution(q, sol.k, sol.gamma) - sol.scal_total),
        boundary_residuals=check_boundary(prof, 2, tol.boundary).residuals,
        conservation=conservation_residuals(sol, prof, t),
        grid_size=grid_size,
        tol=tol,
    )


# -- families ------------------------------------------------------------------------

@dataclass(frozen=True)
class FamilyRow:
    branch: Branch
    swapped: bool
    k: float
    gamma: float
    T: float
    R: float
    residual: float


def _sample_moduli(interval: BranchInterval, n: int, margin: float) -> np.ndarray:
    lo, hi = interval.k_sq_range
    width = hi - lo
    k_sq = np.linspace(lo + margin * width, hi - margin * width, n)
    return np.sqrt(k_sq)


def family_scan(p: JoinParams, n_points: int = 20, gamma_range=(0.5, 2.0),
                margin: float = 0.02, grid_size: int = 200) -> dict:
    """Sample every admissible family.

    Elliptic branches are sampled uniformly in ``k^2`` on the interior of
    their interval (``margin`` trimmed from each end); round branches
    uniformly in ``gamma`` over ``gamma_range``.

    Returns
    -------
    dict
        Maps ``(branch, swapped)`` to the list of :class:`FamilyRow`, each
        sorted by ``k`` then ``gamma``.
    """
    if n_points < 2:
        raise DomainError("n_points must be >= 2")
    out = {}
    for interval in admissible_modulus_range(p):
        rows = []
        if interval.is_round:
            for g in np.linspace(*gamma_range, n_points):
                sol = solve(p, gamma=float(g), branch=interval)
                rows.append(_row(p, sol, grid_size))
        else:
            for k in _sample_moduli(interval, n_points, margin):
                sol = solve(p, k=float(k), branch=interval)
                rows.append(_row(p, sol, grid_size))
        rows.sort(key=lambda r: (r.k, r.gamma))
        out[(interval.branch, interval.swapped)] = rows
    return out


def _row(p, sol, grid_size):
    rep = verify_residual(p, sol, grid_size)
    return FamilyRow(sol.family, sol.swapped, sol.k, sol.gamma, sol.T, sol.scal_total,
                     rep.max_deviation)


# -- limits ------------------------------------------------------------------------

@dataclass
class LimitProbe:
    """Sampled ``R - R_base`` along a geometric approach to a branch endpoint."""

    k: np.ndarray
    r_minus_base: np.ndarray
    expected: str
    observed: str


def expected_limit(p: JoinParams, interval: BranchInterval, endpoint: str) -> str:
    """Limit of ``R - R_base`` predicted from the closed formula: '+inf', '0' or '-inf'."""
    q = p.oriented(interval.swapped)
    if endpoint == "upper":
        d = q.k2 - (q.k1 + 1)
        return "+inf" if d > 0 else ("0" if d == 0 else "-inf")
    if interval.branch == Branch.CASE3:
        return "-inf"
    return "+inf"


def classify_tail(values, zero_tol: float = 1e-2, big: float = 1e3) -> str:
    """Classify a sampled tail as '+inf', '-inf', '0' or 'unclear'."""
    v = np.asarray(values, dtype=float)
    last = v[-3:]
    if np.all(np.abs(last) < zero_tol) and abs(v[-1]) <= abs(v[0]):
        return "0"
    if np.all(np.diff(last) > 0) and v[-1] > big:
        return "+inf"
    if np.all(np.diff(last) < 0) and v[-1] < -big:
        return "-inf"
    return "unclear"


def limit_probe(p: JoinParams, interval: BranchInterval, endpoint: str = "upper",
                n: int = 9, ks=None) -> LimitProbe:
    """Sample ``R - R_base`` as the modulus approaches an end of an elliptic branch.

    ``endpoint='upper'`` uses ``k = 1 - 10^-j``; ``'lower'`` approaches the
    lower edge of the ``k`` interval geometrically.  Explicit ``ks`` override
    the sequence.  Values are computed from the closed formula after
    clamping ``k`` to :data:`K_CLAMP`.
    """
    if interval.is_round:
        raise DomainError("limit probes apply to elliptic branches only")
    if endpoint not in ("upper", "lower"):
        raise DomainError("endpoint must be 'upper' or 'lower'")
    if ks is None:
        j = np.arange(1, n + 1)
        k_lo, k_hi = interval.k_range
        if endpoint == "upper":
            ks = 1.0 - 10.0 ** (-j.astype(float))
            ks = ks[ks > k_lo]
        else:
            mid = 0.5 * (k_lo + k_hi)
            ks = k_lo + (mid - k_lo) * 10.0 ** (-j.astype(float))
        # stay inside the clamp so that every sample is a distinct modulus
        ks = ks[(ks >= K_CLAMP[0]) & (ks <= K_CLAMP[1])]
    ks = np.asarray(ks, dtype=float)
    vals = np.array([solve(p, k=float(k), branch=interval).scal_total for k in ks]) - p.base.scal
    return LimitProbe(ks, vals, expected_limit(p, interval, endpoint), classify_tail(vals))
