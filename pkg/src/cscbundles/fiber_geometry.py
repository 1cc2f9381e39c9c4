"""Scalar curvature of connection metrics and doubly warped join fibers.

The total space of a Riemannian submersion with totally geodesic fibers has
scalar curvature ``R = R_base + R_fiber - |A|^2`` where ``|A|`` is the norm of
the O'Neill integrability tensor.  For a join fiber

    f1(t)^2 g_{S^k1} + dt^2 + f2(t)^2 g_{S^k2},   0 < t < T,

the fiber scalar curvature is an explicit expression in the profiles and
their first two derivatives, and ``|A|^2 = a1^2 f1^2 + a2^2 f2^2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .exceptions import DomainError, PreconditionError

ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class BaseGeometry:
    """Base manifold data: dimension ``m`` and constant scalar curvature."""

    m: int
    scal: float

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise DomainError(f"base dimension must be an integer >= 1, got {self.m!r}")


@dataclass(frozen=True)
class SubmersionConstants:
    """Fiber sphere dimensions and O'Neill norms of the two summand bundles."""

    k1: int
    k2: int
    a1: float
    a2: float

    def __post_init__(self):
        if min(self.k1, self.k2) < 0 or self.k1 + self.k2 < 1:
            raise DomainError(f"need k1, k2 >= 0 and k1 + k2 >= 1, got ({self.k1}, {self.k2})")
        if min(self.a1, self.a2) < 0:
            raise DomainError(f"O'Neill norms must be >= 0, got ({self.a1}, {self.a2})")


@dataclass(frozen=True)
class ProfilePair:
    """Warping profiles on ``(0, T)`` with closed-form derivatives.

    Every callable must accept numpy arrays.  They are evaluated at the
    endpoints (and slightly beyond, for finite differences) only by
    :func:`check_boundary`.
    """

    T: float
    f1: ArrayFn
    df1: ArrayFn
    d2f1: ArrayFn
    f2: ArrayFn
    df2: ArrayFn
    d2f2: ArrayFn

    def __post_init__(self):
        if not self.T > 0:
            raise DomainError(f"join length T must be positive, got {self.T!r}")

    def values(self, t):
        """Return ``(f1, f1', f1'', f2, f2', f2'')`` evaluated at ``t``."""
        t = np.asarray(t, dtype=float)
        return (self.f1(t), self.df1(t), self.d2f1(t),
                self.f2(t), self.df2(t), self.d2f2(t))

    def interior_grid(self, n: int, margin: float = 0.01) -> np.ndarray:
        """Uniform grid on ``[margin*T, (1 - margin)*T]``."""
        return np.linspace(margin * self.T, (1.0 - margin) * self.T, n)

    @classmethod
    def round(cls, gamma: float = 1.0) -> "ProfilePair":
        """Profiles ``cos(gamma t)/gamma``, ``sin(gamma t)/gamma`` of the round sphere of radius 1/gamma."""
        g = float(gamma)
        return cls(
            T=np.pi / (2.0 * g),
            f1=lambda t: np.cos(g * t) / g,
            df1=lambda t: -np.sin(g * t),
            d2f1=lambda t: -g * np.cos(g * t),
            f2=lambda t: np.sin(g * t) / g,
            df2=lambda t: np.cos(g * t),
            d2f2=lambda t: -g * np.sin(g * t),
        )


@dataclass(frozen=True)
class SkewFamily:
    """Connection curvature ``R(E_i, E_j)`` as matrices in an orthonormal fiber frame.

    ``F`` has shape ``(m, m, n, n)`` where ``m`` is the base dimension and
    ``n = k + 1`` the fiber rank.
    """

    F: np.ndarray
    atol: float = 1e-12

    def __post_init__(self):
        F = np.asarray(self.F, dtype=float)
        if F.ndim != 4 or F.shape[0] != F.shape[1] or F.shape[2] != F.shape[3]:
            raise DomainError(f"expected shape (m, m, n, n), got {F.shape}")
        if not np.allclose(F, -F.transpose(1, 0, 2, 3), atol=self.atol, rtol=0):
            raise DomainError("curvature must be antisymmetric in the base indices")
        if not np.allclose(F, -F.transpose(0, 1, 3, 2), atol=self.atol, rtol=0):
            raise DomainError("curvature matrices must be skew-symmetric")
        object.__setattr__(self, "F", F)

    @property
    def dim_base(self) -> int:
        return self.F.shape[0]

    @property
    def dim_fiber(self) -> int:
        return self.F.shape[2]

    @classmethod
    def from_pairs(cls, m: int, n: int, pairs: dict) -> "SkewFamily":
        """Build from ``{(i, j): matrix}`` with ``i < j`` (0-based); the rest is filled by antisymmetry."""
        F = np.zeros((m, m, n, n))
        for (i, j), mat in pairs.items():
            F[i, j] = mat
            F[j, i] = -np.asarray(mat, dtype=float)
        return cls(F)

    def scaled(self, factor: float) -> "SkewFamily":
        return SkewFamily(factor * self.F, atol=self.atol)


# -- scalar curvature functionals ---------------------------------------------

def _check_interior(p: ProfilePair, t: np.ndarray):
    if np.any(t <= 0.0) or np.any(t >= p.T):
        raise DomainError(f"t must lie in the open interval (0, {p.T})")


def scal_doubly_warped(k1: int, k2: int, p: ProfilePair, t) -> np.ndarray:
    """Scalar curvature of ``f1^2 g_{S^k1} + dt^2 + f2^2 g_{S^k2}`` at ``t``.

    Parameters
    ----------
    k1, k2 : int
        Dimensions of the two warped spheres.  A zero dimension removes every
        term carrying that factor.
    p : ProfilePair
        Profiles with closed-form first and second derivatives.
    t : float or ndarray
        Points of the open interval ``(0, T)``.

    Raises
    ------
    DomainError
        If some ``t`` is outside ``(0, T)`` or a profile is not positive there.
    """
    t = np.asarray(t, dtype=float)
    _check_interior(p, t)
    f1, df1, d2f1, f2, df2, d2f2 = p.values(t)
    scal = np.zeros_like(t)
    if k1:
        if np.any(f1 <= 0):
            raise DomainError("f1 must be strictly positive on the sample")
        scal = scal - 2 * k1 * d2f1 / f1 + k1 * (k1 - 1) * (1.0 - df1 * df1) / (f1 * f1)
    if k2:
        if np.any(f2 <= 0):
            raise DomainError("f2 must be strictly positive on the sample")
        scal = scal - 2 * k2 * d2f2 / f2 + k2 * (k2 - 1) * (1.0 - df2 * df2) / (f2 * f2)
    if k1 and k2:
        scal = scal - 2 * k1 * k2 * df1 * df2 / (f1 * f2)
    return scal


def oneill_norm_join(c: SubmersionConstants, p: ProfilePair, t) -> np.ndarray:
    """``|A|^2 = a1^2 f1^2 + a2^2 f2^2`` for the fiberwise join."""
    t = np.asarray(t, dtype=float)
    _check_interior(p, t)
    return c.a1**2 * p.f1(t) ** 2 + c.a2**2 * p.f2(t) ** 2


def scal_join_total(base: BaseGeometry, c: SubmersionConstants, p: ProfilePair, t) -> np.ndarray:
    """Scalar curvature of the connection metric on the fiberwise join at ``t``."""
    return base.scal + scal_doubly_warped(c.k1, c.k2, p, t) - oneill_norm_join(c, p, t)


def oneill_rescaled(scal_base, scal_fiber, a_sq, c):
    """Scalar curvature after scaling the fiber metric by ``c > 0``.

    ``scal_base + scal_fiber / c - c * a_sq``; ``c = 1`` is the unscaled
    submersion formula.  Accepts scalars or arrays.
    """
    if np.any(np.asarray(c) <= 0):
        raise DomainError(f"fiber scale c must be positive, got {c!r}")
    return scal_base + np.asarray(scal_fiber) / c - c * np.asarray(a_sq)


def sphere_bundle_scalar(base: BaseGeometry, k: int, a: float, r: float) -> float:
    """Scalar curvature ``R_base + k(k-1)/r^2 - a^2 r^2`` of the round-fiber bundle metric."""
    if not r > 0:
        raise DomainError(f"fiber radius must be positive, got {r!r}")
    if k < 0 or a < 0:
        raise DomainError("need k >= 0 and a >= 0")
    return base.scal + k * (k - 1) / r**2 - a**2 * r**2


# -- xi form -------------------------------------------------------------------

def xi_form(fam: SkewFamily, s) -> float:
    """Quadratic form ``sum_{i,j} |F_ij s|^2`` over all ordered base index pairs."""
    s = np.asarray(s, dtype=float)
    if s.shape != (fam.dim_fiber,):
        raise DomainError(f"vector of length {fam.dim_fiber} expected, got shape {s.shape}")
    Fs = np.einsum("ijab,b->ija", fam.F, s)
    return float(np.sum(Fs * Fs))


def oneill_norm_from_xi(fam: SkewFamily, s, atol: float = 1e-12) -> float:
    """``|A|^2(s) = xi(s, s) / 4`` at a unit vector ``s`` of the fiber."""
    s = np.asarray(s, dtype=float)
    if abs(float(np.dot(s, s)) - 1.0) > atol:
        raise PreconditionError("s must be a unit vector")
    return 0.25 * xi_form(fam, s)


# -- boundary conditions ---------------------------------------------------------

@dataclass
class BoundaryReport:
    """Per-condition residuals for the smooth-closing conditions of a join.

    Equalities report the absolute deviation.  A strict inequality
    ``f > 0`` reports 0 when it holds and ``1 - f`` (at least 1) otherwise.
    """

    residuals: dict = field(default_factory=dict)
    tol: float = 1e-10

    @property
    def failures(self) -> list:
        return [name for name, r in self.residuals.items() if not r < self.tol]

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values()) if self.residuals else 0.0


def _fd_derivative(fn: ArrayFn, x: float, h: float, order: int) -> float:
    if order == 1:
        return float((fn(np.array(x + h)) - fn(np.array(x - h))) / (2 * h))
    return float((fn(np.array(x + h)) - 2 * fn(np.array(x)) + fn(np.array(x - h))) / h**2)


def check_boundary(p: ProfilePair, order: int = 2, tol: float = 1e-10, fd_step: float = 1e-3,
                   fd_tol: float = 1e-5) -> BoundaryReport:
    """Check the conditions under which the profiles close up smoothly.

    ``f1`` must be even at 0 and vanish like ``T - t`` at ``T``; ``f2`` must
    vanish like ``t`` at 0 and be even at ``T``.  Orders 1 and 2 use the
    closed-form derivatives.  Orders 3 and 4 add the next odd/even
    conditions from central differences of the second derivative; those rows
    are judged against ``fd_tol`` and stored rescaled by ``tol / fd_tol`` so
    that one threshold applies to the whole report.
    """
    if order < 1:
        raise DomainError("order must be >= 1")
    if order > 4:
        raise DomainError("orders above 4 are not supported")
    T = p.T
    z, e = np.array(0.0), np.array(T)
    ev = lambda fn, x: float(fn(x))  # noqa: E731
    positive = lambda v: 0.0 if v > 0 else 1.0 - v  # noqa: E731
    res = {
        "f1(0)>0": positive(ev(p.f1, z)),
        "f1'(0)=0": abs(ev(p.df1, z)),
        "f1(T)=0": abs(ev(p.f1, e)),
        "f1'(T)=-1": abs(ev(p.df1, e) + 1.0),
        "f2(T)>0": positive(ev(p.f2, e)),
        "f2'(T)=0": abs(ev(p.df2, e)),
        "f2(0)=0": abs(ev(p.f2, z)),
        "f2'(0)=1": abs(ev(p.df2, z) - 1.0),
    }
    if order >= 2:
        res["f1''(T)=0"] = abs(ev(p.d2f1, e))
        res["f2''(0)=0"] = abs(ev(p.d2f2, z))
    report = BoundaryReport(res, tol)
    if order >= 3:
        scale = tol / fd_tol
        res["f1'''(0)=0"] = scale * abs(_fd_derivative(p.d2f1, 0.0, fd_step, 1))
        res["f2'''(T)=0"] = scale * abs(_fd_derivative(p.d2f2, T, fd_step, 1))
    if order >= 4:
        scale = tol / fd_tol
        res["f1''''(T)=0"] = scale * abs(_fd_derivative(p.d2f1, T, fd_step, 2))
        res["f2''''(0)=0"] = scale * abs(_fd_derivative(p.d2f2, 0.0, fd_step, 2))
    return report


# -- rescaling dichotomy ---------------------------------------------------------

@dataclass
class DichotomyReport:
    a_sq_constant: bool
    total_constant: bool
    spreads: dict
    consistent: bool


def _spread(x) -> float:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return float(x.max() - x.min())


def dichotomy_check(scal_base, scal_fiber, a_sq, cs=(0.5, 2.0, 10.0), tol: float = 1e-9) -> DichotomyReport:
    """Check the constant-|A| dichotomy for fiber rescalings on a sample.

    Parameters
    ----------
    scal_base, scal_fiber, a_sq : array_like
        Base scalar curvature (pulled back), fiber scalar curvature and
        ``|A|^2`` sampled on a common set of points.
    cs : iterable of float
        Fiber scale factors, each positive and different from 1.

    Returns
    -------
    DichotomyReport
        ``consistent`` is true when either ``|A|^2`` is constant and every
        rescaled scalar curvature is constant, or ``|A|^2`` varies and every
        rescaled scalar curvature varies.
    """
    cs = [float(c) for c in cs]
    if any(c <= 0 or c == 1.0 for c in cs):
        raise PreconditionError("every scale factor must satisfy c > 0 and c != 1")
    scal_base, scal_fiber, a_sq = np.broadcast_arrays(
        *(np.asarray(x, dtype=float) for x in (scal_base, scal_fiber, a_sq)))
    a_const = _spread(a_sq) <= tol
    total_const = _spread(oneill_rescaled(scal_base, scal_fiber, a_sq, 1.0)) <= tol
    spreads = {c: _spread(oneill_rescaled(scal_base, scal_fiber, a_sq, c)) for c in cs}
    if a_const:
        consistent = all(s <= tol for s in spreads.values())
    else:
        consistent = all(s > tol for s in spreads.values())
    return DichotomyReport(a_const, total_const, spreads, consistent)
