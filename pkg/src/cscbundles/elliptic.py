"""Jacobi elliptic functions and the complete elliptic integral K.

Everything here takes the *modulus* ``k`` (not the parameter ``m = k**2``)
and works for real arguments only.  K is computed from the arithmetic-geometric
mean, and (sn, cn, dn) from the descending AGM ladder (DLMF 22.20.ii).

Precision degrades as ``k -> 1`` because ``K`` grows like ``log(4/k')``;
moduli up to ``1 - 1e-12`` are accepted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .exceptions import DomainError

#: Largest modulus accepted by the evaluators.
K_MAX = 1.0 - 1e-12

_AGM_MAX_ITER = 64


@dataclass(frozen=True)
class EllipticModulus:
    """Validated elliptic modulus ``0 <= k <= K_MAX``."""

    k: float

    def __post_init__(self):
        check_modulus(self.k)

    def __float__(self):
        return float(self.k)

    @property
    def complementary(self) -> float:
        """``k' = sqrt(1 - k**2)``, computed without cancellation."""
        return complementary_modulus(self.k)


class JacobiValues(NamedTuple):
    cn: np.ndarray
    sn: np.ndarray
    dn: np.ndarray
    t: np.ndarray


class JacobiDerivatives(NamedTuple):
    """First and second derivatives of cn and sn with respect to the argument."""

    cn1: np.ndarray
    cn2: np.ndarray
    sn1: np.ndarray
    sn2: np.ndarray


def check_modulus(k) -> float:
    """Return ``k`` as a float, raising :class:`DomainError` outside ``[0, K_MAX]``."""
    k = float(k)
    if not (0.0 <= k <= K_MAX):
        raise DomainError(f"elliptic modulus must lie in [0, 1), got k={k!r}")
    return k


def complementary_modulus(k) -> float:
    k = float(k)
    return math.sqrt((1.0 - k) * (1.0 + k))


def _agm_ladder(k: float):
    """Rows ``(a_n, c_n)`` of the AGM started from ``(1, k', k)``."""
    a, b, c = 1.0, complementary_modulus(k), k
    a_seq, c_seq = [a], [c]
    for _ in range(_AGM_MAX_ITER):
        if abs(c) <= 2.0**-53 * a:
            break
        a, b, c = 0.5 * (a + b), math.sqrt(a * b), 0.5 * (a - b)
        a_seq.append(a)
        c_seq.append(c)
    return a_seq, c_seq


def quarter_period(k) -> float:
    """Complete elliptic integral of the first kind ``K(k)``.

    Parameters
    ----------
    k : float or EllipticModulus
        Modulus in ``[0, 1)``.

    Returns
    -------
    float
        ``K(k) = pi / (2 * AGM(1, k'))``; ``4 K(k)`` is the real period of
        sn and cn.
    """
    k = check_modulus(k)
    a_seq, _ = _agm_ladder(k)
    return math.pi / (2.0 * a_seq[-1])


def jacobi(t, k) -> JacobiValues:
    """Evaluate ``(cn, sn, dn)`` at real argument(s) ``t`` for modulus ``k``.

    ``t`` may be a scalar or an array; the outputs have its shape.  The
    argument is first reduced modulo ``4K`` so that periodicity holds to
    rounding level even for large ``|t|``.
    """
    k = check_modulus(k)
    t_arr = np.asarray(t, dtype=float)
    a_seq, c_seq = _agm_ladder(k)
    period = 2.0 * math.pi / a_seq[-1]  # 4K
    u = t_arr - period * np.round(t_arr / period)

    n = len(a_seq) - 1
    phi = (2.0**n) * a_seq[n] * u
    for j in range(n, 0, -1):
        phi = 0.5 * (phi + np.arcsin(c_seq[j] / a_seq[j] * np.sin(phi)))
    sn = np.sin(phi)
    cn = np.cos(phi)
    # dn >= k' > 0 for real arguments; pick the better-conditioned of the two equivalent forms
    kp2 = (1.0 - k) * (1.0 + k)
    ksn2 = k * k * sn * sn
    dn = np.sqrt(np.where(ksn2 < 0.5, 1.0 - ksn2, kp2 + k * k * cn * cn))
    return JacobiValues(cn, sn, dn, t_arr)


def jacobi_derivatives(t, k) -> JacobiDerivatives:
    """Closed-form first and second derivatives of cn and sn.

    Uses ``cn' = -sn dn``, ``sn' = cn dn`` and the cubic identities
    ``cn'' = -2k^2 cn^3 - (1 - 2k^2) cn``, ``sn'' = 2k^2 sn^3 - (1 + k^2) sn``.
    """
    k = check_modulus(k)
    cn, sn, dn, _ = jacobi(t, k)
    k2 = k * k
    return JacobiDerivatives(
        cn1=-sn * dn,
        cn2=-2.0 * k2 * cn**3 - (1.0 - 2.0 * k2) * cn,
        sn1=cn * dn,
        sn2=2.0 * k2 * sn**3 - (1.0 + k2) * sn,
    )
