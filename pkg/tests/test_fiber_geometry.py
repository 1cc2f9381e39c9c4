import itertools
import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from cscbundles.exceptions import DomainError, PreconditionError
from cscbundles.fiber_geometry import (BaseGeometry, ProfilePair, SkewFamily,
                                       SubmersionConstants, check_boundary, dichotomy_check,
                                       oneill_norm_from_xi, oneill_norm_join, oneill_rescaled,
                                       scal_doubly_warped, scal_join_total, sphere_bundle_scalar,
                                       xi_form)
from cscbundles.join_solver import JoinParams, admissible_modulus_range, build_profiles, solve

J = np.array([[0.0, -1.0], [1.0, 0.0]])


# -- symbolic oracle ---------------------------------------------------------------

def _ricci_scalar(g, coords):
    """Scalar curvature of a diagonal metric by brute-force Christoffel symbols."""
    n = len(coords)
    ginv = sp.diag(*[1 / g[i, i] for i in range(n)])
    gam = [[[(sum(ginv[a, d] * (sp.diff(g[d, b], coords[c]) + sp.diff(g[d, c], coords[b])
                                           - sp.diff(g[b, c], coords[d])) for d in range(n)) / 2)
             for c in range(n)] for b in range(n)] for a in range(n)]
    scal = 0
    for b, c in itertools.product(range(n), repeat=2):
        if ginv[b, c] == 0:
            continue
        ric = 0
        for a in range(n):
            ric += sp.diff(gam[a][b][c], coords[a]) - sp.diff(gam[a][b][a], coords[c])
            for e in range(n):
                ric += gam[a][a][e] * gam[e][b][c] - gam[a][c][e] * gam[e][b][a]
        scal += ginv[b, c] * ric
    return scal


def _sphere_block(f, angles):
    """Warped round metric f^2 g_{S^k} in nested polar angles."""
    entries, w = [], f**2
    for th in angles:
        entries.append(w)
        w = w * sp.sin(th) ** 2
    return entries


def symbolic_scal(k1, k2, f1, f2, t):
    th = sp.symbols(f"x0:{k1}")
    ph = sp.symbols(f"y0:{k2}")
    g = sp.diag(1, *_sphere_block(f1, th), *_sphere_block(f2, ph))
    scal = _ricci_scalar(g, (t, *th, *ph))
    # independent of the angles; pin them to a generic value
    return scal.subs({x: sp.Rational(7, 10) for x in (*th, *ph)})


def test_symbolic_oracle_on_round_sphere():
    t = sp.symbols("t")
    assert sp.simplify(symbolic_scal(1, 1, sp.cos(t), sp.sin(t), t)) == 6


@pytest.mark.parametrize("k1,k2", [(1, 2), (2, 1), (2, 2)])
def test_scal_matches_symbolic_oracle(k1, k2):
    t = sp.symbols("t")
    f1 = 1 + t / 3 + t**2 / 5
    f2 = sp.Rational(1, 2) + sp.sin(t)
    expr = sp.lambdify(t, symbolic_scal(k1, k2, f1, f2, t), "numpy")
    fns = [sp.lambdify(t, e, "numpy") for e in
           (f1, sp.diff(f1, t), sp.diff(f1, t, 2), f2, sp.diff(f2, t), sp.diff(f2, t, 2))]
    p = ProfilePair(2.0, *[(lambda fn: (lambda x: fn(x) + 0 * x))(fn) for fn in fns])
    ts = np.linspace(0.1, 1.9, 7)
    np.testing.assert_allclose(scal_doubly_warped(k1, k2, p, ts), expr(ts), rtol=1e-12, atol=1e-12)


# -- doubly warped scalar curvature ---------------------------------------------

def test_round_three_sphere():
    assert scal_doubly_warped(1, 1, ProfilePair.round(1.0), math.pi / 4) == pytest.approx(6.0, abs=1e-14)


def test_round_six_sphere():
    assert scal_doubly_warped(2, 3, ProfilePair.round(1.0), math.pi / 3) == pytest.approx(30.0, abs=1e-13)


@pytest.mark.parametrize("k1,k2,gamma", [(1, 1, 0.5), (2, 3, 1.7), (4, 1, 2.0), (3, 3, 0.9)])
def test_round_join_reduction(k1, k2, gamma):
    p = ProfilePair.round(gamma)
    t = p.interior_grid(200)
    np.testing.assert_allclose(scal_doubly_warped(k1, k2, p, t),
                               (k1 + k2) * (k1 + k2 + 1) * gamma**2, atol=1e-9)


def test_zero_dimension_drops_terms():
    p = ProfilePair.round(1.0)
    t = np.linspace(0.2, 1.3, 9)
    # dt^2 + sin^2 t g_{S^k}: the round sphere S^{k+1}
    np.testing.assert_allclose(scal_doubly_warped(0, 3, p, t), 12.0, atol=1e-12)
    np.testing.assert_allclose(scal_doubly_warped(2, 0, p, t), 6.0, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 5), st.integers(1, 5), st.floats(0.05, 0.95))
def test_swap_symmetry(k1, k2, s):
    sol = solve(JoinParams(BaseGeometry(2, 0.0), 1, 1, 2.0, 1.0), k=0.6)
    p = build_profiles(sol)
    q = ProfilePair(p.T, p.f2, p.df2, p.d2f2, p.f1, p.df1, p.d2f1)
    t = s * p.T
    assert scal_doubly_warped(k1, k2, p, t) == pytest.approx(scal_doubly_warped(k2, k1, q, t), rel=1e-13)


@pytest.mark.parametrize("t", [0.0, -0.1, math.pi / 2, 3.0])
def test_outside_interval(t):
    with pytest.raises(DomainError):
        scal_doubly_warped(1, 1, ProfilePair.round(1.0), t)
    with pytest.raises(DomainError):
        oneill_norm_join(SubmersionConstants(1, 1, 1, 1), ProfilePair.round(1.0), t)


def test_nonpositive_profile():
    p = ProfilePair(3.0, np.cos, lambda t: -np.sin(t), lambda t: -np.cos(t),
                    np.sin, np.cos, lambda t: -np.sin(t))
    with pytest.raises(DomainError):
        scal_doubly_warped(1, 1, p, 2.0)


def test_invalid_constructors():
    with pytest.raises(DomainError):
        ProfilePair.round(1.0).__class__(0.0, *[np.sin] * 6)
    with pytest.raises(DomainError):
        BaseGeometry(0, 1.0)
    with pytest.raises(DomainError):
        SubmersionConstants(1, 1, -1.0, 0.0)


def test_finite_differences_reproduce_profile_derivatives():
    sol = solve(JoinParams(BaseGeometry(2, 0.0), 2, 3, 1.5, 1.0), k=0.8)
    p = build_profiles(sol)
    t, h = p.interior_grid(50), 1e-5
    for f, df, d2f in ((p.f1, p.df1, p.d2f1), (p.f2, p.df2, p.d2f2)):
        np.testing.assert_allclose((f(t + h) - f(t - h)) / (2 * h), df(t), atol=1e-6)
        np.testing.assert_allclose((df(t + h) - df(t - h)) / (2 * h), d2f(t), atol=1e-6)


# -- totals ----------------------------------------------------------------------

def test_join_total_flat_connection():
    p = ProfilePair.round(1.3)
    t = p.interior_grid(20)
    base = BaseGeometry(2, 2.0)
    np.testing.assert_array_equal(scal_join_total(base, SubmersionConstants(2, 1, 0, 0), p, t),
                                  2.0 + scal_doubly_warped(2, 1, p, t))


def test_join_total_affine_in_base():
    p = ProfilePair.round(0.7)
    t = p.interior_grid(20)
    c = SubmersionConstants(1, 2, 0.4, 1.1)
    d = scal_join_total(BaseGeometry(3, 1.25), c, p, t) - scal_join_total(BaseGeometry(3, 0.0), c, p, t)
    np.testing.assert_allclose(d, 1.25, atol=1e-13)


def test_join_total_worked_instance_with_base():
    a = math.sqrt(10)
    p = JoinParams(BaseGeometry(2, 2.0), 1, 1, a, a)
    branch = [b for b in admissible_modulus_range(p) if not b.is_round][0]
    sol = solve(p, k=math.sqrt(0.5), branch=branch)
    prof = build_profiles(sol)
    vals = scal_join_total(p.base, p.constants, prof, prof.interior_grid(300))
    np.testing.assert_allclose(vals, 2 - 3 * math.sqrt(2), atol=1e-10)


def test_oneill_norm_join_round_case_constant():
    gamma, a = 1.4, 2.0
    p = ProfilePair.round(gamma)
    vals = oneill_norm_join(SubmersionConstants(1, 2, a, a), p, p.interior_grid(100))
    np.testing.assert_allclose(vals, a**2 / gamma**2, atol=1e-13)
    assert np.all(oneill_norm_join(SubmersionConstants(1, 2, 0, 0), p, p.interior_grid(10)) == 0)


def test_oneill_norm_join_varies_for_unequal_norms():
    sol = solve(JoinParams(BaseGeometry(2, 0.0), 1, 1, 2.0, 1.0), k=0.5)
    prof = build_profiles(sol)
    vals = oneill_norm_join(SubmersionConstants(1, 1, 2.0, 1.0), prof, prof.interior_grid(100))
    assert np.ptp(vals) > 1e-3 and np.all(vals > 0)


@pytest.mark.parametrize("args,expected", [((2, 6, 1, 1), 7.0), ((2, 6, 1, 4), -0.5)])
def test_oneill_rescaled(args, expected):
    assert oneill_rescaled(*args) == pytest.approx(expected, abs=1e-15)


def test_oneill_rescaled_rejects_nonpositive_scale():
    for c in (0.0, -1.0):
        with pytest.raises(DomainError):
            oneill_rescaled(1, 1, 1, c)


@pytest.mark.parametrize("scal,k,a,r,expected", [(2, 3, 0, 1, 8.0), (2, 3, 1, 1, 7.0), (2, 3, 0, 2, 3.5)])
def test_sphere_bundle_scalar(scal, k, a, r, expected):
    assert sphere_bundle_scalar(BaseGeometry(2, scal), k, a, r) == pytest.approx(expected)


def test_sphere_bundle_scalar_matches_product_formula():
    for m, k, r in [(2, 3, 0.7), (4, 2, 1.9), (3, 5, 2.5)]:
        assert sphere_bundle_scalar(BaseGeometry(m, m * (m - 1)), k, 0.0, r) == pytest.approx(
            m * (m - 1) + k * (k - 1) / r**2, rel=1e-15)
    with pytest.raises(DomainError):
        sphere_bundle_scalar(BaseGeometry(2, 2.0), 3, 0.0, 0.0)


# -- xi form ---------------------------------------------------------------------

def xi_direct(F, s):
    m = F.shape[0]
    total = 0.0
    for i in range(m):
        for j in range(m):
            v = F[i, j] @ s
            total += float(v @ v)
    return total


def rotation_family():
    return SkewFamily.from_pairs(2, 2, {(0, 1): J})


def test_xi_flat():
    fam = SkewFamily(np.zeros((3, 3, 4, 4)))
    assert xi_form(fam, np.ones(4)) == 0.0
    assert oneill_norm_from_xi(fam, np.eye(4)[0]) == 0.0


def test_xi_rotation_generator():
    assert xi_form(rotation_family(), np.array([0.6, 0.8])) == pytest.approx(2.0, abs=1e-15)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_oneill_norm_rotation_scaled(n):
    fam = rotation_family().scaled(n / 2)
    s = np.array([1.0, 0.0])
    assert oneill_norm_from_xi(fam, s) == pytest.approx(n**2 / 8, abs=1e-15)
    assert 0.25 * xi_direct(fam.F, s) == pytest.approx(n**2 / 8, abs=1e-15)


def test_oneill_norm_independent_of_direction():
    fam = rotation_family().scaled(1.5)
    th = np.linspace(0, 2 * np.pi, 50, endpoint=False)
    vals = [oneill_norm_from_xi(fam, np.array([math.cos(x), math.sin(x)])) for x in th]
    assert max(vals) - min(vals) < 1e-12


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-3, 3))
def test_xi_quadratic_and_matches_direct_sum(seed, lam):
    rng = np.random.default_rng(seed)
    m, n = 3, 4
    pairs = {}
    for i, j in itertools.combinations(range(m), 2):
        X = rng.normal(size=(n, n))
        pairs[(i, j)] = X - X.T
    fam = SkewFamily.from_pairs(m, n, pairs)
    s = rng.normal(size=n)
    assert xi_form(fam, s) == pytest.approx(xi_direct(fam.F, s), rel=1e-12)
    assert xi_form(fam, lam * s) == pytest.approx(lam**2 * xi_form(fam, s), rel=1e-12, abs=1e-12)
    assert xi_form(fam.scaled(lam), s) == pytest.approx(lam**2 * xi_form(fam, s), rel=1e-12, abs=1e-12)


def test_xi_errors():
    fam = rotation_family()
    with pytest.raises(DomainError):
        xi_form(fam, np.ones(3))
    with pytest.raises(PreconditionError):
        oneill_norm_from_xi(fam, np.array([1.0, 1.0]))
    bad = np.zeros((2, 2, 2, 2))
    bad[0, 1] = J
    with pytest.raises(DomainError):
        SkewFamily(bad)
    bad[1, 0] = -np.eye(2)
    bad[0, 1] = np.eye(2)
    with pytest.raises(DomainError):
        SkewFamily(bad)


# -- boundary conditions --------------------------------------------------------

def test_boundary_round():
    rep = check_boundary(ProfilePair.round(1.0))
    assert len(rep.residuals) == 10
    assert rep.passed and rep.max_residual < 1e-12


def test_boundary_elliptic():
    for k in (0.1, 0.5, 0.9, 0.999):
        sol = solve(JoinParams(BaseGeometry(2, 0.0), 2, 1, 3.0, 1.0), k=k)
        rep = check_boundary(build_profiles(sol), order=4)
        assert rep.passed, rep.failures
        assert rep.residuals["f1'(T)=-1"] < 1e-10 and rep.residuals["f2'(0)=1"] < 1e-10


def test_boundary_order_one_has_eight_conditions():
    assert len(check_boundary(ProfilePair.round(2.0), order=1).residuals) == 8


def test_boundary_flags_wrong_slope():
    p = ProfilePair(math.pi / 2, np.cos, lambda t: -np.sin(t), lambda t: -np.cos(t),
                    lambda t: 2 * np.sin(t), lambda t: 2 * np.cos(t), lambda t: -2 * np.sin(t))
    rep = check_boundary(p)
    assert rep.failures == ["f2'(0)=1"]
    assert rep.residuals["f2'(0)=1"] == pytest.approx(1.0)


def test_boundary_flags_nonpositive_value():
    p = ProfilePair(math.pi / 2, lambda t: np.cos(t) - 1, lambda t: -np.sin(t),
                    lambda t: -np.cos(t), np.sin, np.cos, lambda t: -np.sin(t))
    rep = check_boundary(p)
    assert "f1(0)>0" in rep.failures and rep.residuals["f1(0)>0"] >= 1.0


def test_boundary_order_validation():
    for order in (0, 5):
        with pytest.raises(DomainError):
            check_boundary(ProfilePair.round(), order=order)


# -- rescaling dichotomy ----------------------------------------------------------

def test_dichotomy_constant_inputs():
    rep = dichotomy_check(np.full(20, 2.0), np.full(20, 6.0), np.full(20, 1.0))
    assert rep.a_sq_constant and rep.total_constant and rep.consistent
    assert all(s == 0 for s in rep.spreads.values())


def test_dichotomy_varying_norm():
    x = np.linspace(0, 1, 50)
    a_sq = 1 + x**2
    scal_fiber = 5 + a_sq  # keeps the unscaled total constant
    rep = dichotomy_check(2.0, scal_fiber, a_sq, cs=(0.5, 2.0, 10.0))
    assert not rep.a_sq_constant and rep.total_constant
    assert rep.consistent and rep.spreads[2.0] > 0.1


def test_dichotomy_rejects_unit_scale():
    for cs in ((1.0,), (0.0, 2.0), (-1.0,)):
        with pytest.raises(PreconditionError):
            dichotomy_check(1.0, 1.0, 1.0, cs=cs)
