import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ellipmpc import oracles
from ellipmpc.errors import UnsupportedDimensionError
from ellipmpc.geometry import Ellipsoid, from_semi_axes, rigid_transform
from ellipmpc.overlap import (CubicCoefficients, containment_check,
                              cubic_coefficients, k_value_literal, kappa_star,
                              kappa_star_nd, lambda_family, lambda_star,
                              write_curve_csv)

UNIT = from_semi_axes(1, 1)


def circle(cx, cy=0.0, r=1.0):
    return from_semi_axes(r, r, 0.0, (cx, cy))


ellipse = st.builds(
    lambda a, b, th, cx, cy: from_semi_axes(a, b, th, (cx, cy)),
    st.floats(0.05, 1.0), st.floats(0.05, 1.0), st.floats(0, 2 * math.pi),
    st.floats(-2, 2), st.floats(-2, 2))


def test_lambda_family_examples():
    p = lambda_family(UNIT, UNIT, 0.5)
    np.testing.assert_allclose(p.e_lambda_matrix, np.eye(2))
    np.testing.assert_allclose(p.m_lambda, [0, 0])
    assert p.k_value == pytest.approx(1.0)
    p = lambda_family(UNIT, circle(2), 0.5)
    np.testing.assert_allclose(p.m_lambda, [1, 0])
    assert p.k_value == pytest.approx(0.0, abs=1e-15)
    assert lambda_family(UNIT, circle(3), 0.5).k_value == pytest.approx(-1.25)


def test_lambda_family_rejects_bad_input():
    with pytest.raises(ValueError):
        lambda_family(UNIT, UNIT, 1.5)
    with pytest.raises(ValueError):
        lambda_family(UNIT, Ellipsoid(np.eye(3), np.zeros(3)), 0.5)


def test_cubic_examples(backend):
    c = cubic_coefficients(UNIT, circle(2))
    np.testing.assert_allclose(c.as_tuple(), (1, -4, 4, 0), atol=1e-14)
    np.testing.assert_allclose(cubic_coefficients(UNIT, UNIT).as_tuple(),
                               (1, 0, 0, 0), atol=1e-15)


def test_cubic_matches_least_squares_fit(backend):
    a = Ellipsoid(np.diag([4.0, 1.0]), np.zeros(2))
    b = Ellipsoid(np.eye(2), np.array([3.0, 0.0]))
    lams = np.linspace(0.0, 1.0, 1_000_001)
    # defining expression with v = 0, w = (3, 0), both matrices diagonal
    e00 = 4.0 * lams + (1.0 - lams)
    m0 = (1.0 - lams) * 3.0 / e00
    k = 1.0 - (1.0 - lams) * 9.0 + e00 * m0 * m0
    q = e00 * 1.0
    fit = np.polynomial.polynomial.polyfit(lams, k * q, 3)
    c = cubic_coefficients(a, b)
    np.testing.assert_allclose(c.as_tuple(), fit, atol=1e-8)
    lam, _ = lambda_star(c)
    assert abs(lam - oracles.cubic_grid_argmin(c.as_tuple())) <= 1e-5


def test_cubic_rejects_3d():
    s = Ellipsoid(np.eye(3), np.zeros(3))
    with pytest.raises(UnsupportedDimensionError):
        cubic_coefficients(s, s)
    with pytest.raises(UnsupportedDimensionError):
        kappa_star(s, s)


@pytest.mark.parametrize("coeffs,lam,branch", [
    ((1, -4, 4, 0), 0.5, "quadratic"),
    ((1, 0, 0, 0), 0.0, "degenerate-constant"),
    ((1, 1, 0, 0), 0.0, "degenerate-constant"),
    ((1, -1, 0, 0), 1.0, "degenerate-constant"),
    ((1, 1, 1, 1), 0.0, "clamped-boundary"),
])
def test_lambda_star_branches(backend, coeffs, lam, branch):
    got, br = lambda_star(CubicCoefficients(*coeffs))
    assert br == branch
    assert got == pytest.approx(lam)


def test_lambda_star_negative_discriminant(backend):
    # h2^2 - 3 h3 h1 < 0: monotone cubic, cheaper endpoint wins
    c = CubicCoefficients(2.0, 1.0, -1.0, 1.0)
    assert c.h2 ** 2 - 3 * c.h3 * c.h1 < 0
    lam, br = lambda_star(c)
    assert br == "clamped-boundary"
    assert lam == 0.0


def test_interior_branch_matches_grid(backend):
    c = cubic_coefficients(UNIT, from_semi_axes(0.5, 0.8, 0.4, (1.3, 0.9)))
    lam, br = lambda_star(c)
    assert br == "interior-cubic"
    assert abs(lam - oracles.cubic_grid_argmin(c.as_tuple())) <= 1e-5


@pytest.mark.parametrize("d,kappa", [(1, 0.75), (2, 0.0), (3, -1.25)])
def test_kappa_circles(backend, d, kappa):
    r = kappa_star(UNIT, circle(d))
    assert r.kappa_star == pytest.approx(kappa, abs=1e-9)
    assert r.lambda_star == pytest.approx(0.5)
    assert r.gradient is None
    assert r.disjoint == (kappa < 0)


def test_identical_ellipses_report_det(backend):
    e = from_semi_axes(0.5, 2.0, 0.3)
    r = kappa_star(e, e)
    assert r.kappa_star == pytest.approx(np.linalg.det(e.matrix))
    assert r.branch == "degenerate-constant"


@pytest.mark.parametrize("d,kappa", [(2, 0.0), (3, -1.25)])
def test_nd_spheres(d, kappa):
    a = Ellipsoid(np.eye(3), np.zeros(3))
    b = Ellipsoid(np.eye(3), np.array([d, 0.0, 0.0]))
    r = kappa_star_nd(a, b)
    assert r.kappa_star == pytest.approx(kappa, abs=1e-6 if d == 3 else 1e-9)
    assert r.branch == "numerical"


def test_nd_rejects_bad_tolerance():
    with pytest.raises(ValueError):
        kappa_star_nd(UNIT, UNIT, tol=0.0)


@settings(max_examples=100, deadline=None)
@given(ellipse, ellipse)
def test_nd_agrees_with_closed_form(e1, e2):
    closed = kappa_star(e1, e2).kappa_star
    numeric = kappa_star_nd(e1, e2).kappa_star
    scale = max(1.0, abs(closed))
    assert abs(numeric - closed) <= 1e-6 * scale


@pytest.mark.parametrize("other,lam", [(UNIT, 0.5), (circle(1), 0.5),
                                       (circle(1), 0.0)])
def test_containment_examples(other, lam):
    assert containment_check(UNIT, other, lam, 10_000) == (0, 0)


def test_containment_rejects_empty_family():
    with pytest.raises(ValueError):
        containment_check(UNIT, circle(3), 0.5, 100)
    with pytest.raises(ValueError):
        containment_check(UNIT, UNIT, 0.5, 0)


@settings(max_examples=200, deadline=None)
@given(ellipse, ellipse)
def test_swap_symmetry(e1, e2):
    r12, r21 = kappa_star(e1, e2), kappa_star(e2, e1)
    assert r12.kappa_star == pytest.approx(r21.kappa_star, rel=1e-9, abs=1e-12)
    if r12.branch == "interior-cubic":
        assert r12.lambda_star == pytest.approx(1 - r21.lambda_star, abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(ellipse, ellipse, st.floats(-math.pi, math.pi), st.floats(-3, 3),
       st.floats(-3, 3))
def test_rigid_invariance(e1, e2, phi, tx, ty):
    k0 = kappa_star(e1, e2).kappa_star
    k1 = kappa_star(rigid_transform(e1, phi, (tx, ty)),
                    rigid_transform(e2, phi, (tx, ty))).kappa_star
    assert k1 == pytest.approx(k0, rel=1e-9, abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(ellipse, ellipse)
def test_endpoint_identity_and_positive_det(e1, e2):
    assert lambda_family(e1, e2, 0.0).k_value == pytest.approx(1.0, abs=1e-12)
    assert lambda_family(e1, e2, 1.0).k_value == pytest.approx(1.0, abs=1e-12)
    for lam in np.linspace(0, 1, 11):
        assert np.linalg.det(lambda_family(e1, e2, lam).e_lambda_matrix) > 0


@settings(max_examples=100, deadline=None)
@given(ellipse, ellipse, st.lists(st.floats(0, 1), min_size=50, max_size=50))
def test_cubic_consistency(e1, e2, lams):
    c = cubic_coefficients(e1, e2)
    scale = max(abs(v) for v in c.as_tuple())
    for lam in lams:
        p = lambda_family(e1, e2, lam)
        lit = k_value_literal(e1, e2, lam) * np.linalg.det(p.e_lambda_matrix)
        # relative to the coefficient scale: K q cancels near its roots
        assert abs(c(lam) - lit) <= 1e-9 * max(scale, abs(lit))


def _fd_pose_gradient(e1, e2, h=1e-6):
    out = []
    for i in range(3):
        vals = []
        for sgn in (1, -1):
            if i < 2:
                t = np.zeros(2)
                t[i] = sgn * h
                moved = rigid_transform(e1, 0.0, t)
            else:
                moved = rigid_transform(
                    rigid_transform(e1, 0.0, -e1.center), sgn * h, e1.center)
            vals.append(kappa_star(moved, e2).kappa_star)
        out.append((vals[0] - vals[1]) / (2 * h))
    return np.array(out)


def test_gradient_matches_finite_differences(backend, rng):
    checked = 0
    while checked < 100:
        e1, e2 = oracles.random_pair(rng)
        r = kappa_star(e1, e2, want_gradient=True)
        if r.branch != "interior-cubic" or not 0.05 < r.lambda_star < 0.95:
            continue
        g_fd = _fd_pose_gradient(e1, e2)
        err = np.linalg.norm(r.gradient - g_fd) / max(np.linalg.norm(g_fd), 1e-8)
        assert err < 1e-5
        checked += 1


def test_gradient_robot_role_two(backend):
    e1 = from_semi_axes(0.4, 0.2, 0.3, (0.0, 0.0))
    e2 = from_semi_axes(0.5, 0.3, -0.2, (0.9, 0.4))
    r1 = kappa_star(e2, e1, want_gradient=True, robot_role=2)
    r2 = kappa_star(e1, e2, want_gradient=True, robot_role=1)
    np.testing.assert_allclose(r1.gradient, r2.gradient, rtol=1e-9)
    assert r1.lambda_star == pytest.approx(1 - r2.lambda_star)
    with pytest.raises(ValueError):
        kappa_star(e1, e2, want_gradient=True, robot_role=3)


def test_curve_csv(tmp_path):
    path = tmp_path / "curve.csv"
    write_curve_csv(path, UNIT, circle(2), 101)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["lambda", "K", "Kq"]
    body = np.array(rows[1:], dtype=float)
    assert len(body) == 101
    assert abs(body[0, 1] - 1) <= 1e-12 and abs(body[-1, 1] - 1) <= 1e-12
    assert abs(body[:, 2].min()) <= 1e-6


def test_curve_grid_min_matches_kappa(tmp_path, rng):
    e1, e2 = oracles.random_pair(rng)
    n = 401
    path = tmp_path / "c.csv"
    write_curve_csv(path, e1, e2, n)
    body = np.loadtxt(path, delimiter=",", skiprows=1)
    c = cubic_coefficients(e1, e2)
    bound = max(abs(c.derivative(l)) for l in np.linspace(0, 1, 101)) / n
    assert abs(body[:, 2].min() - kappa_star(e1, e2).kappa_star) <= bound
    with pytest.raises(ValueError):
        write_curve_csv(path, e1, e2, 1)
