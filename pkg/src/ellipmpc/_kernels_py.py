"""Pure-Python hot kernels.

Mirrors the compiled ``_kernels`` extension function for function. Planar
ellipses are passed as unpacked scalars ``(m00, m01, m11, c0, c1)`` so the
same call signature works for both backends without array allocation.

Branch codes returned by the minimizer:

0 interior-cubic, 1 quadratic, 2 clamped-boundary, 3 degenerate-constant
"""

import math

import numpy as np

BRANCH_INTERIOR = 0
BRANCH_QUADRATIC = 1
BRANCH_CLAMPED = 2
BRANCH_DEGENERATE = 3

OMNI = 0
DIFF_DRIVE = 1

_ZERO_REL = 1e-10
_DISC_SLACK = 1e-12
_OMEGA_EPS = 1e-8


def cubic2(a00, a01, a11, v0, v1, b00, b01, b11, w0, w1):
    """Coefficients ``(h0, h1, h2, h3)`` of ``K(lam) * det(E_lam)``.

    Evaluated in coordinates centred on the second ellipse, which makes the
    result exactly translation invariant.
    """
    d0 = v0 - w0
    d1 = v1 - w1
    # E(lam) = B + lam * D with D = A - B
    e00 = a00 - b00
    e01 = a01 - b01
    e11 = a11 - b11
    q0 = b00 * b11 - b01 * b01
    q1 = b00 * e11 + b11 * e00 - 2.0 * b01 * e01
    q2 = e00 * e11 - e01 * e01
    # u = lam * A d
    g0 = a00 * d0 + a01 * d1
    g1 = a01 * d0 + a11 * d1
    s = d0 * g0 + d1 * g1
    # g^T adj(M) g == m11 g0^2 - 2 m01 g0 g1 + m00 g1^2
    gbg = b11 * g0 * g0 - 2.0 * b01 * g0 * g1 + b00 * g1 * g1
    geg = e11 * g0 * g0 - 2.0 * e01 * g0 * g1 + e00 * g1 * g1
    h0 = q0
    h1 = q1 - q0 * s
    h2 = q2 - q1 * s + gbg
    h3 = geg - q2 * s
    return h0, h1, h2, h3


def _poly(h0, h1, h2, h3, lam):
    return ((h3 * lam + h2) * lam + h1) * lam + h0


def minimize_cubic(h0, h1, h2, h3):
    """Minimizer of the cubic on [0, 1] and the branch that produced it."""
    scale = max(abs(h0), abs(h1), abs(h2), abs(h3))
    thr = _ZERO_REL * scale
    f1 = h0 + h1 + h2 + h3
    end_lam = 0.0 if h0 <= f1 else 1.0
    end_val = h0 if h0 <= f1 else f1
    if abs(h3) < thr or scale == 0.0:
        if abs(h2) < thr or scale == 0.0:
            if h1 < -thr:
                return 1.0, BRANCH_DEGENERATE
            return 0.0, BRANCH_DEGENERATE
        if h2 > 0.0:
            lam = -h1 / (2.0 * h2)
            if lam < 0.0:
                lam = 0.0
            elif lam > 1.0:
                lam = 1.0
            return lam, BRANCH_QUADRATIC
        return end_lam, BRANCH_CLAMPED
    disc = h2 * h2 - 3.0 * h3 * h1
    if disc < 0.0:
        if disc < -_DISC_SLACK * scale * scale:
            return end_lam, BRANCH_CLAMPED
        disc = 0.0
    root = math.sqrt(disc)
    # local minimum of the cubic; conjugate form avoids cancellation when h2 > 0
    if h2 > 0.0:
        lam = -h1 / (h2 + root)
    else:
        lam = (root - h2) / (3.0 * h3)
    if 0.0 < lam < 1.0 and _poly(h0, h1, h2, h3, lam) <= end_val:
        return lam, BRANCH_INTERIOR
    return end_lam, BRANCH_CLAMPED


def kappa2(a00, a01, a11, v0, v1, b00, b01, b11, w0, w1):
    """``(lam_star, kappa_star, branch)`` for two planar ellipses."""
    h0, h1, h2, h3 = cubic2(a00, a01, a11, v0, v1, b00, b01, b11, w0, w1)
    lam, branch = minimize_cubic(h0, h1, h2, h3)
    return lam, _poly(h0, h1, h2, h3, lam), branch


def _partials_first(lam, a00, a01, a11, d0, d1, b00, b01, b11):
    # partials of K*q at fixed lam w.r.t. the first ellipse's centre and matrix
    e00 = lam * a00 + (1.0 - lam) * b00
    e01 = lam * a01 + (1.0 - lam) * b01
    e11 = lam * a11 + (1.0 - lam) * b11
    q = e00 * e11 - e01 * e01
    g0 = a00 * d0 + a01 * d1
    g1 = a01 * d0 + a11 * d1
    c = 1.0 - lam * (d0 * g0 + d1 * g1)
    u0 = lam * g0
    u1 = lam * g1
    # adj(E) u
    r0 = e11 * u0 - e01 * u1
    r1 = -e01 * u0 + e00 * u1
    # grad wrt centre: 2 lam A (adj(E) u - q d)
    t0 = r0 - q * d0
    t1 = r1 - q * d1
    dv0 = 2.0 * lam * (a00 * t0 + a01 * t1)
    dv1 = 2.0 * lam * (a01 * t0 + a11 * t1)
    da00 = lam * (c * e11 - q * d0 * d0 + 2.0 * r0 * d0 + u1 * u1)
    da11 = lam * (c * e00 - q * d1 * d1 + 2.0 * r1 * d1 + u0 * u0)
    da01 = lam * (-2.0 * c * e01 - 2.0 * q * d0 * d1
                  + 2.0 * (r0 * d1 + r1 * d0) - 2.0 * u0 * u1)
    return dv0, dv1, da00, da01, da11


def kappa2_partials(a00, a01, a11, v0, v1, b00, b01, b11, w0, w1):
    """Like :func:`kappa2` plus partials w.r.t. the first ellipse.

    Returns ``(lam, kappa, branch, dv0, dv1, da00, da01, da11)`` where
    ``da01`` is the derivative along the symmetric off-diagonal direction.
    Partials are taken at fixed ``lam``; at an interior minimizer this is the
    total derivative.
    """
    lam, kappa, branch = kappa2(a00, a01, a11, v0, v1, b00, b01, b11, w0, w1)
    parts = _partials_first(lam, a00, a01, a11, v0 - w0, v1 - w1,
                            b00, b01, b11)
    return (lam, kappa, branch) + parts


def shape_matrix(a, b, theta):
    """Entries ``(m00, m01, m11)`` and their theta-derivatives."""
    al = 1.0 / (a * a)
    be = 1.0 / (b * b)
    c = math.cos(theta)
    s = math.sin(theta)
    m00 = al * c * c + be * s * s
    m01 = (al - be) * c * s
    m11 = al * s * s + be * c * c
    dm00 = 2.0 * c * s * (be - al)
    dm01 = (al - be) * (c * c - s * s)
    dm11 = -dm00
    return m00, m01, m11, dm00, dm01, dm11


def _step(family, dt, x, u, out, jx, ju):
    """One exact step. Writes successor into ``out``; fills Jacobians if given."""
    if family == OMNI:
        out[0] = x[0] + dt * u[0]
        out[1] = x[1] + dt * u[1]
        out[2] = x[2] + dt * u[2]
        if jx is not None:
            for i in range(3):
                for j in range(3):
                    jx[i][j] = 1.0 if i == j else 0.0
                    ju[i][j] = dt if i == j else 0.0
        return
    th = x[2]
    v = u[0]
    om = u[1]
    out[2] = th + om * dt
    if abs(om) > _OMEGA_EPS:
        a = 0.5 * om * dt
        phi = th + a
        sa = math.sin(a) / a
        length = v * dt * sa
        cp = math.cos(phi)
        sp = math.sin(phi)
        out[0] = x[0] + length * cp
        out[1] = x[1] + length * sp
        if jx is not None:
            if abs(a) < 1e-2:
                a2 = a * a
                dsa = a * (-1.0 / 3.0 + a2 * (1.0 / 30.0 - a2 / 840.0))
            else:
                dsa = (a * math.cos(a) - math.sin(a)) / (a * a)
            dl = v * dt * dsa * 0.5 * dt
            jx[0][0], jx[0][1], jx[0][2] = 1.0, 0.0, -length * sp
            jx[1][0], jx[1][1], jx[1][2] = 0.0, 1.0, length * cp
            jx[2][0], jx[2][1], jx[2][2] = 0.0, 0.0, 1.0
            ju[0][0] = dt * sa * cp
            ju[1][0] = dt * sa * sp
            ju[2][0] = 0.0
            ju[0][1] = dl * cp - length * sp * 0.5 * dt
            ju[1][1] = dl * sp + length * cp * 0.5 * dt
            ju[2][1] = dt
        return
    # second-order Taylor in om
    c = math.cos(th)
    s = math.sin(th)
    hdt2 = 0.5 * dt * dt
    out[0] = x[0] + v * dt * c - v * om * hdt2 * s
    out[1] = x[1] + v * dt * s + v * om * hdt2 * c
    if jx is not None:
        jx[0][0], jx[0][1], jx[0][2] = 1.0, 0.0, -v * dt * s - v * om * hdt2 * c
        jx[1][0], jx[1][1], jx[1][2] = 0.0, 1.0, v * dt * c - v * om * hdt2 * s
        jx[2][0], jx[2][1], jx[2][2] = 0.0, 0.0, 1.0
        ju[0][0] = dt * c - om * hdt2 * s
        ju[1][0] = dt * s + om * hdt2 * c
        ju[2][0] = 0.0
        ju[0][1] = -v * hdt2 * s
        ju[1][1] = v * hdt2 * c
        ju[2][1] = dt


def step(family, dt, x, u):
    out = [0.0, 0.0, 0.0]
    _step(family, dt, [float(x[0]), float(x[1]), float(x[2])],
          [float(ui) for ui in u], out, None, None)
    return np.array(out)


def step_jacobians(family, dt, x, u):
    nu = 3 if family == OMNI else 2
    out = [0.0, 0.0, 0.0]
    jx = [[0.0] * 3 for _ in range(3)]
    ju = [[0.0] * nu for _ in range(3)]
    _step(family, dt, [float(x[0]), float(x[1]), float(x[2])],
          [float(ui) for ui in u], out, jx, ju)
    return np.array(out), np.array(jx), np.array(ju)


def _nu(family):
    return 3 if family == OMNI else 2


def _rollout_lists(family, dt, x0, z, horizon, with_jac):
    nu = _nu(family)
    xs = [[float(x0[0]), float(x0[1]), float(x0[2])]]
    us = []
    jxs = []
    jus = []
    for k in range(horizon):
        u = [float(z[k * nu + j]) for j in range(nu)]
        out = [0.0, 0.0, 0.0]
        if with_jac:
            jx = [[0.0] * 3 for _ in range(3)]
            ju = [[0.0] * nu for _ in range(3)]
        else:
            jx = ju = None
        _step(family, dt, xs[-1], u, out, jx, ju)
        xs.append(out)
        us.append(u)
        jxs.append(jx)
        jus.append(ju)
    return xs, us, jxs, jus


def rollout(family, dt, x0, z, horizon):
    xs, _, _, _ = _rollout_lists(family, dt, x0, z, horizon, False)
    return np.array(xs)


def _stage(values, weights, expos, grad):
    total = 0.0
    for i in range(len(values)):
        x = values[i]
        e = expos[i]
        xp = x ** (e - 1)
        total += weights[i] * xp * x
        if grad is not None:
            grad[i] = weights[i] * e * xp
    return total


def _backward(family, dt, horizon, xs, us, jxs, jus, qw, qe, rw, re, lam_x):
    """Cost plus reverse sweep. ``lam_x[k]`` holds extra state gradients."""
    nu = _nu(family)
    gx = [0.0, 0.0, 0.0]
    gu = [0.0] * nu
    grad = np.zeros(horizon * nu)
    cost = _stage(xs[horizon], qw, qe, gx)
    adj = [gx[i] + lam_x[horizon][i] for i in range(3)]
    for k in range(horizon - 1, -1, -1):
        cost += _stage(xs[k], qw, qe, gx)
        cost += _stage(us[k], rw, re, gu)
        jx = jxs[k]
        ju = jus[k]
        for j in range(nu):
            acc = gu[j]
            for i in range(3):
                acc += ju[i][j] * adj[i]
            grad[k * nu + j] = acc
        new = [0.0, 0.0, 0.0]
        for j in range(3):
            acc = gx[j] + lam_x[k][j]
            for i in range(3):
                acc += jx[i][j] * adj[i]
            new[j] = acc
        adj = new
    return cost, grad


def cost_grad(family, dt, x0, z, horizon, qw, qe, rw, re):
    """Condensed cost and its gradient w.r.t. the stacked inputs."""
    xs, us, jxs, jus = _rollout_lists(family, dt, x0, z, horizon, True)
    zero = [[0.0, 0.0, 0.0] for _ in range(horizon + 1)]
    return _backward(family, dt, horizon, xs, us, jxs, jus,
                     qw, qe, rw, re, zero)


def _kappa_pose(x, ra, rb, ob, want):
    m00, m01, m11, dm00, dm01, dm11 = shape_matrix(ra, rb, x[2])
    if not want:
        return kappa2(m00, m01, m11, x[0], x[1],
                      ob[0], ob[1], ob[2], ob[3], ob[4])[1], None
    r = kappa2_partials(m00, m01, m11, x[0], x[1],
                        ob[0], ob[1], ob[2], ob[3], ob[4])
    gth = r[5] * dm00 + r[6] * dm01 + r[7] * dm11
    return r[1], (r[3], r[4], gth)


def constraints(family, dt, x0, z, horizon, ab, obstacles, want_jac):
    """Overlap values per horizon step and obstacle, optional Jacobian.

    ``obstacles`` is an (n, 5) array of rows ``(m00, m01, m11, c0, c1)``.
    The Jacobian has shape ``((horizon + 1) * n, horizon * nu)``.
    """
    nu = _nu(family)
    nobs = len(obstacles)
    xs, us, jxs, jus = _rollout_lists(family, dt, x0, z, horizon, want_jac)
    vals = np.zeros((horizon + 1, nobs))
    jac = np.zeros(((horizon + 1) * nobs, horizon * nu)) if want_jac else None
    ra, rb = float(ab[0]), float(ab[1])
    obs = [[float(v) for v in row] for row in obstacles]
    sens = np.zeros((3, horizon * nu))
    for k in range(horizon + 1):
        if want_jac and k > 0:
            sens = np.asarray(jxs[k - 1]) @ sens
            sens[:, (k - 1) * nu:k * nu] += np.asarray(jus[k - 1])
        for i in range(nobs):
            kap, g = _kappa_pose(xs[k], ra, rb, obs[i], want_jac)
            vals[k, i] = kap
            if want_jac and k > 0:
                jac[k * nobs + i] = np.asarray(g) @ sens
    return vals, jac


def al_value_grad(family, dt, x0, z, horizon, qw, qe, rw, re, ab, obstacles,
                  eps, mu, rho, scales):
    """Augmented Lagrangian value, gradient and raw constraint matrix.

    ``mu`` is an ((horizon + 1), n) multiplier array. Each term contributes
    ``rho/2 * max(0, g + mu/rho)**2 - mu**2 / (2 rho)`` with
    ``g = scales[i] * (kappa + eps)``.
    """
    nobs = len(obstacles)
    xs, us, jxs, jus = _rollout_lists(family, dt, x0, z, horizon, True)
    vals = np.zeros((horizon + 1, nobs))
    lam_x = [[0.0, 0.0, 0.0] for _ in range(horizon + 1)]
    ra, rb = float(ab[0]), float(ab[1])
    obs = [[float(v) for v in row] for row in obstacles]
    pen = 0.0
    for k in range(horizon + 1):
        for i in range(nobs):
            m = float(mu[k][i])
            kap, _ = _kappa_pose(xs[k], ra, rb, obs[i], False)
            vals[k, i] = kap
            sc = float(scales[i])
            t = sc * (kap + eps) + m / rho
            pen -= m * m / (2.0 * rho)
            if t > 0.0:
                pen += 0.5 * rho * t * t
                if k > 0:
                    _, g = _kappa_pose(xs[k], ra, rb, obs[i], True)
                    w = rho * t * sc
                    lam_x[k][0] += w * g[0]
                    lam_x[k][1] += w * g[1]
                    lam_x[k][2] += w * g[2]
    cost, grad = _backward(family, dt, horizon, xs, us, jxs, jus,
                           qw, qe, rw, re, lam_x)
    return cost + pen, grad, vals
