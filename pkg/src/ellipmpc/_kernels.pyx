# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels. Same API as ``_kernels_py``."""

from libc.math cimport sqrt, sin, cos, fabs

import numpy as np

cdef double ZERO_REL = 1e-10
cdef double DISC_SLACK = 1e-12
cdef double OMEGA_EPS = 1e-8

BRANCH_INTERIOR = 0
BRANCH_QUADRATIC = 1
BRANCH_CLAMPED = 2
BRANCH_DEGENERATE = 3

OMNI = 0
DIFF_DRIVE = 1


cdef inline void _cubic2(double a00, double a01, double a11, double v0, double v1,
                         double b00, double b01, double b11, double w0, double w1,
                         double* h) noexcept nogil:
    cdef double d0 = v0 - w0
    cdef double d1 = v1 - w1
    cdef double e00 = a00 - b00
    cdef double e01 = a01 - b01
    cdef double e11 = a11 - b11
    cdef double q0 = b00 * b11 - b01 * b01
    cdef double q1 = b00 * e11 + b11 * e00 - 2.0 * b01 * e01
    cdef double q2 = e00 * e11 - e01 * e01
    cdef double g0 = a00 * d0 + a01 * d1
    cdef double g1 = a01 * d0 + a11 * d1
    cdef double s = d0 * g0 + d1 * g1
    cdef double gbg = b11 * g0 * g0 - 2.0 * b01 * g0 * g1 + b00 * g1 * g1
    cdef double geg = e11 * g0 * g0 - 2.0 * e01 * g0 * g1 + e00 * g1 * g1
    h[0] = q0
    h[1] = q1 - q0 * s
    h[2] = q2 - q1 * s + gbg
    h[3] = geg - q2 * s


cdef inline double _poly(double* h, double lam) noexcept nogil:
    return ((h[3] * lam + h[2]) * lam + h[1]) * lam + h[0]


cdef inline double _fmax4(double a, double b, double c, double d) noexcept nogil:
    cdef double m = a
    if b > m:
        m = b
    if c > m:
        m = c
    if d > m:
        m = d
    return m


cdef inline double _minimize(double* h, int* branch) noexcept nogil:
    cdef double scale = _fmax4(fabs(h[0]), fabs(h[1]), fabs(h[2]), fabs(h[3]))
    cdef double thr = ZERO_REL * scale
    cdef double f1 = h[0] + h[1] + h[2] + h[3]
    cdef double end_lam, end_val, lam, disc, root
    if h[0] <= f1:
        end_lam = 0.0
        end_val = h[0]
    else:
        end_lam = 1.0
        end_val = f1
    if fabs(h[3]) < thr or scale == 0.0:
        if fabs(h[2]) < thr or scale == 0.0:
            branch[0] = 3
            if h[1] < -thr:
                return 1.0
            return 0.0
        if h[2] > 0.0:
            lam = -h[1] / (2.0 * h[2])
            if lam < 0.0:
                lam = 0.0
            elif lam > 1.0:
                lam = 1.0
            branch[0] = 1
            return lam
        branch[0] = 2
        return end_lam
    disc = h[2] * h[2] - 3.0 * h[3] * h[1]
    if disc < 0.0:
        if disc < -DISC_SLACK * scale * scale:
            branch[0] = 2
            return end_lam
        disc = 0.0
    root = sqrt(disc)
    if h[2] > 0.0:
        lam = -h[1] / (h[2] + root)
    else:
        lam = (root - h[2]) / (3.0 * h[3])
    if 0.0 < lam < 1.0 and _poly(h, lam) <= end_val:
        branch[0] = 0
        return lam
    branch[0] = 2
    return end_lam


cdef inline void _partials(double lam, double a00, double a01, double a11,
                           double d0, double d1, double b00, double b01, double b11,
                           double* out) noexcept nogil:
    cdef double e00 = lam * a00 + (1.0 - lam) * b00
    cdef double e01 = lam * a01 + (1.0 - lam) * b01
    cdef double e11 = lam * a11 + (1.0 - lam) * b11
    cdef double q = e00 * e11 - e01 * e01
    cdef double g0 = a00 * d0 + a01 * d1
    cdef double g1 = a01 * d0 + a11 * d1
    cdef double c = 1.0 - lam * (d0 * g0 + d1 * g1)
    cdef double u0 = lam * g0
    cdef double u1 = lam * g1
    cdef double r0 = e11 * u0 - e01 * u1
    cdef double r1 = -e01 * u0 + e00 * u1
    cdef double t0 = r0 - q * d0
    cdef double t1 = r1 - q * d1
    out[0] = 2.0 * lam * (a00 * t0 + a01 * t1)
    out[1] = 2.0 * lam * (a01 * t0 + a11 * t1)
    out[2] = lam * (c * e11 - q * d0 * d0 + 2.0 * r0 * d0 + u1 * u1)
    out[3] = lam * (-2.0 * c * e01 - 2.0 * q * d0 * d1
                    + 2.0 * (r0 * d1 + r1 * d0) - 2.0 * u0 * u1)
    out[4] = lam * (c * e00 - q * d1 * d1 + 2.0 * r1 * d1 + u0 * u0)


def cubic2(double a00, double a01, double a11, double v0, double v1,
           double b00, double b01, double b11, double w0, double w1):
    cdef double h[4]
    _cubic2(a00, a01, a11, v0, v1, b00, b01, b11, w0, w1, h)
    return h[0], h[1], h[2], h[3]


def minimize_cubic(double h0, double h1, double h2, double h3):
    cdef double h[4]
    cdef int branch = 0
    h[0] = h0
    h[1] = h1
    h[2] = h2
    h[3] = h3
    cdef double lam = _minimize(h, &branch)
    return lam, branch


def kappa2(double a00, double a01, double a11, double v0, double v1,
           double b00, double b01, double b11, double w0, double w1):
    cdef double h[4]
    cdef int branch = 0
    _cubic2(a00, a01, a11, v0, v1, b00, b01, b11, w0, w1, h)
    cdef double lam = _minimize(h, &branch)
    return lam, _poly(h, lam), branch


def kappa2_partials(double a00, double a01, double a11, double v0, double v1,
                    double b00, double b01, double b11, double w0, double w1):
    cdef double h[4]
    cdef double p[5]
    cdef int branch = 0
    _cubic2(a00, a01, a11, v0, v1, b00, b01, b11, w0, w1, h)
    cdef double lam = _minimize(h, &branch)
    _partials(lam, a00, a01, a11, v0 - w0, v1 - w1, b00, b01, b11, p)
    return lam, _poly(h, lam), branch, p[0], p[1], p[2], p[3], p[4]


cdef inline void _shape(double a, double b, double theta, double* m) noexcept nogil:
    cdef double al = 1.0 / (a * a)
    cdef double be = 1.0 / (b * b)
    cdef double c = cos(theta)
    cdef double s = sin(theta)
    m[0] = al * c * c + be * s * s
    m[1] = (al - be) * c * s
    m[2] = al * s * s + be * c * c
    m[3] = 2.0 * c * s * (be - al)
    m[4] = (al - be) * (c * c - s * s)
    m[5] = -m[3]


def shape_matrix(double a, double b, double theta):
    cdef double m[6]
    _shape(a, b, theta, m)
    return m[0], m[1], m[2], m[3], m[4], m[5]


cdef void _step(int family, double dt, double* x, double* u, double* out,
                double* jx, double* ju, bint want) noexcept nogil:
    # jx is 3x3 row-major, ju is 3xnu row-major
    cdef int i, j
    cdef double th, v, om, a, phi, sa, length, cp, sp, dsa, dl, a2, c, s, hdt2
    if family == 0:
        out[0] = x[0] + dt * u[0]
        out[1] = x[1] + dt * u[1]
        out[2] = x[2] + dt * u[2]
        if want:
            for i in range(3):
                for j in range(3):
                    jx[i * 3 + j] = 1.0 if i == j else 0.0
                    ju[i * 3 + j] = dt if i == j else 0.0
        return
    th = x[2]
    v = u[0]
    om = u[1]
    out[2] = th + om * dt
    if fabs(om) > OMEGA_EPS:
        a = 0.5 * om * dt
        phi = th + a
        sa = sin(a) / a
        length = v * dt * sa
        cp = cos(phi)
        sp = sin(phi)
        out[0] = x[0] + length * cp
        out[1] = x[1] + length * sp
        if want:
            if fabs(a) < 1e-2:
                a2 = a * a
                dsa = a * (-1.0 / 3.0 + a2 * (1.0 / 30.0 - a2 / 840.0))
            else:
                dsa = (a * cos(a) - sin(a)) / (a * a)
            dl = v * dt * dsa * 0.5 * dt
            jx[0] = 1.0
            jx[1] = 0.0
            jx[2] = -length * sp
            jx[3] = 0.0
            jx[4] = 1.0
            jx[5] = length * cp
            jx[6] = 0.0
            jx[7] = 0.0
            jx[8] = 1.0
            ju[0] = dt * sa * cp
            ju[1] = dl * cp - length * sp * 0.5 * dt
            ju[2] = dt * sa * sp
            ju[3] = dl * sp + length * cp * 0.5 * dt
            ju[4] = 0.0
            ju[5] = dt
        return
    c = cos(th)
    s = sin(th)
    hdt2 = 0.5 * dt * dt
    out[0] = x[0] + v * dt * c - v * om * hdt2 * s
    out[1] = x[1] + v * dt * s + v * om * hdt2 * c
    if want:
        jx[0] = 1.0
        jx[1] = 0.0
        jx[2] = -v * dt * s - v * om * hdt2 * c
        jx[3] = 0.0
        jx[4] = 1.0
        jx[5] = v * dt * c - v * om * hdt2 * s
        jx[6] = 0.0
        jx[7] = 0.0
        jx[8] = 1.0
        ju[0] = dt * c - om * hdt2 * s
        ju[1] = -v * hdt2 * s
        ju[2] = dt * s + om * hdt2 * c
        ju[3] = v * hdt2 * c
        ju[4] = 0.0
        ju[5] = dt


def step(int family, double dt, x, u):
    cdef double xx[3]
    cdef double uu[3]
    cdef double out[3]
    cdef int nu = 3 if family == 0 else 2
    cdef int i
    for i in range(3):
        xx[i] = x[i]
    for i in range(nu):
        uu[i] = u[i]
    _step(family, dt, xx, uu, out, NULL, NULL, False)
    return np.array([out[0], out[1], out[2]])


def step_jacobians(int family, double dt, x, u):
    cdef double xx[3]
    cdef double uu[3]
    cdef double out[3]
    cdef int nu = 3 if family == 0 else 2
    cdef int i
    jx = np.zeros((3, 3))
    ju = np.zeros((3, nu))
    cdef double[:, ::1] jxv = jx
    cdef double[:, ::1] juv = ju
    for i in range(3):
        xx[i] = x[i]
    for i in range(nu):
        uu[i] = u[i]
    _step(family, dt, xx, uu, out, &jxv[0, 0], &juv[0, 0], True)
    return np.array([out[0], out[1], out[2]]), jx, ju


cdef void _rollout(int family, double dt, const double[::1] x0, const double[::1] z,
                   int horizon, double[:, ::1] xs, double[:, ::1] jxs,
                   double[:, ::1] jus, bint want) noexcept nogil:
    cdef int nu = 3 if family == 0 else 2
    cdef int k
    xs[0, 0] = x0[0]
    xs[0, 1] = x0[1]
    xs[0, 2] = x0[2]
    for k in range(horizon):
        if want:
            _step(family, dt, &xs[k, 0], <double*> &z[k * nu], &xs[k + 1, 0],
                  &jxs[k, 0], &jus[k, 0], True)
        else:
            _step(family, dt, &xs[k, 0], <double*> &z[k * nu], &xs[k + 1, 0],
                  NULL, NULL, False)


def rollout(int family, double dt, const double[::1] x0, const double[::1] z,
            int horizon):
    xs = np.empty((horizon + 1, 3))
    _rollout(family, dt, x0, z, horizon, xs, None, None, False)
    return xs


cdef inline double _ipow(double x, int e) noexcept nogil:
    cdef double r = 1.0
    cdef int i
    for i in range(e):
        r *= x
    return r


cdef double _stage(double* vals, int n, const double[::1] w, const long[::1] e,
                   double* grad) noexcept nogil:
    cdef double total = 0.0
    cdef double xp
    cdef int i
    for i in range(n):
        xp = _ipow(vals[i], e[i] - 1)
        total += w[i] * xp * vals[i]
        if grad != NULL:
            grad[i] = w[i] * e[i] * xp
    return total


cdef double _backward(int family, int horizon, double[:, ::1] xs, const double[::1] z,
                      double[:, ::1] jxs, double[:, ::1] jus,
                      const double[::1] qw, const long[::1] qe,
                      const double[::1] rw, const long[::1] re,
                      double[:, ::1] lam_x, double[::1] grad) noexcept nogil:
    cdef int nu = 3 if family == 0 else 2
    cdef double gx[3]
    cdef double gu[3]
    cdef double adj[3]
    cdef double nadj[3]
    cdef double acc, cost
    cdef int k, i, j
    cost = _stage(&xs[horizon, 0], 3, qw, qe, gx)
    for i in range(3):
        adj[i] = gx[i] + lam_x[horizon, i]
    for k in range(horizon - 1, -1, -1):
        cost += _stage(&xs[k, 0], 3, qw, qe, gx)
        cost += _stage(<double*> &z[k * nu], nu, rw, re, gu)
        for j in range(nu):
            acc = gu[j]
            for i in range(3):
                acc += jus[k, i * nu + j] * adj[i]
            grad[k * nu + j] = acc
        for j in range(3):
            acc = gx[j] + lam_x[k, j]
            for i in range(3):
                acc += jxs[k, i * 3 + j] * adj[i]
            nadj[j] = acc
        for i in range(3):
            adj[i] = nadj[i]
    return cost


def cost_grad(int family, double dt, const double[::1] x0, const double[::1] z,
              int horizon, const double[::1] qw, const long[::1] qe,
              const double[::1] rw, const long[::1] re):
    cdef int nu = 3 if family == 0 else 2
    xs = np.empty((horizon + 1, 3))
    jxs = np.empty((max(horizon, 1), 9))
    jus = np.empty((max(horizon, 1), 3 * nu))
    lam_x = np.zeros((horizon + 1, 3))
    grad = np.zeros(horizon * nu)
    _rollout(family, dt, x0, z, horizon, xs, jxs, jus, True)
    cost = _backward(family, horizon, xs, z, jxs, jus, qw, qe, rw, re, lam_x, grad)
    return cost, grad


cdef inline double _kappa_pose(double* x, double ra, double rb,
                               const double[:, ::1] obs, int i,
                               double* g) noexcept nogil:
    # returns kappa; fills g[0:3] with pose gradient when g != NULL
    cdef double m[6]
    cdef double h[4]
    cdef double p[5]
    cdef int branch = 0
    cdef double lam
    _shape(ra, rb, x[2], m)
    _cubic2(m[0], m[1], m[2], x[0], x[1],
            obs[i, 0], obs[i, 1], obs[i, 2], obs[i, 3], obs[i, 4], h)
    lam = _minimize(h, &branch)
    if g != NULL:
        _partials(lam, m[0], m[1], m[2], x[0] - obs[i, 3], x[1] - obs[i, 4],
                  obs[i, 0], obs[i, 1], obs[i, 2], p)
        g[0] = p[0]
        g[1] = p[1]
        g[2] = p[2] * m[3] + p[3] * m[4] + p[4] * m[5]
    return _poly(h, lam)


def constraints(int family, double dt, const double[::1] x0, const double[::1] z,
                int horizon, ab, const double[:, ::1] obstacles, bint want_jac):
    cdef int nu = 3 if family == 0 else 2
    cdef int nobs = obstacles.shape[0]
    cdef int nz = horizon * nu
    cdef int k, i, j, r, c
    cdef double ra = ab[0]
    cdef double rb = ab[1]
    cdef double g[3]
    cdef double acc
    xs = np.empty((horizon + 1, 3))
    jxs = np.empty((max(horizon, 1), 9))
    jus = np.empty((max(horizon, 1), 3 * nu))
    vals = np.zeros((horizon + 1, nobs))
    cdef double[:, ::1] xv = xs
    cdef double[:, ::1] jxv = jxs
    cdef double[:, ::1] juv = jus
    cdef double[:, ::1] vv = vals
    cdef double[:, ::1] jv
    cdef double[:, ::1] sv
    cdef double[:, ::1] tv
    _rollout(family, dt, x0, z, horizon, xv, jxv, juv, want_jac)
    if not want_jac:
        for k in range(horizon + 1):
            for i in range(nobs):
                vv[k, i] = _kappa_pose(&xv[k, 0], ra, rb, obstacles, i, NULL)
        return vals, None
    jac = np.zeros(((horizon + 1) * nobs, max(nz, 0)))
    sens = np.zeros((3, max(nz, 1)))
    tmp = np.zeros((3, max(nz, 1)))
    jv = jac
    sv = sens
    tv = tmp
    for k in range(horizon + 1):
        if k > 0:
            for r in range(3):
                for c in range(nz):
                    acc = 0.0
                    for j in range(3):
                        acc += jxv[k - 1, r * 3 + j] * sv[j, c]
                    tv[r, c] = acc
            for r in range(3):
                for c in range(nz):
                    sv[r, c] = tv[r, c]
                for j in range(nu):
                    sv[r, (k - 1) * nu + j] += juv[k - 1, r * nu + j]
        for i in range(nobs):
            if k > 0:
                vv[k, i] = _kappa_pose(&xv[k, 0], ra, rb, obstacles, i, g)
                for c in range(nz):
                    jv[k * nobs + i, c] = g[0] * sv[0, c] + g[1] * sv[1, c] + g[2] * sv[2, c]
            else:
                vv[k, i] = _kappa_pose(&xv[k, 0], ra, rb, obstacles, i, NULL)
    return vals, jac


def al_value_grad(int family, double dt, const double[::1] x0, const double[::1] z,
                  int horizon, const double[::1] qw, const long[::1] qe,
                  const double[::1] rw, const long[::1] re, ab,
                  const double[:, ::1] obstacles, double eps,
                  const double[:, ::1] mu, double rho, const double[::1] scales):
    cdef int nu = 3 if family == 0 else 2
    cdef int nobs = obstacles.shape[0]
    cdef int k, i
    cdef double ra = ab[0]
    cdef double rb = ab[1]
    cdef double g[3]
    cdef double kap, m, t, w, sc, pen = 0.0, cost
    xs = np.empty((horizon + 1, 3))
    jxs = np.empty((max(horizon, 1), 9))
    jus = np.empty((max(horizon, 1), 3 * nu))
    vals = np.zeros((horizon + 1, nobs))
    lam_x = np.zeros((horizon + 1, 3))
    grad = np.zeros(horizon * nu)
    cdef double[:, ::1] xv = xs
    cdef double[:, ::1] vv = vals
    cdef double[:, ::1] lv = lam_x
    _rollout(family, dt, x0, z, horizon, xv, jxs, jus, True)
    with nogil:
        for k in range(horizon + 1):
            for i in range(nobs):
                m = mu[k, i]
                kap = _kappa_pose(&xv[k, 0], ra, rb, obstacles, i, NULL)
                vv[k, i] = kap
                sc = scales[i]
                t = sc * (kap + eps) + m / rho
                pen -= m * m / (2.0 * rho)
                if t > 0.0:
                    pen += 0.5 * rho * t * t
                    if k > 0:
                        _kappa_pose(&xv[k, 0], ra, rb, obstacles, i, g)
                        w = rho * t * sc
                        lv[k, 0] += w * g[0]
                        lv[k, 1] += w * g[1]
                        lv[k, 2] += w * g[2]
    cost = _backward(family, horizon, xv, z, jxs, jus, qw, qe, rw, re, lv, grad)
    return cost + pen, grad, vals
