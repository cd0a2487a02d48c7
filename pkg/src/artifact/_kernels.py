"""Compiled adaptive integrators for ``i da/dt = (1/2) M(t) a``.

``M(t) = M0 + D(t)`` where ``M0`` is constant and ``D`` only couples levels 0
and 1 through the pulse envelope (``D[0,1] = Omega``, ``D[1,0] = conj(Omega)``).
Both integrators emit samples on a caller-supplied output lattice through their
dense output and accumulate ``int |a_i|^2 dt`` for every level, integrating the
dense-output polynomial exactly with 4-point Gauss-Legendre.

Status codes: 0 ok, 1 step size underflow, 2 step budget exhausted.
"""

import math

import numpy as np
from numba import njit

S6 = math.sqrt(6.0)

# Radau IIA, 3 stages, order 5
RADAU_C = np.array([(4.0 - S6) / 10.0, (4.0 + S6) / 10.0, 1.0])
RADAU_A = np.array(
    [
        [(88.0 - 7.0 * S6) / 360.0, (296.0 - 169.0 * S6) / 1800.0, (-2.0 + 3.0 * S6) / 225.0],
        [(296.0 + 169.0 * S6) / 1800.0, (88.0 + 7.0 * S6) / 360.0, (-2.0 - 3.0 * S6) / 225.0],
        [(16.0 - S6) / 36.0, (16.0 + S6) / 36.0, 1.0 / 9.0],
    ]
)
# embedded third-order error estimate (Hairer & Wanner)
RADAU_E = np.array([-13.0 - 7.0 * S6, -13.0 + 7.0 * S6, -1.0]) / 3.0
RADAU_MU = 3.0 + 3.0 ** (2.0 / 3.0) - 3.0 ** (1.0 / 3.0)
RADAU_NODES = np.array([0.0, RADAU_C[0], RADAU_C[1], 1.0])

# Dormand-Prince 5(4)
DP_C = np.array([0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0])
DP_A = np.array(
    [
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    ]
)
DP_B = np.array([35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0])
DP_E = np.array(
    [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0]
)

GL_X = np.array(
    [-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526]
)
GL_W = np.array([0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538])

SAFETY = 0.9
MAX_FACTOR = 10.0
MIN_FACTOR = 0.2


@njit(cache=True)
def envelope(pp, t):
    sigma1, sigma2, tau, t_hold, omega_max, theta0, theta1 = pp[0], pp[1], pp[2], pp[3], pp[4], pp[5], pp[6]
    if t < tau:
        x = (t - tau) / sigma1
        mag = omega_max * math.exp(-0.5 * x * x)
    elif t <= tau + t_hold:
        mag = omega_max
    else:
        x = (t - tau - t_hold) / sigma2
        mag = omega_max * math.exp(-0.5 * x * x)
    phase = theta0 + theta1 * t
    return mag * complex(math.cos(phase), math.sin(phase))


@njit(cache=True)
def fill_generator(out, m0, pp, t):
    """out = -(i/2) M(t), so that da/dt = out @ a."""
    n = m0.shape[0]
    for i in range(n):
        for j in range(n):
            out[i, j] = -0.5j * m0[i, j]
    om = envelope(pp, t)
    out[0, 1] += -0.5j * om
    out[1, 0] += -0.5j * om.conjugate()


@njit(cache=True)
def _lagrange4(nodes, theta, w):
    for k in range(4):
        v = 1.0
        for m in range(4):
            if m != k:
                v *= (theta - nodes[m]) / (nodes[k] - nodes[m])
        w[k] = v


@njit(cache=True)
def _radau_eval(nodes, U, theta, w, out):
    _lagrange4(nodes, theta, w)
    n = out.shape[0]
    for i in range(n):
        out[i] = w[0] * U[0, i] + w[1] * U[1, i] + w[2] * U[2, i] + w[3] * U[3, i]


@njit(cache=True)
def _radau_sq_integral(nodes, U, theta, w, tmp, acc):
    """acc[i] = int_0^theta |u_i|^2 dtheta' for the collocation polynomial."""
    n = acc.shape[0]
    for i in range(n):
        acc[i] = 0.0
    half = 0.5 * theta
    for g in range(4):
        _radau_eval(nodes, U, half * (1.0 + GL_X[g]), w, tmp)
        for i in range(n):
            acc[i] += half * GL_W[g] * (tmp[i].real * tmp[i].real + tmp[i].imag * tmp[i].imag)


@njit(cache=True)
def radau_linear(m0, pp, y0, t0, t1, tol, hmax, out_t, max_steps):
    n = y0.shape[0]
    nout = out_t.shape[0]
    ys = np.zeros((nout, n), dtype=np.complex128)
    loss = np.zeros((nout, n), dtype=np.float64)
    cum = np.zeros(n, dtype=np.float64)
    part = np.zeros(n, dtype=np.float64)
    tmp = np.zeros(n, dtype=np.complex128)
    w = np.zeros(4, dtype=np.float64)
    U = np.zeros((4, n), dtype=np.complex128)
    G = np.zeros((3, n, n), dtype=np.complex128)
    J = np.zeros((n, n), dtype=np.complex128)
    K = np.zeros((3 * n, 3 * n), dtype=np.complex128)
    rhs = np.zeros(3 * n, dtype=np.complex128)
    L = np.zeros((n, n), dtype=np.complex128)
    v = np.zeros(n, dtype=np.complex128)
    ynew = np.zeros(n, dtype=np.complex128)

    y = y0.copy()
    k = 0
    while k < nout and out_t[k] <= t0:
        ys[k] = y
        k += 1

    span = t1 - t0
    hmin = 1e-13 * max(abs(t0), abs(t1), span)
    t = t0
    h = min(hmax, 1e-3 * span)
    steps = 0
    rejected = False
    while t < t1:
        last = False
        if t + h >= t1 - 1e-12 * span:
            h = t1 - t
            last = True
        for s in range(3):
            fill_generator(G[s], m0, pp, t + RADAU_C[s] * h)
        for s in range(3):
            for r in range(3):
                for i in range(n):
                    for j in range(n):
                        val = -h * RADAU_A[s, r] * G[r, i, j]
                        if s == r and i == j:
                            val += 1.0
                        K[s * n + i, r * n + j] = val
            for i in range(n):
                acc = 0.0j
                for r in range(3):
                    gy = 0.0j
                    for j in range(n):
                        gy += G[r, i, j] * y[j]
                    acc += h * RADAU_A[s, r] * gy
                rhs[s * n + i] = acc
        Z = np.linalg.solve(K, rhs)
        fill_generator(J, m0, pp, t)
        for i in range(n):
            ynew[i] = y[i] + Z[2 * n + i]
            fy = 0.0j
            for j in range(n):
                fy += J[i, j] * y[j]
                L[i, j] = -J[i, j]
            L[i, i] += RADAU_MU / h
            ze = (RADAU_E[0] * Z[i] + RADAU_E[1] * Z[n + i] + RADAU_E[2] * Z[2 * n + i]) / h
            v[i] = fy + ze
        err = np.linalg.solve(L, v)
        en = 0.0
        for i in range(n):
            en = max(en, abs(err[i]) / tol)
        if rejected and en > 1.0:
            for i in range(n):
                tmp[i] = y[i] + err[i]
            for i in range(n):
                fy = 0.0j
                for j in range(n):
                    fy += J[i, j] * tmp[j]
                ze = (RADAU_E[0] * Z[i] + RADAU_E[1] * Z[n + i] + RADAU_E[2] * Z[2 * n + i]) / h
                v[i] = fy + ze
            err = np.linalg.solve(L, v)
            en = 0.0
            for i in range(n):
                en = max(en, abs(err[i]) / tol)

        if en <= 1.0:
            for i in range(n):
                U[0, i] = y[i]
                U[1, i] = y[i] + Z[i]
                U[2, i] = y[i] + Z[n + i]
                U[3, i] = ynew[i]
            t_next = t1 if last else t + h
            while k < nout and (out_t[k] <= t_next or last):
                theta = min(1.0, (out_t[k] - t) / h)
                _radau_eval(RADAU_NODES, U, theta, w, tmp)
                ys[k] = tmp
                _radau_sq_integral(RADAU_NODES, U, theta, w, tmp, part)
                for i in range(n):
                    loss[k, i] = cum[i] + h * part[i]
                k += 1
            _radau_sq_integral(RADAU_NODES, U, 1.0, w, tmp, part)
            for i in range(n):
                cum[i] += h * part[i]
                y[i] = ynew[i]
            t = t_next
            steps += 1
            rejected = False
            if en == 0.0:
                factor = MAX_FACTOR
            else:
                factor = min(MAX_FACTOR, SAFETY * en ** -0.25)
            h = min(hmax, h * factor)
        else:
            rejected = True
            h *= max(MIN_FACTOR, SAFETY * en ** -0.25)
        if h < hmin:
            return ys, loss, steps, 1
        if steps >= max_steps:
            return ys, loss, steps, 2
    return ys, loss, steps, 0


@njit(cache=True)
def _hermite_eval(y0, f0, y1, f1, h, theta, out):
    t2 = theta * theta
    t3 = t2 * theta
    h00 = 2.0 * t3 - 3.0 * t2 + 1.0
    h10 = t3 - 2.0 * t2 + theta
    h01 = -2.0 * t3 + 3.0 * t2
    h11 = t3 - t2
    for i in range(out.shape[0]):
        out[i] = h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i]


@njit(cache=True)
def _hermite_sq_integral(y0, f0, y1, f1, h, theta, tmp, acc):
    n = acc.shape[0]
    for i in range(n):
        acc[i] = 0.0
    half = 0.5 * theta
    for g in range(4):
        _hermite_eval(y0, f0, y1, f1, h, half * (1.0 + GL_X[g]), tmp)
        for i in range(n):
            acc[i] += half * GL_W[g] * (tmp[i].real * tmp[i].real + tmp[i].imag * tmp[i].imag)


@njit(cache=True)
def _matvec(G, y, out):
    n = y.shape[0]
    for i in range(n):
        acc = 0.0j
        for j in range(n):
            acc += G[i, j] * y[j]
        out[i] = acc


@njit(cache=True)
def dopri5_linear(m0, pp, y0, t0, t1, tol, hmax, out_t, max_steps):
    n = y0.shape[0]
    nout = out_t.shape[0]
    ys = np.zeros((nout, n), dtype=np.complex128)
    loss = np.zeros((nout, n), dtype=np.float64)
    cum = np.zeros(n, dtype=np.float64)
    part = np.zeros(n, dtype=np.float64)
    tmp = np.zeros(n, dtype=np.complex128)
    G = np.zeros((n, n), dtype=np.complex128)
    Ks = np.zeros((7, n), dtype=np.complex128)
    ynew = np.zeros(n, dtype=np.complex128)
    f1 = np.zeros(n, dtype=np.complex128)

    y = y0.copy()
    k = 0
    while k < nout and out_t[k] <= t0:
        ys[k] = y
        k += 1

    span = t1 - t0
    hmin = 1e-13 * max(abs(t0), abs(t1), span)
    t = t0
    h = min(hmax, 1e-4 * span)
    fill_generator(G, m0, pp, t)
    _matvec(G, y, Ks[0])
    steps = 0
    while t < t1:
        last = False
        if t + h >= t1 - 1e-12 * span:
            h = t1 - t
            last = True
        for s in range(1, 6):
            for i in range(n):
                acc = y[i]
                for r in range(s):
                    acc += h * DP_A[s, r] * Ks[r, i]
                tmp[i] = acc
            fill_generator(G, m0, pp, t + DP_C[s] * h)
            _matvec(G, tmp, Ks[s])
        for i in range(n):
            acc = y[i]
            for r in range(6):
                acc += h * DP_B[r] * Ks[r, i]
            ynew[i] = acc
        fill_generator(G, m0, pp, t + h)
        _matvec(G, ynew, Ks[6])
        en = 0.0
        for i in range(n):
            e = 0.0j
            for r in range(7):
                e += h * DP_E[r] * Ks[r, i]
            en = max(en, abs(e) / tol)
        if en <= 1.0:
            for i in range(n):
                f1[i] = Ks[6, i]
            t_next = t1 if last else t + h
            while k < nout and (out_t[k] <= t_next or last):
                theta = min(1.0, (out_t[k] - t) / h)
                _hermite_eval(y, Ks[0], ynew, f1, h, theta, tmp)
                ys[k] = tmp
                _hermite_sq_integral(y, Ks[0], ynew, f1, h, theta, tmp, part)
                for i in range(n):
                    loss[k, i] = cum[i] + h * part[i]
                k += 1
            _hermite_sq_integral(y, Ks[0], ynew, f1, h, 1.0, tmp, part)
            for i in range(n):
                cum[i] += h * part[i]
                y[i] = ynew[i]
                Ks[0, i] = f1[i]
            t = t_next
            steps += 1
            if en == 0.0:
                factor = MAX_FACTOR
            else:
                factor = min(MAX_FACTOR, SAFETY * en ** -0.2)
            h = min(hmax, h * factor)
        else:
            h *= max(MIN_FACTOR, SAFETY * en ** -0.2)
        if h < hmin:
            return ys, loss, steps, 1
        if steps >= max_steps:
            return ys, loss, steps, 2
    return ys, loss, steps, 0
