"""Numerical kernels for the classical trajectory and quantum propagation.

The inner loops are written as plain Python/NumPy and compiled with numba's
@njit when available.  Set ROTCOOL_NO_NUMBA=1 to force the uncompiled path
(same source, same results, much slower); `numba_enabled()` reports which
path is active.

The quantum propagator works in the interaction picture of the free rotor:
psi_n(t) = exp(-i E0_n t) phi_n(t).  The free-rotor phases are absorbed into
the coupling matrix elements, so far from the collision the right-hand side
vanishes and the adaptive integrator takes large steps.

Integrator: adaptive Dormand-Prince RK5(4).  The planar two-body Coulomb
motion (r, p_r, beta) is co-integrated with the quantum amplitudes so that
field and orientation are available at every internal stage time.

Status codes: 0 ok, 1 step budget exhausted, 2 step-size underflow.
"""

from __future__ import annotations

import math
import os

import numpy as np

_DISABLE = os.environ.get("ROTCOOL_NO_NUMBA", "").lower() in ("1", "true", "yes")
_HAVE_NUMBA = False
if not _DISABLE:
    try:
        from numba import njit as _njit
        _HAVE_NUMBA = True
    except ImportError:
        pass

if _HAVE_NUMBA:
    def _jit(func):
        return _njit(cache=True, nogil=True)(func)
else:
    def _jit(func):
        return func


def numba_enabled() -> bool:
    return _HAVE_NUMBA


# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = np.zeros((7, 7))
_A[1, 0] = 1 / 5
_A[2, :2] = (3 / 40, 9 / 40)
_A[3, :3] = (44 / 45, -56 / 15, 32 / 9)
_A[4, :4] = (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729)
_A[5, :5] = (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656)
_A[6, :6] = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84)
_B5 = _A[6].copy()
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640,
                -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - np.append(_B4[:6], _B4[6])

STATUS_OK = 0
STATUS_MAX_STEPS = 1
STATUS_DT_UNDERFLOW = 2


def _classical_extent(E, b, mu, r0, r_stop, t_min, rtol, max_steps):
    """Integrate the planar Coulomb motion from closest approach outward.

    Starts at t = 0 with r = r0, p_r = 0, beta = 0 (beta measured relative to
    its value at closest approach) and runs until r >= r_stop and t >= t_min.
    Returns (status, t, r, pr, beta).
    """
    L = b * math.sqrt(2.0 * mu * E)
    p_inf = math.sqrt(2.0 * mu * E)
    t = 0.0
    r = r0
    pr = 0.0
    beta = 0.0
    t_char = r0 / (p_inf / mu)
    dt = 1e-3 * t_char
    kr = np.zeros(7)
    kp = np.zeros(7)
    kb = np.zeros(7)
    for _ in range(max_steps):
        if r >= r_stop and t >= t_min:
            return STATUS_OK, t, r, pr, beta
        for s in range(7):
            rs = r
            ps = pr
            for j in range(s):
                rs += dt * _A[s, j] * kr[j]
                ps += dt * _A[s, j] * kp[j]
            kr[s] = ps / mu
            kp[s] = 1.0 / (rs * rs) + L * L / (mu * rs * rs * rs)
            kb[s] = L / (mu * rs * rs)
        rn = r
        pn = pr
        bn = beta
        er = 0.0
        ep = 0.0
        eb = 0.0
        for s in range(7):
            rn += dt * _B5[s] * kr[s]
            pn += dt * _B5[s] * kp[s]
            bn += dt * _B5[s] * kb[s]
            er += dt * _E[s] * kr[s]
            ep += dt * _E[s] * kp[s]
            eb += dt * _E[s] * kb[s]
        sc_r = rtol * max(abs(r), abs(rn))
        sc_p = rtol * max(max(abs(pr), abs(pn)), 1e-3 * p_inf)
        sc_b = rtol * max(max(abs(beta), abs(bn)), 1e-3)
        err = math.sqrt(((er / sc_r) ** 2 + (ep / sc_p) ** 2 + (eb / sc_b) ** 2) / 3.0)
        if err <= 1.0:
            t += dt
            r = rn
            pr = pn
            beta = bn
        fac = 0.9 * err ** -0.2 if err > 0 else 10.0
        dt *= min(10.0, max(0.2, fac))
        if dt < 1e-14 * t_char:
            return STATUS_DT_UNDERFLOW, t, r, pr, beta
    return STATUS_MAX_STEPS, t, r, pr, beta


def _sample_classical(E, b, mu, r_init, pr_init, beta_init, ts, rtol, max_steps):
    """Integrate the classical motion from ts[0], landing exactly on each output time.

    Initial conditions are the state at ts[0].  Returns (status, r_out,
    pr_out, beta_out) sampled at `ts` (ascending).
    """
    L = b * math.sqrt(2.0 * mu * E)
    p_inf = math.sqrt(2.0 * mu * E)
    n_out = len(ts)
    r_out = np.empty(n_out)
    pr_out = np.empty(n_out)
    beta_out = np.empty(n_out)
    t = ts[0]
    r = r_init
    pr = pr_init
    beta = beta_init
    r_out[0] = r
    pr_out[0] = pr
    beta_out[0] = beta
    t_char = (1.0 / E) / (p_inf / mu)
    dt = 1e-3 * t_char
    kr = np.zeros(7)
    kp = np.zeros(7)
    kb = np.zeros(7)
    idx = 1
    steps = 0
    while idx < n_out:
        if steps >= max_steps:
            return STATUS_MAX_STEPS, r_out, pr_out, beta_out
        steps += 1
        h = dt
        clipped = False
        if t + h >= ts[idx]:
            h = ts[idx] - t
            clipped = True
        for s in range(7):
            rs = r
            ps = pr
            for j in range(s):
                rs += h * _A[s, j] * kr[j]
                ps += h * _A[s, j] * kp[j]
            kr[s] = ps / mu
            kp[s] = 1.0 / (rs * rs) + L * L / (mu * rs * rs * rs)
            kb[s] = L / (mu * rs * rs)
        rn = r
        pn = pr
        bn = beta
        er = 0.0
        ep = 0.0
        eb = 0.0
        for s in range(7):
            rn += h * _B5[s] * kr[s]
            pn += h * _B5[s] * kp[s]
            bn += h * _B5[s] * kb[s]
            er += h * _E[s] * kr[s]
            ep += h * _E[s] * kp[s]
            eb += h * _E[s] * kb[s]
        sc_r = rtol * max(abs(r), abs(rn))
        sc_p = rtol * max(max(abs(pr), abs(pn)), 1e-3 * p_inf)
        sc_b = rtol * max(max(abs(beta), abs(bn)), 1e-3)
        err = math.sqrt(((er / sc_r) ** 2 + (ep / sc_p) ** 2 + (eb / sc_b) ** 2) / 3.0)
        if err <= 1.0:
            t += h
            r = rn
            pr = pn
            beta = bn
            if clipped and abs(t - ts[idx]) < 1e-9 * max(abs(t), 1.0):
                r_out[idx] = r
                pr_out[idx] = pr
                beta_out[idx] = beta
                idx += 1
        fac = 0.9 * err ** -0.2 if err > 0 else 10.0
        # base the next step on the step actually attempted: after a clipped
        # step the stale dt could grow without bound and deadlock on rejection
        dt = h * min(10.0, max(0.2, fac))
        if dt < 1e-14 * t_char:
            return STATUS_DT_UNDERFLOW, r_out, pr_out, beta_out
    return STATUS_OK, r_out, pr_out, beta_out


# field models
FIELD_EXACT = 0
FIELD_LORENTZIAN = 1

# coupling modes
MODE_POLAR = 0
MODE_APOLAR = 1


def _propagate(psi0, E0, rows, cols, vals, op_of, mode, par,
               field_model, eps0, tau, E, b, mu,
               t0, t1, r_init, pr_init, beta_init,
               rtol, atol, max_steps,
               record, j_of, n_j, trace_t, trace_p):
    """Propagate rotor amplitudes across one collision (interaction picture).

    psi0:       complex amplitudes at t0 (interaction picture)
    E0:         free-rotor energies B J(J+1), diagonal removed from H
    rows/cols/vals/op_of: stacked sparse coupling matrices; op_of labels which
                operator each entry belongs to (polar: 0 = cos(theta),
                1 = sin(theta)cos(phi); apolar: 0 = cos^2, 1 = cos sin cos(phi),
                2 = sin^2 cos^2(phi))
    par:        polar -> [D]; apolar -> [delta_alpha, alpha_perp, Q_Z]
    field_model: FIELD_EXACT uses eps = 1/r^2 and the integrated beta(t);
                FIELD_LORENTZIAN uses the pulse model with beta frozen at 0
    t0 -> t1:   may run backwards (t1 < t0)
    record:     store per-accepted-step time and per-J populations

    Returns (status, n_steps, n_trace, psi, r, pr, beta, norm_dev).
    """
    dim = len(psi0)
    nnz = len(vals)
    L = b * math.sqrt(2.0 * mu * E)
    p_inf = math.sqrt(2.0 * mu * E)
    direction = 1.0 if t1 >= t0 else -1.0
    span = abs(t1 - t0)
    cap = len(trace_t)

    psi = psi0.copy()
    t = t0
    r = r_init
    pr = pr_init
    beta = beta_init

    k_psi = np.zeros((7, dim), dtype=np.complex128)
    kr = np.zeros(7)
    kp = np.zeros(7)
    kb = np.zeros(7)
    dpsi = np.zeros(dim, dtype=np.complex128)

    dt = direction * min(1e-3 * tau, span)
    n_steps = 0
    n_trace = 0
    norm_dev = 0.0

    if record and cap > 0:
        trace_t[0] = t
        for jj in range(n_j):
            trace_p[0, jj] = 0.0
        for i in range(dim):
            trace_p[0, j_of[i]] += psi[i].real ** 2 + psi[i].imag ** 2
        n_trace = 1

    while direction * (t1 - t) > 0.0:
        if n_steps >= max_steps:
            return STATUS_MAX_STEPS, n_steps, n_trace, psi, r, pr, beta, norm_dev
        n_steps += 1
        h = dt
        if direction * (t + h - t1) > 0.0:
            h = t1 - t
        for s in range(7):
            ts = t + _C[s] * h
            rs = r
            ps = pr
            bs = beta
            for i in range(dim):
                dpsi[i] = psi[i]
            for j in range(s):
                aj = h * _A[s, j]
                rs += aj * kr[j]
                ps += aj * kp[j]
                bs += aj * kb[j]
                for i in range(dim):
                    dpsi[i] += aj * k_psi[j, i]
            # field and classical derivatives at this stage
            if field_model == FIELD_EXACT:
                eps = 1.0 / (rs * rs)
                kr[s] = ps / mu
                kp[s] = 1.0 / (rs * rs) + L * L / (mu * rs * rs * rs)
                kb[s] = L / (mu * rs * rs)
                cb = math.cos(bs)
                sb = math.sin(bs)
            else:
                half = 0.5 * tau
                eps = eps0 * half * half / (ts * ts + half * half)
                kr[s] = 0.0
                kp[s] = 0.0
                kb[s] = 0.0
                cb = 1.0
                sb = 0.0
            if mode == MODE_POLAR:
                c0 = -par[0] * eps * cb
                c1 = -par[0] * eps * sb
                c2 = 0.0
                h_id = 0.0
            else:
                e32 = eps * math.sqrt(eps)
                g = -par[0] * eps * eps / 4.0 + 0.75 * par[2] * e32
                h_id = -par[1] * eps * eps / 4.0 + 0.25 * par[2] * e32
                c0 = g * cb * cb
                c1 = g * 2.0 * cb * sb
                c2 = g * sb * sb
            # dphi = -i sum_k c_k V_k(int) phi - i h_id phi
            for i in range(dim):
                k_psi[s, i] = -1j * h_id * dpsi[i]
            for nz in range(nnz):
                o = op_of[nz]
                if o == 0:
                    c = c0
                elif o == 1:
                    c = c1
                else:
                    c = c2
                if c != 0.0:
                    ph = (E0[rows[nz]] - E0[cols[nz]]) * ts
                    k_psi[s, rows[nz]] += (-1j * c * vals[nz]
                                           * complex(math.cos(ph), math.sin(ph))
                                           * dpsi[cols[nz]])
        # 5th-order solution and embedded error
        rn = r
        pn = pr
        bn = beta
        er = 0.0
        ep = 0.0
        eb = 0.0
        for s in range(7):
            b5 = h * _B5[s]
            be = h * _E[s]
            rn += b5 * kr[s]
            pn += b5 * kp[s]
            bn += b5 * kb[s]
            er += be * kr[s]
            ep += be * kp[s]
            eb += be * kb[s]
        err_sq = 0.0
        for i in range(dim):
            yn = psi[i]
            ei = 0.0j
            for s in range(7):
                yn += h * _B5[s] * k_psi[s, i]
                ei += h * _E[s] * k_psi[s, i]
            sc = atol + rtol * max(abs(psi[i]), abs(yn))
            err_sq += (abs(ei) / sc) ** 2
            dpsi[i] = yn     # stash the candidate update
        if field_model == FIELD_EXACT:
            sc_r = atol + rtol * max(abs(r), abs(rn))
            sc_p = atol + rtol * max(max(abs(pr), abs(pn)), 1e-3 * p_inf)
            sc_b = atol + rtol * max(max(abs(beta), abs(bn)), 1e-3)
            err_sq += (er / sc_r) ** 2 + (ep / sc_p) ** 2 + (eb / sc_b) ** 2
            err = math.sqrt(err_sq / (dim + 3))
        else:
            err = math.sqrt(err_sq / dim)
        if err <= 1.0:
            t = t + h
            r = rn
            pr = pn
            beta = bn
            norm = 0.0
            for i in range(dim):
                psi[i] = dpsi[i]
                norm += psi[i].real ** 2 + psi[i].imag ** 2
            dev = abs(math.sqrt(norm) - 1.0)
            if dev > norm_dev:
                norm_dev = dev
            if record and n_trace < cap:
                trace_t[n_trace] = t
                for jj in range(n_j):
                    trace_p[n_trace, jj] = 0.0
                for i in range(dim):
                    trace_p[n_trace, j_of[i]] += psi[i].real ** 2 + psi[i].imag ** 2
                n_trace += 1
        fac = 0.9 * err ** -0.2 if err > 0 else 10.0
        # next step from the attempted (possibly endpoint-clipped) h, keeping
        # its sign; a stale dt can grow unbounded while clipping and deadlock
        dt = h * min(10.0, max(0.2, fac))
        if abs(dt) < 1e-13 * span:
            return STATUS_DT_UNDERFLOW, n_steps, n_trace, psi, r, pr, beta, norm_dev
    return STATUS_OK, n_steps, n_trace, psi, r, pr, beta, norm_dev


classical_extent = _jit(_classical_extent)
sample_classical = _jit(_sample_classical)
propagate = _jit(_propagate)
