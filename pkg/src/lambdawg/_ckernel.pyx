# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled method-of-steps kernel; same contract as ``_kernel_py.integrate_linear_dde``."""

import numpy as np
from ._kernel_py import split_times
cimport numpy as cnp
from libc.math cimport tanh, sin, isfinite, floor

cnp.import_array()

DEF SHIFT_NONE = 0
DEF SHIFT_STEP = 1
DEF SHIFT_SINUSOID = 2
DEF SHIFT_SAMPLED = 3
DEF MAXM = 8


cdef inline double _shift(int code, double[::1] p, double[::1] tt, double[::1] tv, double t) nogil:
    cdef Py_ssize_t lo, hi, mid
    cdef double w
    if code == SHIFT_NONE:
        return 0.0
    if code == SHIFT_STEP:
        return 0.5 * p[0] * (1.0 + tanh((t - p[1]) / p[2]))
    if code == SHIFT_SINUSOID:
        if t >= p[1]:
            return p[0] * sin(p[3] * (t - p[1]))
        return 0.0
    hi = tt.shape[0] - 1
    if t < tt[0] or t > tt[hi]:
        return 0.0
    lo = 0
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if tt[mid] <= t:
            lo = mid
        else:
            hi = mid
    w = (t - tt[lo]) / (tt[hi] - tt[lo])
    return tv[lo] + w * (tv[hi] - tv[lo])


cdef struct History:
    double complex* Y
    double complex* FR
    double complex* FL
    double* KT
    double complex* KY
    double complex* KL
    double complex* KR
    Py_ssize_t nk
    Py_ssize_t m
    double dt
    double eps


cdef inline double complex _hermite(double complex ya, double complex fa, double complex yb,
                                    double complex fb, double h, double th) nogil:
    cdef double th2 = th * th
    cdef double th3 = th2 * th
    return ((2.0 * th3 - 3.0 * th2 + 1.0) * ya
            + (th3 - 2.0 * th2 + th) * h * fa
            + (-2.0 * th3 + 3.0 * th2) * yb
            + (th3 - th2) * h * fb)


cdef double complex _interp(History* H, Py_ssize_t row, double t, Py_ssize_t last) nogil:
    cdef Py_ssize_t m = H.m
    cdef Py_ssize_t idx, lo, hi, mid, k
    cdef double xa, xb, kt
    cdef double complex ya, fa, yb, fb
    if last <= 0:
        return H.Y[row]
    idx = <Py_ssize_t>floor(t / H.dt)
    if idx > last - 1:
        idx = last - 1
    if idx < 0:
        idx = 0
    xa = idx * H.dt
    xb = (idx + 1) * H.dt
    ya = H.Y[idx * m + row]
    fa = H.FR[idx * m + row]
    yb = H.Y[(idx + 1) * m + row]
    fb = H.FL[(idx + 1) * m + row]
    if H.nk > 0:
        # first knot strictly after xa + eps
        lo = 0
        hi = H.nk
        while lo < hi:
            mid = (lo + hi) // 2
            if H.KT[mid] <= xa + H.eps:
                lo = mid + 1
            else:
                hi = mid
        k = lo
        while k < H.nk and H.KT[k] < xb - H.eps:
            kt = H.KT[k]
            if kt <= t:
                xa = kt
                ya = H.KY[k * m + row]
                fa = H.KR[k * m + row]
            else:
                xb = kt
                yb = H.KY[k * m + row]
                fb = H.KL[k * m + row]
                break
            k += 1
    return _hermite(ya, fa, yb, fb, xb - xa, (t - xa) / (xb - xa))


cdef void _rhs(double t, double complex* y, double a_start, Py_ssize_t last,
               Py_ssize_t m, double complex[:, ::1] A,
               int code, double[::1] p, double[::1] tt, double[::1] tv,
               cnp.int64_t[::1] tgt, cnp.int64_t[::1] src, double complex[::1] coef, double[::1] delay,
               History* H, double complex* out) nogil:
    cdef Py_ssize_t i, j
    cdef double d = _shift(code, p, tt, tv, t)
    cdef double s
    cdef double complex acc
    for i in range(m):
        acc = -1j * d * y[i]
        for j in range(m):
            acc = acc + A[i, j] * y[j]
        out[i] = acc
    for j in range(coef.shape[0]):
        if delay[j] <= a_start + H.eps:
            s = t - delay[j]
            if s < 0.0:
                s = 0.0
            out[tgt[j]] = out[tgt[j]] + coef[j] * _interp(H, src[j], s, last)


def integrate_linear_dde(inst, int shift_code, shift_params, table_t, table_v,
                         tgt, src, coef, delay, y0, double dt, Py_ssize_t n_steps):
    cdef double complex[:, ::1] A = np.ascontiguousarray(inst, dtype=np.complex128)
    cdef Py_ssize_t m = A.shape[0]
    if m > MAXM:
        raise ValueError("compiled kernel supports at most %d amplitudes" % MAXM)
    cdef double[::1] p = np.ascontiguousarray(shift_params, dtype=np.float64)
    cdef double[::1] tt = np.ascontiguousarray(table_t if len(table_t) else [0.0], dtype=np.float64)
    cdef double[::1] tv = np.ascontiguousarray(table_v if len(table_v) else [0.0], dtype=np.float64)
    cdef cnp.int64_t[::1] tg = np.ascontiguousarray(tgt, dtype=np.int64)
    cdef cnp.int64_t[::1] sr = np.ascontiguousarray(src, dtype=np.int64)
    cdef double complex[::1] cf = np.ascontiguousarray(coef, dtype=np.complex128)
    cdef double[::1] dl = np.ascontiguousarray(delay, dtype=np.float64)

    cut_list, knot_list = split_times(delay)
    switch_set = set(float(d) for d in delay)
    knot_set = set(knot_list)
    cdef Py_ssize_t ncuts = len(cut_list)
    cdef double[::1] cut_t = np.ascontiguousarray(cut_list + [0.0], dtype=np.float64)
    # 2: slope jump (one-sided slopes differ), 1: smooth knot, 0: cut only
    cdef cnp.int8_t[::1] cut_kind = np.ascontiguousarray(
        [2 if c in switch_set else (1 if c in knot_set else 0) for c in cut_list] + [0], dtype=np.int8)
    cdef double[::1] sw = np.ascontiguousarray(sorted(switch_set) + [0.0], dtype=np.float64)
    cdef Py_ssize_t nsw = len(switch_set)

    Yarr = np.zeros((n_steps + 1, m), dtype=np.complex128)
    FRarr = np.zeros((n_steps + 1, m), dtype=np.complex128)
    FLarr = np.zeros((n_steps + 1, m), dtype=np.complex128)
    nk_max = max(len(knot_list), 1)
    KTarr = np.zeros(nk_max, dtype=np.float64)
    KYarr = np.zeros((nk_max, m), dtype=np.complex128)
    KLarr = np.zeros((nk_max, m), dtype=np.complex128)
    KRarr = np.zeros((nk_max, m), dtype=np.complex128)
    cdef double complex[:, ::1] Y = Yarr
    cdef double complex[:, ::1] FR = FRarr
    cdef double complex[:, ::1] FL = FLarr
    cdef double[::1] KT = KTarr
    cdef double complex[:, ::1] KY = KYarr
    cdef double complex[:, ::1] KL = KLarr
    cdef double complex[:, ::1] KR = KRarr

    cdef History H
    H.Y = &Y[0, 0]
    H.FR = &FR[0, 0]
    H.FL = &FL[0, 0]
    H.KT = &KT[0]
    H.KY = &KY[0, 0]
    H.KL = &KL[0, 0]
    H.KR = &KR[0, 0]
    H.nk = 0
    H.m = m
    H.dt = dt
    H.eps = 1e-9 * dt

    cdef double complex y[MAXM]
    cdef double complex k1[MAXM]
    cdef double complex k2[MAXM]
    cdef double complex k3[MAXM]
    cdef double complex k4[MAXM]
    cdef double complex tmp[MAXM]
    cdef double eps = H.eps
    cdef double t_n, t_next, a, b, h
    cdef Py_ssize_t n, i, w, ci = 0, c0
    cdef int status = 0, jump
    cdef Py_ssize_t last_ok = n_steps

    y0a = np.asarray(y0, dtype=np.complex128)
    for i in range(m):
        Y[0, i] = y0a[i]
        y[i] = y0a[i]

    with nogil:
        _rhs(0.0, y, 0.0, 0, m, A, shift_code, p, tt, tv, tg, sr, cf, dl, &H, k1)
        for i in range(m):
            FR[0, i] = k1[i]
            FL[0, i] = k1[i]
        for n in range(n_steps):
            t_n = n * dt
            t_next = (n + 1) * dt
            while ci < ncuts and cut_t[ci] <= t_n + eps:
                ci += 1
            for i in range(m):
                y[i] = Y[n, i]
                k1[i] = FR[n, i]
            a = t_n
            while True:
                if ci < ncuts and cut_t[ci] < t_next - eps:
                    b = cut_t[ci]
                else:
                    b = t_next
                h = b - a
                for i in range(m):
                    tmp[i] = y[i] + 0.5 * h * k1[i]
                _rhs(a + 0.5 * h, tmp, a, n, m, A, shift_code, p, tt, tv, tg, sr, cf, dl, &H, k2)
                for i in range(m):
                    tmp[i] = y[i] + 0.5 * h * k2[i]
                _rhs(a + 0.5 * h, tmp, a, n, m, A, shift_code, p, tt, tv, tg, sr, cf, dl, &H, k3)
                for i in range(m):
                    tmp[i] = y[i] + h * k3[i]
                _rhs(b, tmp, a, n, m, A, shift_code, p, tt, tv, tg, sr, cf, dl, &H, k4)
                for i in range(m):
                    y[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
                if b == t_next:
                    break
                _rhs(b, y, b, n, m, A, shift_code, p, tt, tv, tg, sr, cf, dl, &H, k1)
                if cut_kind[ci] != 0:
                    KT[H.nk] = b
                    for i in range(m):
                        KY[H.nk, i] = y[i]
                        KR[H.nk, i] = k1[i]
                    if cut_kind[ci] == 2:
                        _rhs(b, y, a, n, m, A, shift_code, p, tt, tv, tg, sr, cf, dl, &H, tmp)
                        for i in range(m):
                            KL[H.nk, i] = tmp[i]
                    else:
                        for i in range(m):
                            KL[H.nk, i] = k1[i]
                    H.nk += 1
                ci += 1
                a = b
            for i in range(m):
                if not (isfinite(y[i].real) and isfinite(y[i].imag)):
                    status = 1
            if status:
                last_ok = n
                break
            for i in range(m):
                Y[n + 1, i] = y[i]
            _rhs(t_next, y, t_next, n + 1, m, A, shift_code, p, tt, tv, tg, sr, cf, dl, &H, k1)
            for i in range(m):
                FR[n + 1, i] = k1[i]
                FL[n + 1, i] = k1[i]
            jump = 0
            for w in range(nsw):
                if sw[w] > a + eps and sw[w] <= t_next + eps:
                    jump = 1
            if jump:
                _rhs(t_next, y, a, n + 1, m, A, shift_code, p, tt, tv, tg, sr, cf, dl, &H, k1)
                for i in range(m):
                    FL[n + 1, i] = k1[i]

    return Yarr, status, last_ok


cdef void _mode_rhs(double t, double complex* ce, double complex[::1] ph, Py_ssize_t m,
                    double[::1] det, double[:, ::1] G, double[:, ::1] Gw,
                    int code, double[::1] p, double[::1] tt, double[::1] tv,
                    double complex* dce, double complex[::1] dph) nogil:
    cdef Py_ssize_t a, j, P = det.shape[0]
    cdef double complex acc, src
    cdef double d = _shift(code, p, tt, tv, t)
    for a in range(m):
        acc = 0
        for j in range(P):
            acc = acc + Gw[a, j] * ph[j]
        dce[a] = -1j * acc - 1j * d * ce[a]
    for j in range(P):
        src = det[j] * ph[j]
        for a in range(m):
            src = src + G[a, j] * ce[a]
        dph[j] = -1j * src


def evolve_modes_rk4(det, G, weights, ce0, double dt, Py_ssize_t n_steps, Py_ssize_t record_every,
                     int shift_code, shift_params, table_t, table_v, double norm_tol):
    """RK4 for the single-excitation mode equations; same contract as the Python fallback."""
    cdef double[::1] dv = np.ascontiguousarray(det, dtype=np.float64)
    cdef double[:, ::1] Gv = np.ascontiguousarray(G, dtype=np.float64)
    cdef double[::1] wv = np.ascontiguousarray(weights, dtype=np.float64)
    cdef double[:, ::1] Gwv = np.ascontiguousarray(np.asarray(G, dtype=np.float64) * np.asarray(weights)[None, :])
    cdef double[::1] p = np.ascontiguousarray(shift_params, dtype=np.float64)
    cdef double[::1] tt = np.ascontiguousarray(table_t if len(table_t) else [0.0], dtype=np.float64)
    cdef double[::1] tv = np.ascontiguousarray(table_v if len(table_v) else [0.0], dtype=np.float64)
    cdef Py_ssize_t m = Gv.shape[0], P = dv.shape[0]
    if m > MAXM:
        raise ValueError("compiled kernel supports at most %d atoms" % MAXM)
    ph_arr = np.zeros(P, dtype=np.complex128)
    cdef double complex[::1] ph = ph_arr
    cdef double complex[::1] x = np.zeros(P, dtype=np.complex128)
    cdef double complex[::1] b1 = np.zeros(P, dtype=np.complex128)
    cdef double complex[::1] b2 = np.zeros(P, dtype=np.complex128)
    cdef double complex[::1] b3 = np.zeros(P, dtype=np.complex128)
    cdef double complex[::1] b4 = np.zeros(P, dtype=np.complex128)
    cdef double complex ce[MAXM]
    cdef double complex xe[MAXM]
    cdef double complex a1[MAXM]
    cdef double complex a2[MAXM]
    cdef double complex a3[MAXM]
    cdef double complex a4[MAXM]
    cdef Py_ssize_t n_rec = n_steps // record_every + 1
    rec_t_arr = np.zeros(n_rec)
    rec_ce_arr = np.zeros((m, n_rec), dtype=np.complex128)
    rec_norm_arr = np.zeros(n_rec)
    cdef double[::1] rec_t = rec_t_arr
    cdef double complex[:, ::1] rec_ce = rec_ce_arr
    cdef double[::1] rec_norm = rec_norm_arr
    cdef Py_ssize_t n, j, a, r = 1
    cdef double t, nrm, nrm0 = 0.0
    cdef int status = 0
    ce0a = np.asarray(ce0, dtype=np.complex128)
    for a in range(m):
        ce[a] = ce0a[a]
        rec_ce[a, 0] = ce[a]
        nrm0 += ce[a].real * ce[a].real + ce[a].imag * ce[a].imag
    rec_norm[0] = nrm0
    with nogil:
        for n in range(n_steps):
            t = n * dt
            _mode_rhs(t, ce, ph, m, dv, Gv, Gwv, shift_code, p, tt, tv, a1, b1)
            for a in range(m):
                xe[a] = ce[a] + 0.5 * dt * a1[a]
            for j in range(P):
                x[j] = ph[j] + 0.5 * dt * b1[j]
            _mode_rhs(t + 0.5 * dt, xe, x, m, dv, Gv, Gwv, shift_code, p, tt, tv, a2, b2)
            for a in range(m):
                xe[a] = ce[a] + 0.5 * dt * a2[a]
            for j in range(P):
                x[j] = ph[j] + 0.5 * dt * b2[j]
            _mode_rhs(t + 0.5 * dt, xe, x, m, dv, Gv, Gwv, shift_code, p, tt, tv, a3, b3)
            for a in range(m):
                xe[a] = ce[a] + dt * a3[a]
            for j in range(P):
                x[j] = ph[j] + dt * b3[j]
            _mode_rhs(t + dt, xe, x, m, dv, Gv, Gwv, shift_code, p, tt, tv, a4, b4)
            for a in range(m):
                ce[a] = ce[a] + dt / 6.0 * (a1[a] + 2.0 * a2[a] + 2.0 * a3[a] + a4[a])
            for j in range(P):
                ph[j] = ph[j] + dt / 6.0 * (b1[j] + 2.0 * b2[j] + 2.0 * b3[j] + b4[j])
            if (n + 1) % record_every == 0:
                nrm = 0.0
                for a in range(m):
                    nrm += ce[a].real * ce[a].real + ce[a].imag * ce[a].imag
                    rec_ce[a, r] = ce[a]
                for j in range(P):
                    nrm += wv[j] * (ph[j].real * ph[j].real + ph[j].imag * ph[j].imag)
                rec_t[r] = (n + 1) * dt
                rec_norm[r] = nrm
                r += 1
                if not (nrm - nrm0 <= norm_tol and nrm0 - nrm <= norm_tol):
                    status = 1
                    break
    ce_out = np.array([ce[a] for a in range(m)], dtype=np.complex128)
    return rec_t_arr[:r], rec_ce_arr[:, :r], rec_norm_arr[:r], ce_out, ph_arr, status
