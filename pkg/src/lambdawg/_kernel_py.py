"""Pure-Python kernels (fallbacks for the compiled ``_ckernel``).

The method-of-steps loop solves the linear constant-delay system

    y_i'(t) = sum_j A_ij y_j(t) - i*Delta(t)*y_i(t)
              + sum_terms coef * y_src(t - delay) * Theta(t - delay)

with zero pre-history, on a uniform grid with classical RK4. Delayed values
come from cubic Hermite interpolation of the stored samples and derivatives.
Steps are split at the non-smooth times generated by the delays (see
``split_times``) and the history keeps knots there, so neither the RK
stages nor the interpolation straddle a derivative jump.
"""

from __future__ import annotations

import bisect
import math

import numpy as np

SHIFT_NONE, SHIFT_STEP, SHIFT_SINUSOID, SHIFT_SAMPLED = 0, 1, 2, 3

STATUS_OK = 0
STATUS_DIVERGED = 1


class HistoryBuffer:
    """Dense grid history of a trajectory with cubic Hermite lookup.

    ``derivs`` holds right-sided derivatives at the grid points; ``left``
    (optional) the left-sided ones, which differ where a delayed term
    switches on exactly at a grid point. Non-smooth points strictly between
    grid points are stored as extra knots (time, value, left and right
    slope) so that interpolation never straddles them. Times before ``t0``
    read as zero (atom excited at ``t0``, vacuum field before).
    """

    def __init__(self, values, derivs, dt: float, t0: float = 0.0, filled: int | None = None,
                 left=None):
        self.values = values
        self.derivs = derivs
        self.left = derivs if left is None else left
        self.knot_t: list = []
        self.knot_data: list = []
        self.dt = float(dt)
        self.t0 = float(t0)
        self.filled = len(values) if filled is None else filled

    def add_knot(self, t, value, left_slope, right_slope):
        """Register a non-smooth point; knots must be added in time order."""
        self.knot_t.append(float(t) - self.t0)
        self.knot_data.append((value, left_slope, right_slope))

    def lookup(self, t: float, row: int = 0):
        if t < self.t0:
            return 0.0j
        return self._interp(t - self.t0, row, self.filled - 1)

    def _interp(self, t, row, last):
        Y, dt = self.values, self.dt
        if last <= 0:
            return Y[0][row]
        idx = min(int(t / dt), last - 1)
        xa, xb = idx * dt, (idx + 1) * dt
        ya, fa = Y[idx][row], self.derivs[idx][row]
        yb, fb = Y[idx + 1][row], self.left[idx + 1][row]
        if self.knot_t:
            eps = 1e-9 * dt
            k = bisect.bisect_right(self.knot_t, xa + eps)
            stop = xb - eps
            while k < len(self.knot_t) and self.knot_t[k] < stop:
                kt = self.knot_t[k]
                ky, kl, kr = self.knot_data[k]
                if kt <= t:
                    xa, ya, fa = kt, ky[row], kr[row]
                else:
                    xb, yb, fb = kt, ky[row], kl[row]
                    break
                k += 1
        return _hermite(ya, fa, yb, fb, xb - xa, (t - xa) / (xb - xa))


def _hermite(ya, fa, yb, fb, h, th):
    th2 = th * th
    th3 = th2 * th
    return (
        (2.0 * th3 - 3.0 * th2 + 1.0) * ya
        + (th3 - 2.0 * th2 + th) * h * fa
        + (-2.0 * th3 + 3.0 * th2) * yb
        + (th3 - th2) * h * fb
    )


def shift_at(code, params, table_t, table_v, t):
    if code == SHIFT_NONE:
        return 0.0
    amp, t0, width, omega = params[0], params[1], params[2], params[3]
    if code == SHIFT_STEP:
        return 0.5 * amp * (1.0 + math.tanh((t - t0) / width))
    if code == SHIFT_SINUSOID:
        return amp * math.sin(omega * (t - t0)) if t >= t0 else 0.0
    if t < table_t[0] or t > table_t[-1]:
        return 0.0
    return float(np.interp(t, table_t, table_v))


def split_times(delays):
    """Non-smooth times generated by the delays, as ``(cuts, knots)``.

    A term switching on at delay ``d`` makes the slope of the solution jump
    at ``d``; one delay later the jump reappears in the second derivative,
    then in the third. Steps are cut at sums of up to three delays and the
    history keeps knots at sums of up to two, which preserves fourth-order
    convergence.
    """
    ds = sorted(set(float(d) for d in delays if d > 0))
    pairs = {a + b for i, a in enumerate(ds) for b in ds[i:]}
    triples = {p + c for p in pairs for c in ds}
    knots = sorted(set(ds) | pairs)
    return sorted(set(knots) | triples), knots


def integrate_linear_dde(
    inst, shift_code, shift_params, table_t, table_v, tgt, src, coef, delay, y0, dt, n_steps
):
    """Run the stepping loop; returns ``(Y, status, last_index)``.

    ``Y`` has shape ``(n_steps + 1, m)``. On divergence ``status`` is
    ``STATUS_DIVERGED`` and rows after ``last_index`` are undefined.
    """
    inst = [[complex(v) for v in row] for row in np.asarray(inst, dtype=complex)]
    m = len(inst)
    tgt = [int(v) for v in tgt]
    src = [int(v) for v in src]
    coef = [complex(v) for v in coef]
    delay = [float(v) for v in delay]
    nterm = len(coef)
    params = [float(v) for v in shift_params]
    table_t = np.asarray(table_t, dtype=float)
    table_v = np.asarray(table_v, dtype=float)
    dt = float(dt)
    eps = 1e-9 * dt

    Y = [[0j] * m for _ in range(n_steps + 1)]
    FR = [[0j] * m for _ in range(n_steps + 1)]
    FL = [[0j] * m for _ in range(n_steps + 1)]
    Y[0] = [complex(v) for v in y0]
    hist = HistoryBuffer(Y, FR, dt, left=FL)
    switch_times = sorted(set(delay))
    cut_times, knot_times = split_times(delay)
    switch_set = set(switch_times)
    knot_set = set(knot_times)

    def rhs(t, y, a_start, last):
        d = shift_at(shift_code, params, table_t, table_v, t)
        out = []
        for i in range(m):
            acc = -1j * d * y[i]
            row = inst[i]
            for j in range(m):
                acc += row[j] * y[j]
            out.append(acc)
        for j in range(nterm):
            if delay[j] <= a_start + eps:
                s = t - delay[j]
                if s < 0.0:
                    s = 0.0
                out[tgt[j]] += coef[j] * hist._interp(s, src[j], last)
        return out

    FR[0] = rhs(0.0, Y[0], 0.0, 0)
    FL[0] = FR[0]
    for n in range(n_steps):
        t_n = n * dt
        t_next = (n + 1) * dt
        cuts = [t_n]
        for ts in cut_times:
            if t_n + eps < ts < t_next - eps:
                cuts.append(ts)
        cuts.append(t_next)

        y = Y[n]
        k1 = FR[n]
        for c in range(len(cuts) - 1):
            a, b = cuts[c], cuts[c + 1]
            h = b - a
            y2 = [y[i] + 0.5 * h * k1[i] for i in range(m)]
            k2 = rhs(a + 0.5 * h, y2, a, n)
            y3 = [y[i] + 0.5 * h * k2[i] for i in range(m)]
            k3 = rhs(a + 0.5 * h, y3, a, n)
            y4 = [y[i] + h * k3[i] for i in range(m)]
            k4 = rhs(b, y4, a, n)
            y = [y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) for i in range(m)]
            if c < len(cuts) - 2:
                k1 = rhs(b, y, b, n)
                if b in switch_set:
                    hist.add_knot(b, y, rhs(b, y, a, n), k1)
                elif b in knot_set:
                    hist.add_knot(b, y, k1, k1)

        for v in y:
            if not (math.isfinite(v.real) and math.isfinite(v.imag)):
                return np.array(Y, dtype=complex), STATUS_DIVERGED, n
        Y[n + 1] = y
        FR[n + 1] = rhs(t_next, y, t_next, n + 1)
        a_last = cuts[-2]
        if any(a_last + eps < d <= t_next + eps for d in switch_times):
            FL[n + 1] = rhs(t_next, y, a_last, n + 1)
        else:
            FL[n + 1] = FR[n + 1]

    return np.array(Y, dtype=complex), STATUS_OK, n_steps


def evolve_modes_rk4(det, G, weights, ce0, dt, n_steps, record_every,
                     shift_code, shift_params, table_t, table_v, norm_tol):
    """Numpy RK4 for the discretized-mode equations (rotating frame).

    ``ce' = -i (G*w) @ ph - i Delta(t) ce`` and ``ph' = -i (det*ph + G.T @ ce)``.
    Returns ``(times, ce_series, norms, ce_final, ph_final, status)``; stops
    early with ``status = 1`` once the norm drifts by more than ``norm_tol``.
    """
    det = np.asarray(det, dtype=float)
    G = np.asarray(G, dtype=float)
    weights = np.asarray(weights, dtype=float)
    Gw = G * weights
    GT = np.ascontiguousarray(G.T)
    params = [float(v) for v in shift_params]
    table_t = np.asarray(table_t, dtype=float)
    table_v = np.asarray(table_v, dtype=float)
    use_shift = shift_code != SHIFT_NONE

    def rhs(t, ce, ph):
        dce = -1j * (Gw @ ph)
        if use_shift:
            dce = dce - 1j * shift_at(shift_code, params, table_t, table_v, t) * ce
        return dce, -1j * (det * ph + GT @ ce)

    def norm(ce, ph):
        return float(np.sum(np.abs(ce) ** 2) + np.dot(weights, np.abs(ph) ** 2))

    m = G.shape[0]
    ce = np.array(ce0, dtype=complex)
    ph = np.zeros(det.size, dtype=complex)
    n_rec = n_steps // record_every + 1
    rec_t = np.zeros(n_rec)
    rec_ce = np.zeros((m, n_rec), dtype=complex)
    rec_norm = np.zeros(n_rec)
    rec_ce[:, 0], rec_norm[0] = ce, norm(ce, ph)
    r = 1
    status = STATUS_OK
    for n in range(n_steps):
        t = n * dt
        a1, b1 = rhs(t, ce, ph)
        a2, b2 = rhs(t + 0.5 * dt, ce + 0.5 * dt * a1, ph + 0.5 * dt * b1)
        a3, b3 = rhs(t + 0.5 * dt, ce + 0.5 * dt * a2, ph + 0.5 * dt * b2)
        a4, b4 = rhs(t + dt, ce + dt * a3, ph + dt * b3)
        ce = ce + dt / 6.0 * (a1 + 2 * a2 + 2 * a3 + a4)
        ph = ph + dt / 6.0 * (b1 + 2 * b2 + 2 * b3 + b4)
        if (n + 1) % record_every == 0:
            rec_t[r], rec_ce[:, r], rec_norm[r] = (n + 1) * dt, ce, norm(ce, ph)
            r += 1
            if abs(rec_norm[r - 1] - rec_norm[0]) > norm_tol:
                status = STATUS_DIVERGED
                break
    return rec_t[:r], rec_ce[:, :r], rec_norm[:r], ce, ph, status
