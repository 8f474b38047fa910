"""Compiled and pure-Python kernels must agree; history lookups follow the zero pre-history rule."""

import numpy as np
import pytest

from lambdawg import kernel
from lambdawg._kernel_py import (
    SHIFT_NONE,
    SHIFT_SAMPLED,
    SHIFT_SINUSOID,
    SHIFT_STEP,
    HistoryBuffer,
    shift_at,
)

needs_ext = pytest.mark.skipif(kernel.BACKEND != "cython", reason="compiled kernel not built")


def _random_problem(rng, m, n_terms):
    inst = rng.normal(size=(m, m)) * 0.3 + 1j * rng.normal(size=(m, m)) * 0.3
    inst -= np.eye(m)
    tgt = rng.integers(0, m, n_terms).astype(np.int64)
    src = rng.integers(0, m, n_terms).astype(np.int64)
    coef = (rng.normal(size=n_terms) + 1j * rng.normal(size=n_terms)) * 0.4
    delay = rng.uniform(0.05, 0.7, n_terms)
    y0 = rng.normal(size=m) + 1j * rng.normal(size=m)
    return inst, tgt, src, coef, delay, y0


SHIFTS = [
    (SHIFT_NONE, np.zeros(4), np.zeros(0), np.zeros(0)),
    (SHIFT_STEP, np.array([1.5, 0.4, 0.1, 0.0]), np.zeros(0), np.zeros(0)),
    (SHIFT_SINUSOID, np.array([2.0, 0.3, 0.0, 12.0]), np.zeros(0), np.zeros(0)),
    (SHIFT_SAMPLED, np.zeros(4), np.array([0.1, 0.5, 0.9]), np.array([0.0, 3.0, -1.0])),
]


@needs_ext
@pytest.mark.parametrize("shift", SHIFTS, ids=["none", "step", "sinusoid", "sampled"])
@pytest.mark.parametrize("m", [1, 2, 3])
def test_dde_backends_agree(shift, m):
    rng = np.random.default_rng(100 + m)
    inst, tgt, src, coef, delay, y0 = _random_problem(rng, m, 4)
    args = (inst, *shift, tgt, src, coef, delay, y0, 0.01, 150)
    Yc, sc, lc = kernel.integrate_linear_dde(*args)
    Yp, sp, lp = kernel.python_integrate_linear_dde(*args)
    assert sc == sp == 0 and lc == lp == 150
    np.testing.assert_allclose(Yc, Yp, rtol=0, atol=1e-12)


@needs_ext
def test_mode_backends_agree():
    rng = np.random.default_rng(7)
    n = 41
    det = np.linspace(-4, 4, n)
    G = rng.normal(size=(2, n)) * 0.3
    w = np.full(n, 0.2)
    ce0 = np.array([0.6, 0.8j])
    for code, p, tt, tv in SHIFTS:
        out_c = kernel.evolve_modes_rk4(det, G, w, ce0, 0.01, 200, 5, code, p, tt, tv, 1.0)
        out_p = kernel.python_evolve_modes_rk4(det, G, w, ce0, 0.01, 200, 5, code, p, tt, tv, 1.0)
        for a, b in zip(out_c, out_p):
            np.testing.assert_allclose(a, b, rtol=0, atol=1e-12)


def test_python_kernel_flags_divergence():
    inst = np.array([[1e300 + 0j]])
    empty_i = np.zeros(0, dtype=np.int64)
    Y, status, last = kernel.python_integrate_linear_dde(
        inst, SHIFT_NONE, np.zeros(4), np.zeros(0), np.zeros(0),
        empty_i, empty_i, np.zeros(0, complex), np.zeros(0), np.array([1.0 + 0j]), 1.0, 10,
    )
    assert status == 1 and last < 10


def test_shift_table_matches_numpy():
    tt, tv = np.array([0.0, 1.0, 3.0]), np.array([1.0, -1.0, 2.0])
    for t in np.linspace(-0.5, 3.5, 17):
        expect = 0.0 if t < 0 or t > 3 else np.interp(t, tt, tv)
        assert shift_at(SHIFT_SAMPLED, np.zeros(4), tt, tv, t) == pytest.approx(expect)


class TestHistoryBuffer:
    def _buffer(self):
        dt = 0.1
        t = np.arange(11) * dt
        vals = np.exp((-0.5 + 2j) * t)[:, None]
        ders = ((-0.5 + 2j) * vals)
        return HistoryBuffer(vals, ders, dt), t

    def test_pre_history_is_zero(self):
        buf, _ = self._buffer()
        assert buf.lookup(-1e-6) == 0
        assert buf.lookup(-3.0) == 0

    def test_initial_value_at_start(self):
        buf, _ = self._buffer()
        assert buf.lookup(0.0) == 1.0

    def test_grid_points_exact(self):
        buf, t = self._buffer()
        for k in range(11):
            assert buf.lookup(t[k]) == pytest.approx(buf.values[k, 0], abs=1e-15)

    def test_hermite_accuracy(self):
        buf, _ = self._buffer()
        for s in np.linspace(0.0, 1.0, 23):
            exact = np.exp((-0.5 + 2j) * s)
            assert abs(buf.lookup(s) - exact) < 1e-5
