import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lambdawg.analytic import (
    InvalidRootError,
    LaplacePoleError,
    UnsupportedConfigurationError,
    bound_state_energy,
    bound_state_population,
    bound_state_residual,
    bound_states,
    final_value,
    laplace_amplitude,
    series_solution,
    steady_state_condition,
    steady_state_population,
)
from lambdawg.dde import integrate_single
from lambdawg.model import TWO_PI, ChannelParams, FrequencyShift, SingleAtomConfig

trapezoid = getattr(np, "trapezoid", None) or np.trapz


def cfg(gg=1.0, gx=1.0, pk=TWO_PI, pq=TWO_PI, tk=1.0, tq=1.0, **kw):
    return SingleAtomConfig(ChannelParams(gg, pk, tk), ChannelParams(gx, pq, tq), **kw)


class TestSeries:
    def test_before_first_echo(self):
        t = np.linspace(0, 0.999, 50)
        np.testing.assert_allclose(series_solution(cfg(pk=0.3, pq=2.0), t), np.exp(-t), atol=1e-15)

    def test_origin(self):
        assert series_solution(cfg(), 0.0) == 1.0

    def test_matches_integrator(self):
        c = cfg()
        tr = integrate_single(c, 10.0, 1e-4)
        assert np.max(np.abs(series_solution(c, tr.times) - tr.ce)) < 1e-6

    def test_long_times_do_not_overflow(self):
        val = series_solution(cfg(tk=0.1, tq=0.1), 200.0)
        assert abs(val) ** 2 == pytest.approx(1 / 1.1**2, abs=1e-9)

    def test_scales_with_initial_amplitude(self):
        assert series_solution(cfg(ce0=0.5j, pk=1.0), 3.3) == pytest.approx(
            0.5j * series_solution(cfg(pk=1.0), 3.3)
        )

    @pytest.mark.parametrize(
        "c",
        [
            cfg(tk=1.0, tq=0.5),
            cfg(tk=0.0, tq=0.0),
            cfg(reflectivity=0.5),
            cfg(shift=FrequencyShift("smooth-step", amplitude=1.0)),
        ],
        ids=["unequal", "zero", "leaky", "shifted"],
    )
    def test_unsupported(self, c):
        with pytest.raises(UnsupportedConfigurationError):
            series_solution(c, 1.0)

    def test_disabled_channel_delay_ignored(self):
        c = cfg(gx=0.0, tk=0.7, tq=0.2, pk=1.1)
        tr = integrate_single(c, 5.0, 1e-3)
        assert np.max(np.abs(series_solution(c, tr.times) - tr.ce)) < 1e-9

    def test_negative_time(self):
        with pytest.raises(ValueError):
            series_solution(cfg(), -1.0)


class TestSteadyState:
    @pytest.mark.parametrize(
        "args,expect",
        [((TWO_PI, TWO_PI, 1, 1), True), ((math.pi, TWO_PI, 1, 1), False), ((math.pi, TWO_PI, 0, 1), True)],
    )
    def test_condition(self, args, expect):
        assert steady_state_condition(*args) is expect

    def test_condition_scan(self):
        grid = np.linspace(-2 * TWO_PI, 2 * TWO_PI, 97)
        for pk in grid:
            for pq in grid[::8]:
                expect = math.isclose(math.cos(pk), 1.0, abs_tol=1e-12) and math.isclose(
                    math.cos(pq), 1.0, abs_tol=1e-12
                )
                assert steady_state_condition(pk, pq, 1.0, 0.7) == expect

    @pytest.mark.parametrize("tau,expect", [(1.0, 0.25), (0.1, 1 / 1.1**2)])
    def test_population(self, tau, expect):
        assert steady_state_population(cfg(tk=tau, tq=tau)) == pytest.approx(expect, abs=1e-15)

    def test_off_resonance_zero(self):
        assert steady_state_population(cfg(pk=math.pi / 2)) == 0.0

    def test_leaky_mirror_unsupported(self):
        with pytest.raises(UnsupportedConfigurationError):
            steady_state_population(cfg(reflectivity=0.9))

    def test_matches_long_integration(self):
        c = cfg(tk=0.4, tq=1.3)
        tr = integrate_single(c, 50.0, 0.004)
        assert abs(abs(tr.ce[-1]) ** 2 - abs(final_value(c)) ** 2) < 1e-3


class TestLaplace:
    def test_initial_value(self):
        s = 1e7
        assert s * laplace_amplitude(cfg(pk=0.4), s) == pytest.approx(1.0, abs=1e-6)

    def test_final_value_trapped(self):
        s = 1e-8
        assert abs(s * laplace_amplitude(cfg(), s)) == pytest.approx(0.5, abs=1e-6)
        assert final_value(cfg()) == pytest.approx(0.5)

    def test_final_value_leaky_phase(self):
        s = 1e-8
        assert abs(s * laplace_amplitude(cfg(pk=math.pi), s)) < 1e-6
        assert final_value(cfg(pk=math.pi)) == 0

    def test_one_channel_final_value(self):
        assert final_value(cfg(gx=0.0, tk=1.0, pq=1.0)) == pytest.approx(1 / 1.5)

    def test_pole(self):
        with pytest.raises(LaplacePoleError):
            laplace_amplitude(cfg(), 0.0)

    def test_vectorized(self):
        s = np.array([0.5, 1.0 + 2j])
        out = laplace_amplitude(cfg(pk=1.0), s)
        assert out.shape == (2,)
        assert out[1] == laplace_amplitude(cfg(pk=1.0), 1.0 + 2j)


@pytest.mark.parametrize(
    "c",
    [cfg(pk=TWO_PI, pq=TWO_PI), cfg(pk=math.pi / 2, tk=0.4, tq=1.0), cfg(gg=1.0, gx=3.0, tk=0.4, tq=1.0)],
    ids=["trapped", "quarter-turn", "asymmetric"],
)
def test_bromwich_inversion_matches_integrator(c):
    times = [0.5, 1.5, 3.0, 6.0, 9.0]
    tr = integrate_single(c, 10.0, 0.001)
    ref = tr.sample(times)
    assert np.max(np.abs(_bromwich(c, times) - ref)) < 1e-3


def _bromwich(c, times, sigma=0.05, omega_max=2000.0, d_omega=0.005):
    """Invert the Laplace amplitude along Re s = sigma with the 1/(s+b) tail removed."""
    b = 0.5 * c.total_gamma
    w = np.arange(-omega_max, omega_max + d_omega / 2, d_omega)
    s = sigma + 1j * w
    rest = laplace_amplitude(c, s) - c.ce0 / (s + b)
    out = []
    for t in times:
        val = math.exp(sigma * t) / TWO_PI * trapezoid(rest * np.exp(1j * w * t), w)
        out.append(val + c.ce0 * math.exp(-b * t))
    return np.array(out)


class TestBoundState:
    def test_resonant_root(self):
        ch = ChannelParams(1.0, TWO_PI, 1.0)
        roots = bound_state_energy(3.0, ch, ch)
        assert roots == [3.0]
        assert bound_state_residual(roots[0], 3.0, ch, ch) < 1e-12

    def test_decoupled(self):
        ch = ChannelParams(0.0, 1.0, 1.0)
        assert bound_state_energy(2.0, ch, ch) == [2.0]
        bs = bound_state_population(2.0, 2.0, ch, ch)
        assert bs.alpha == 1.0

    def test_alpha_and_steady_state(self):
        ch = ChannelParams(1.0, TWO_PI, 1.0)
        bs = bound_state_population(0.0, 0.0, ch, ch)
        assert bs.alpha == pytest.approx(0.5, abs=1e-15)
        assert bs.resonant
        assert bs.population == pytest.approx(steady_state_population(cfg()), abs=1e-12)

    def test_generic_root_residual(self):
        ck = ChannelParams(1.0, math.pi / 3, 1.0)
        cq = ChannelParams(1.0, TWO_PI, 1.0)
        roots = bound_state_energy(0.0, ck, cq)
        assert roots
        for r in roots:
            assert bound_state_residual(r, 0.0, ck, cq) < 1e-12

    def test_scan_finds_every_sign_change(self):
        ck = ChannelParams(3.0, 0.4, 6.0)
        cq = ChannelParams(2.0, 2.0, 9.0)
        roots = bound_state_energy(0.0, ck, cq)
        half = 3.0 / 2 + 2.0 / 2
        x = np.linspace(-half, half, 400_001)
        f = x + 1.5 * np.sin(6.0 * x + 0.4) + 1.0 * np.sin(9.0 * x + 2.0)
        assert len(roots) == int(np.sum(np.sign(f[1:]) != np.sign(f[:-1])))

    def test_rejects_non_root(self):
        ch = ChannelParams(1.0, 1.0, 1.0)
        with pytest.raises(InvalidRootError):
            bound_state_population(0.3, 0.0, ch, ch)

    def test_rejects_non_normalizable(self):
        # cos(theta) = -1 at the root with a large retardation load
        ch = ChannelParams(1.0, math.pi, 5.0)
        with pytest.raises(InvalidRootError):
            bound_state_population(0.0, 0.0, ch, ch)
        assert all(s.energy != 0.0 for s in bound_states(0.0, ch, ch))

    def test_photon_amplitude_needs_carrier(self):
        ch = ChannelParams(1.0, TWO_PI, 1.0)
        bs = bound_state_population(0.0, 0.0, ch, ch)
        with pytest.raises(ValueError):
            bs.photon_amplitude("k", [1.0])

    def test_photon_amplitude_regular_at_carrier(self):
        # resonance: the coupling vanishes where the detuning does
        ch = ChannelParams(1.0, TWO_PI, 1.0, 1.0, TWO_PI)
        bs = bound_state_population(0.0, 0.0, ch, ch)
        mu = TWO_PI + np.array([-1e-4, 1e-4])
        amp = bs.photon_amplitude("k", mu)
        assert np.all(np.isfinite(amp))
        assert abs(amp[0] - amp[1]) < 1e-3

    @settings(max_examples=20, deadline=None)
    @given(
        gg=st.floats(0.05, 3.0),
        gx=st.floats(0.05, 3.0),
        pk=st.floats(-math.pi, math.pi),
        pq=st.floats(-math.pi, math.pi),
        tk=st.floats(0.05, 5.0),
        tq=st.floats(0.05, 5.0),
        w0=st.floats(-10, 10),
    )
    def test_random_roots_satisfy_equation(self, gg, gx, pk, pq, tk, tq, w0):
        ck, cq = ChannelParams(gg, pk, tk), ChannelParams(gx, pq, tq)
        for r in bound_state_energy(w0, ck, cq):
            assert bound_state_residual(r, w0, ck, cq) < 1e-12

    @pytest.mark.parametrize("gt", [(0.5, 0.5), (1.0, 1.0), (2.0, 0.3)])
    def test_alpha_squared_matches_steady_state(self, gt):
        tk, tq = gt
        c = cfg(tk=tk, tq=tq)
        bs = bound_state_population(0.0, 0.0, c.channel_k, c.channel_q)
        assert bs.population == pytest.approx(steady_state_population(c), abs=1e-12)


def test_off_resonant_root_is_not_a_trapped_state():
    c = cfg(pk=math.pi / 2)
    states = bound_states(0.0, c.channel_k, c.channel_q)
    assert states and not any(s.resonant for s in states)
    assert steady_state_population(c) == 0.0
    assert abs(integrate_single(c, 60.0, 0.005).ce[-1]) ** 2 < 1e-10
