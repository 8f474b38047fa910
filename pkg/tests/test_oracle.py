import math

import numpy as np
import pytest

from lambdawg.dde import integrate_single, integrate_two_atom, symmetric_antisymmetric
from lambdawg.model import TWO_PI, ChannelParams, InvalidParameterError, SingleAtomConfig, TwoAtomConfig
from lambdawg.observables import output_field
from lambdawg.oracle import (
    NORM_TOL,
    ChannelGrid,
    ModeGrid,
    ModeState,
    OracleAccuracyError,
    evolve_config_single,
    evolve_modes_single,
    evolve_modes_two,
    grid_for_config,
    realspace_field,
)

TRAPPED = SingleAtomConfig(ChannelParams(1.0, TWO_PI, 1.0), ChannelParams(1.0, TWO_PI, 1.0))
K0 = 10 * TWO_PI


def small_grid(gamma=1.0, n=801, w=20.0, carrier=40.0):
    ch = ChannelGrid(gamma, 1.0, carrier, n, w)
    return ModeGrid(ch, ch)


@pytest.fixture(scope="module")
def trapped_run():
    return evolve_config_single(TRAPPED, 5.0)


@pytest.fixture(scope="module")
def trapped_dde():
    return integrate_single(TRAPPED, 10.0, 1e-3)


def test_grid_reproduces_phase_and_delay():
    x0, grid = grid_for_config(
        SingleAtomConfig(ChannelParams(1.0, 1.1, 0.4), ChannelParams(2.0, -2.0, 1.0))
    )
    assert x0 == pytest.approx(0.2)
    for ch, tau, phi in ((grid.k, 0.4, 1.1), (grid.q, 1.0, -2.0)):
        assert 2 * x0 / ch.velocity == pytest.approx(tau)
        assert math.cos(ch.carrier * ch.velocity * tau) == pytest.approx(math.cos(phi), abs=1e-9)
        assert ch.wave_numbers.min() > 0


def test_norm_conserved(trapped_run):
    assert trapped_run.max_norm_drift < NORM_TOL
    assert trapped_run.norm[-1] == pytest.approx(1.0, abs=1e-6)


def test_decoupled_atom_stays_excited():
    res = evolve_modes_single(0.5, small_grid(gamma=0.0), 3.0, ce0=0.6 + 0.8j)
    assert np.max(np.abs(res.ce[0] - (0.6 + 0.8j))) < 1e-14


def test_window_error_is_a_short_time_transient(trapped_run, trapped_dde):
    # a +-W window cannot follow the instant onset of decay; that error dies out after a few 1/W
    t = trapped_run.times
    err = np.abs(trapped_run.ce[0] - trapped_dde.sample(t))
    assert np.max(err[t > 0.3]) < 1e-2
    assert np.max(err[t > 0.3]) < 0.5 * np.max(err[t < 0.3])


class TestRealSpace:
    def test_vanishes_at_mirror(self, trapped_run):
        f = realspace_field(trapped_run.state, trapped_run.grid, [0.0])
        assert f["k"][0] == 0 and f["q"][0] == 0

    def test_vacuum(self):
        grid = small_grid()
        vac = ModeState(0j, np.zeros(801, complex), np.zeros(801, complex))
        f = realspace_field(vac, grid, np.linspace(0, 5, 11))
        assert not np.any(f["k"]) and not np.any(f["q"])

    def test_negative_position(self, trapped_run):
        with pytest.raises(InvalidParameterError):
            realspace_field(trapped_run.state, trapped_run.grid, [-0.1])

    def test_snapshot_matches_output_field(self, trapped_run, trapped_dde):
        T, x0 = 5.0, trapped_run.metadata["x0"]
        tb = np.linspace(0.3, 4.7, 200)
        # skip the echo edge at t_bar = tau, which the finite window smears out
        tb = tb[np.abs(tb - 1.0) > 0.3]
        f = realspace_field(trapped_run.state, trapped_run.grid, x0 + T - tb)
        for ch in "kq":
            out = output_field(trapped_dde, TRAPPED, ch, t_bar=tb)
            assert np.max(np.abs(np.abs(f[ch]) - np.abs(out.amplitude))) < 5e-2

    def test_local_density_accounts_for_norm(self, trapped_run):
        x = np.linspace(0.0, 10.0, 8001)
        f = realspace_field(trapped_run.state, trapped_run.grid, x)
        dens = np.abs(f["k"]) ** 2 + np.abs(f["q"]) ** 2
        photons = float(np.sum(0.5 * (dens[1:] + dens[:-1]) * np.diff(x)))
        assert photons + abs(trapped_run.state.ce[0]) ** 2 == pytest.approx(1.0, abs=1e-3)


@pytest.mark.slow
def test_refinement_shrinks_discrepancy(trapped_dde):
    base = grid_for_config(TRAPPED)[1]
    errs = []
    for grid in (base, base.refined(2), base.refined(4)):
        res = evolve_modes_single(0.5, grid, 10.0, record_every=10)
        assert res.max_norm_drift < NORM_TOL
        errs.append(np.max(np.abs(res.ce[0] - trapped_dde.sample(res.times))))
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-2


class TestTwoAtoms:
    def test_dark_state_is_frozen(self):
        s = 2 ** -0.5
        cfg = TwoAtomConfig(0.5, 0.5, k0=K0, q0=K0 + TWO_PI, ce1_0=s, ce2_0=-s)
        res = evolve_modes_two(cfg, t_max=20.0, record_every=20)
        _, minus = symmetric_antisymmetric(res.ce)
        assert np.max(np.abs(minus - minus[0])) < 1e-6
        assert res.max_norm_drift < NORM_TOL

    def test_atom_at_mirror_decouples(self):
        cfg = TwoAtomConfig(0.0, 0.7, k0=K0, q0=K0 + 1.3, ce1_0=0.6, ce2_0=0.8)
        res = evolve_modes_two(cfg, t_max=10.0, record_every=10)
        assert np.max(np.abs(np.abs(res.ce[0]) - 0.6)) < 1e-2

    def test_decoupled_pair(self):
        cfg = TwoAtomConfig(0.3, 0.9, gamma_g=0.0, gamma_xi=0.0, k0=K0, q0=K0, ce1_0=0.6, ce2_0=0.8j)
        res = evolve_modes_two(cfg, small_grid(gamma=0.0), t_max=2.0)
        assert np.max(np.abs(res.ce[0] - 0.6)) < 1e-14
        assert np.max(np.abs(res.ce[1] - 0.8j)) < 1e-14

    @pytest.mark.slow
    def test_symmetric_pair_matches_dde(self):
        cfg = TwoAtomConfig(0.5, 0.5, gamma_xi=0.0, k0=K0, q0=K0 + TWO_PI)
        grid = ModeGrid(
            ChannelGrid(1.0, 1.0, K0, 16001, 160.0), ChannelGrid(0.0, 1.0, K0 + TWO_PI, 3, 1e-3)
        )
        res = evolve_modes_two(cfg, grid, t_max=10.0, record_every=40)
        tr = integrate_two_atom(cfg, 10.0, 1e-3)
        ref = np.vstack([tr.sample(res.times, r) for r in range(2)])
        assert np.max(np.abs(ref - res.ce)) < 1e-2


class TestGuards:
    def test_revival_time(self):
        grid = small_grid(n=101)
        with pytest.raises(OracleAccuracyError, match="revival"):
            evolve_modes_single(0.5, grid, grid.k.revival_time + 1.0)

    def test_step_must_resolve_window(self):
        with pytest.raises(OracleAccuracyError, match="resolve"):
            evolve_modes_single(0.5, small_grid(), 1.0, dt=0.01)

    def test_norm_drift_aborts(self):
        with pytest.raises(OracleAccuracyError, match="norm drift"):
            evolve_modes_single(0.5, small_grid(gamma=200.0, w=2.0), 1.0, dt=0.05)

    def test_imperfect_mirror_refused(self):
        with pytest.raises(InvalidParameterError):
            evolve_config_single(
                SingleAtomConfig(ChannelParams(1.0, 0.0, 1.0), ChannelParams(1.0, 0.0, 1.0), 0.8), 1.0
            )
        with pytest.raises(InvalidParameterError):
            evolve_modes_two(TwoAtomConfig(0.1, 0.2, reflectivity=0.5))

    @pytest.mark.parametrize("n", [4, 1])
    def test_grid_size(self, n):
        with pytest.raises(InvalidParameterError):
            ChannelGrid(1.0, 1.0, 10.0, n)

    def test_inconsistent_delays(self):
        with pytest.raises(InvalidParameterError):
            grid_for_config(SingleAtomConfig(ChannelParams(1.0, 0.0, 0.0), ChannelParams(1.0, 0.0, 1.0)))
