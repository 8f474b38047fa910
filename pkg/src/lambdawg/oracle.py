"""Brute-force reference: the atoms coupled to a finite window of discrete sine modes.

The single-excitation Schrodinger equation is integrated directly (RK4, in
the frame rotating at the atomic transition), with no delay equation in
sight. A frequency window of half-width ``W`` around each carrier stands in
for the infinite continuum; its mode spacing sets the revival time. Only the
perfect mirror is representable: the mirror is the sine mode profile itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernel
from .dde import Trajectory, _encode_shift
from .model import (
    TWO_PI,
    FrequencyShift,
    InvalidParameterError,
    SingleAtomConfig,
    TwoAtomConfig,
    wrap_phase,
)

DEFAULT_MODES = 4001
DEFAULT_WINDOW = 40.0
NORM_TOL = 1e-6


class OracleAccuracyError(RuntimeError):
    """Norm drift or resolution guard violated."""


@dataclass(frozen=True)
class ChannelGrid:
    """Discrete modes of one channel: wave numbers ``carrier + delta/v``, ``|delta| <= W``."""

    gamma: float
    velocity: float
    carrier: float
    n_modes: int = DEFAULT_MODES
    window: float = DEFAULT_WINDOW

    def __post_init__(self):
        if self.n_modes < 3 or self.n_modes % 2 == 0:
            raise InvalidParameterError(f"n_modes must be odd and >= 3, got {self.n_modes}")
        if not self.window > 0:
            raise InvalidParameterError("window must be > 0")
        if self.velocity <= 0 or self.gamma < 0:
            raise InvalidParameterError("need velocity > 0 and gamma >= 0")

    @property
    def detunings(self) -> np.ndarray:
        return np.linspace(-self.window, self.window, self.n_modes)

    @property
    def wave_numbers(self) -> np.ndarray:
        return self.carrier + self.detunings / self.velocity

    @property
    def spacing(self) -> float:
        """Wave-number spacing of the grid."""
        return 2.0 * self.window / ((self.n_modes - 1) * self.velocity)

    @property
    def revival_time(self) -> float:
        return TWO_PI / (self.spacing * self.velocity)

    def couplings(self, x: float) -> np.ndarray:
        return math.sqrt(self.gamma * self.velocity / math.pi) * np.sin(self.wave_numbers * x)

    def refined(self, factor: int = 2) -> "ChannelGrid":
        """Window scaled by ``factor`` at fixed spacing."""
        return ChannelGrid(
            gamma=self.gamma,
            velocity=self.velocity,
            carrier=self.carrier,
            n_modes=factor * (self.n_modes - 1) + 1,
            window=factor * self.window,
        )


@dataclass(frozen=True)
class ModeGrid:
    k: ChannelGrid
    q: ChannelGrid

    @property
    def window(self) -> float:
        return max(self.k.window, self.q.window)

    def refined(self, factor: int = 2) -> "ModeGrid":
        return ModeGrid(self.k.refined(factor), self.q.refined(factor))

    def check(self, t_max: float, dt: float):
        for ch in (self.k, self.q):
            if ch.spacing * ch.velocity * t_max >= TWO_PI:
                raise OracleAccuracyError(
                    f"t_max={t_max} reaches the mode-grid revival time {ch.revival_time:.4g}"
                )
        if dt * self.window > 0.1 * (1 + 1e-9):
            raise OracleAccuracyError(
                f"dt={dt} does not resolve the window: need dt*W <= 0.1 (W={self.window})"
            )


@dataclass
class ModeState:
    ce: np.ndarray
    ck: np.ndarray
    cq: np.ndarray

    def norm(self, grid: ModeGrid) -> float:
        return float(
            np.sum(np.abs(self.ce) ** 2)
            + grid.k.spacing * np.sum(np.abs(self.ck) ** 2)
            + grid.q.spacing * np.sum(np.abs(self.cq) ** 2)
        )


@dataclass
class OracleResult:
    times: np.ndarray
    ce: np.ndarray
    norm: np.ndarray
    state: ModeState
    grid: ModeGrid
    positions: tuple
    metadata: dict = field(default_factory=dict)

    @property
    def max_norm_drift(self) -> float:
        return float(np.max(np.abs(self.norm - self.norm[0])))

    def as_trajectory(self) -> Trajectory:
        dt = float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0
        return Trajectory(t0=float(self.times[0]), dt=dt, amplitudes=self.ce, metadata=self.metadata,
                          backend="oracle")


def _carrier_above_window(phase: float, delay: float, velocity: float, window: float) -> float:
    """Carrier with ``carrier*v*delay == phase (mod 2 pi)`` and every mode at positive wave number."""
    base = wrap_phase(phase) % TWO_PI
    span = velocity * delay
    n = 0
    while (base + TWO_PI * n) / span <= 1.5 * window / velocity:
        n += 1
    return (base + TWO_PI * n) / span


def grid_for_config(
    config: SingleAtomConfig, n_modes: int = DEFAULT_MODES, window: float = DEFAULT_WINDOW
) -> tuple:
    """Realize a directly specified single-atom config as geometry plus a mode grid.

    The atom position follows from the first active channel's delay; the
    other channel's velocity is then chosen to reproduce its delay. Carriers
    are picked so the phases match and the whole window has positive wave
    numbers. Returns ``(x0, ModeGrid)``.
    """
    active = [ch for ch in config.channels if ch.gamma > 0]
    if not active:
        x0 = 0.0
    else:
        lead = next((ch for ch in active if ch.delay > 0), active[0])
        x0 = lead.distance
        if any((ch.delay > 0) != (x0 > 0) for ch in active):
            raise InvalidParameterError("one delay is zero and the other is not: no common atom position")
    grids = []
    for ch in config.channels:
        if x0 > 0 and ch.delay > 0:
            v = 2.0 * x0 / ch.delay
            carrier = _carrier_above_window(ch.phase, ch.delay, v, window)
        else:
            v = ch.velocity
            carrier = 1.5 * window / v + 1.0
        grids.append(ChannelGrid(ch.gamma, v, carrier, n_modes, window))
    return x0, ModeGrid(*grids)


def grid_for_two_atoms(
    config: TwoAtomConfig, n_modes: int = DEFAULT_MODES, window: float = DEFAULT_WINDOW
) -> ModeGrid:
    """Mode grid using the config's velocities and carriers as given."""
    return ModeGrid(
        ChannelGrid(config.gamma_g, config.v_k, config.k0, n_modes, window),
        ChannelGrid(config.gamma_xi, config.v_q, config.q0, n_modes, window),
    )


def _evolve(positions, ce0, grid: ModeGrid, t_max: float, dt: float, shift: Optional[FrequencyShift],
            record_every: int = 1):
    grid.check(t_max, dt)
    det = np.concatenate([grid.k.detunings, grid.q.detunings])
    weights = np.concatenate(
        [np.full(grid.k.n_modes, grid.k.spacing), np.full(grid.q.n_modes, grid.q.spacing)]
    )
    G = np.array([np.concatenate([grid.k.couplings(x), grid.q.couplings(x)]) for x in positions])
    code, params, tt, tv = _encode_shift(shift if shift is not None else FrequencyShift())
    n_steps = int(math.ceil(t_max / dt - 1e-9))
    times, ce, norm, ce_end, ph_end, status = kernel.evolve_modes_rk4(
        det, G, weights, np.asarray(ce0, dtype=complex), dt, n_steps, record_every,
        code, params, tt, tv, NORM_TOL,
    )
    if status != 0:
        raise OracleAccuracyError(
            f"norm drift {abs(norm[-1] - norm[0]):.2e} at t={times[-1]:.4g}; reduce dt"
        )
    nk = grid.k.n_modes
    state = ModeState(ce=ce_end, ck=ph_end[:nk].copy(), cq=ph_end[nk:].copy())
    return OracleResult(times, ce, norm, state, grid, tuple(positions))


def default_dt(grid: ModeGrid) -> float:
    return 0.1 / grid.window


def evolve_modes_single(
    x0: float,
    grid: ModeGrid,
    t_max: float,
    dt: Optional[float] = None,
    ce0: complex = 1.0,
    shift: Optional[FrequencyShift] = None,
    record_every: int = 1,
) -> OracleResult:
    """One atom at ``x0`` coupled to both channel grids; returns the excitation series."""
    if x0 < 0:
        raise InvalidParameterError("atom position must be >= 0")
    dt = default_dt(grid) if dt is None else dt
    res = _evolve([x0], [ce0], grid, t_max, dt, shift, record_every)
    res.metadata = {"x0": x0}
    return res


def evolve_config_single(
    config: SingleAtomConfig, t_max: float, n_modes: int = DEFAULT_MODES,
    window: float = DEFAULT_WINDOW, dt: Optional[float] = None, record_every: int = 1,
) -> OracleResult:
    """Oracle run for a directly specified single-atom config (perfect mirror only)."""
    if config.reflectivity != 1.0:
        raise InvalidParameterError("the mode oracle only represents a perfect mirror (R = 1)")
    x0, grid = grid_for_config(config, n_modes, window)
    res = evolve_modes_single(x0, grid, t_max, dt, config.ce0, config.shift, record_every)
    res.metadata = {"x0": x0, "config": config}
    return res


def evolve_modes_two(
    config: TwoAtomConfig,
    grid: Optional[ModeGrid] = None,
    t_max: float = 10.0,
    dt: Optional[float] = None,
    record_every: int = 1,
) -> OracleResult:
    """Two atoms at ``x1``, ``x2`` sharing the mode continuum (perfect mirror only)."""
    if config.reflectivity != 1.0:
        raise InvalidParameterError("the mode oracle only represents a perfect mirror (R = 1)")
    grid = grid_for_two_atoms(config) if grid is None else grid
    dt = default_dt(grid) if dt is None else dt
    res = _evolve([config.x1, config.x2], [config.ce1_0, config.ce2_0], grid, t_max, dt, None,
                  record_every)
    res.metadata = {"config": config}
    return res


def realspace_field(state: ModeState, grid: ModeGrid, x: Sequence[float], chunk: int = 256) -> dict:
    """Per-channel field ``sqrt(2/pi) sum_mu c_mu sin(mu x) dmu`` at positions ``x >= 0``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(x < 0):
        raise InvalidParameterError("real-space positions must be >= 0")
    out = {}
    for name, ch, amps in (("k", grid.k, state.ck), ("q", grid.q, state.cq)):
        mu = ch.wave_numbers
        field_x = np.empty(x.shape, dtype=complex)
        for start in range(0, x.size, chunk):
            xs = x[start:start + chunk]
            field_x[start:start + chunk] = np.sin(np.outer(xs, mu)) @ amps
        out[name] = math.sqrt(2.0 / math.pi) * ch.spacing * field_x
    return out
