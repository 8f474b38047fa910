"""Method-of-steps integration of the retarded excitation-amplitude equations.

Single atom::

    c' = -(Gg/2) c + r (Gg/2) e^{i phi_k} c(t - tau_k) Theta(t - tau_k)
         -(Gx/2) c + r (Gx/2) e^{i phi_q} c(t - tau_q) Theta(t - tau_q)
         - i Delta(t) c

Two atoms add direct (``tau_-``) and mirror-bounced (``tau_+``) cross terms.
Delays that are exactly zero become instantaneous coefficients; terms that
share source, target and delay are merged before stepping, so mirror-image
cancellations (atom at the mirror, coincident atoms) are exact.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import kernel
from ._kernel_py import (
    SHIFT_NONE,
    SHIFT_SAMPLED,
    SHIFT_SINUSOID,
    SHIFT_STEP,
    STATUS_OK,
    HistoryBuffer,
)
from .model import (
    FrequencyShift,
    InvalidParameterError,
    SingleAtomConfig,
    TwoAtomConfig,
    unit_phasor,
)

__all__ = [
    "HistoryBuffer",
    "IntegrationDivergedError",
    "StepSizeError",
    "Trajectory",
    "integrate_single",
    "integrate_two_atom",
    "symmetric_antisymmetric",
]


class StepSizeError(InvalidParameterError):
    """The grid step is too coarse for the delays of the problem."""


class IntegrationDivergedError(RuntimeError):
    """A NaN or Inf amplitude appeared during stepping."""


@dataclass(frozen=True)
class Trajectory:
    """Complex amplitudes on the uniform grid ``t0 + n*dt``, one row per atom."""

    t0: float
    dt: float
    amplitudes: np.ndarray
    metadata: Any = None
    error_bound: float = 0.0
    backend: str = field(default="", compare=False)

    @property
    def n_rows(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def n_steps(self) -> int:
        return self.amplitudes.shape[1] - 1

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.amplitudes.shape[1])

    @property
    def t_end(self) -> float:
        return self.t0 + self.dt * self.n_steps

    @property
    def ce(self) -> np.ndarray:
        """First (or only) amplitude row."""
        return self.amplitudes[0]

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def sample(self, t, row: int = 0) -> np.ndarray:
        """Amplitude at arbitrary times by local 4-point Lagrange interpolation.

        Times before ``t0`` give 0 (vacuum pre-history); times past the end
        raise, since that would be extrapolation.
        """
        t = np.atleast_1d(np.asarray(t, dtype=float))
        y = self.amplitudes[row]
        n = self.n_steps
        s = (t - self.t0) / self.dt
        if np.any(s > n * (1 + 1e-12) + 1e-9):
            raise ValueError("sample time beyond trajectory end")
        out = np.zeros(t.shape, dtype=complex)
        ok = s >= -1e-9
        s_ok = np.clip(s[ok], 0.0, n)
        if n < 3:
            out[ok] = np.interp(s_ok, np.arange(n + 1), y.real) + 1j * np.interp(
                s_ok, np.arange(n + 1), y.imag
            )
            return out
        base = np.clip(np.floor(s_ok).astype(int) - 1, 0, n - 3)
        x = s_ok - base
        nodes = base[:, None] + np.arange(4)[None, :]
        vals = y[nodes]
        acc = np.zeros(s_ok.shape, dtype=complex)
        for j in range(4):
            w = np.ones_like(x)
            for k in range(4):
                if k != j:
                    w *= (x - k) / (j - k)
            acc += w * vals[:, j]
        out[ok] = acc
        return out


@dataclass
class _Problem:
    inst: np.ndarray
    tgt: list = field(default_factory=list)
    src: list = field(default_factory=list)
    coef: list = field(default_factory=list)
    delay: list = field(default_factory=list)

    def add(self, tgt: int, src: int, coef: complex, delay: float):
        if coef == 0:
            return
        if delay == 0.0:
            self.inst[tgt, src] += coef
            return
        for j in range(len(self.coef)):
            if self.tgt[j] == tgt and self.src[j] == src and self.delay[j] == delay:
                self.coef[j] += coef
                return
        self.tgt.append(tgt)
        self.src.append(src)
        self.coef.append(complex(coef))
        self.delay.append(float(delay))

    def pruned(self):
        keep = [j for j, c in enumerate(self.coef) if c != 0]
        return (
            np.array([self.tgt[j] for j in keep], dtype=np.int64),
            np.array([self.src[j] for j in keep], dtype=np.int64),
            np.array([self.coef[j] for j in keep], dtype=complex),
            np.array([self.delay[j] for j in keep], dtype=float),
        )


def _encode_shift(shift: FrequencyShift):
    params = np.array([shift.amplitude, shift.t0, shift.width, shift.omega], dtype=float)
    empty = np.zeros(0)
    if shift.kind == "none" or shift.is_zero:
        return SHIFT_NONE, params, empty, empty
    if shift.kind == "smooth-step":
        return SHIFT_STEP, params, empty, empty
    if shift.kind == "sinusoid":
        return SHIFT_SINUSOID, params, empty, empty
    return SHIFT_SAMPLED, params, np.asarray(shift.times), np.asarray(shift.values)


def _n_steps(t_max: float, dt: float) -> int:
    if not (dt > 0 and math.isfinite(dt)):
        raise InvalidParameterError(f"dt must be positive and finite, got {dt}")
    if not t_max >= dt:
        raise InvalidParameterError(f"t_max must be >= dt, got t_max={t_max}, dt={dt}")
    return int(math.ceil(t_max / dt - 1e-9))


def _check_step(delays, dt: float):
    nonzero = [d for d in delays if d > 0]
    if not nonzero:
        return
    dmin = min(nonzero)
    if dt > dmin * (1 + 1e-9):
        raise StepSizeError(
            f"dt={dt} exceeds the smallest nonzero delay {dmin}; "
            "history lookups would extrapolate"
        )
    if dt > dmin / 10 * (1 + 1e-9):
        warnings.warn(
            f"dt={dt} is coarser than a tenth of the smallest delay {dmin}; "
            "accuracy near delay boundaries will suffer",
            stacklevel=3,
        )


def _run(prob: _Problem, shift: FrequencyShift, y0, dt, n_steps, rate_scale, metadata):
    tgt, src, coef, delay = prob.pruned()
    code, params, tt, tv = _encode_shift(shift)
    Y, status, last = kernel.integrate_linear_dde(
        prob.inst, code, params, tt, tv, tgt, src, coef, delay, np.asarray(y0, complex), dt, n_steps
    )
    if status != STATUS_OK:
        raise IntegrationDivergedError(f"non-finite amplitude at step {last + 1} (t={(last + 1) * dt})")
    t_max = n_steps * dt
    # RK4 global error estimate plus rounding accumulation
    bound = rate_scale * t_max * (rate_scale * dt) ** 4 + 4e-16 * math.sqrt(n_steps + 1) * 10
    return Trajectory(
        t0=0.0,
        dt=dt,
        amplitudes=np.ascontiguousarray(Y.T),
        metadata=metadata,
        error_bound=bound,
        backend=kernel.BACKEND,
    )


def integrate_single(config: SingleAtomConfig, t_max: float, dt: float) -> Trajectory:
    """Integrate the one-atom, two-channel retarded equation on ``[0, t_max]``."""
    n_steps = _n_steps(t_max, dt)
    _check_step([ch.delay for ch in config.channels if ch.gamma > 0], dt)
    r = config.mirror_amplitude
    prob = _Problem(inst=np.zeros((1, 1), dtype=complex))
    for ch in config.channels:
        half = 0.5 * ch.gamma
        prob.add(0, 0, -half, 0.0)
        prob.add(0, 0, r * half * ch.feedback_phasor, ch.delay)
    shift_scale = 0.0
    if not config.shift.is_zero:
        if config.shift.kind == "sampled":
            shift_scale = max(abs(v) for v in config.shift.values)
        else:
            shift_scale = abs(config.shift.amplitude) * max(1.0, abs(config.shift.omega))
    rate = config.total_gamma + shift_scale
    return _run(prob, config.shift, [config.ce0], dt, n_steps, rate, config)


def integrate_two_atom(config: TwoAtomConfig, t_max: float, dt: float) -> Trajectory:
    """Integrate the coupled retarded equations of two atoms at ``x1 <= x2``.

    With an imperfect mirror, ``r`` multiplies the mirror-bounced terms
    (delays ``tau_j`` and ``tau_+``) while the direct path ``tau_-`` is left
    untouched.
    """
    n_steps = _n_steps(t_max, dt)
    r = config.mirror_amplitude
    prob = _Problem(inst=np.zeros((2, 2), dtype=complex))
    delays = []
    for ch, gamma in config.channel_rates().items():
        if gamma == 0:
            continue
        d = config.pair_delays(ch)
        delays += [d.tau1, d.tau2, d.tau_minus, d.tau_plus]
        half = 0.5 * gamma
        for me, other, tau_self, phi_self in ((0, 1, d.tau1, d.phi1), (1, 0, d.tau2, d.phi2)):
            prob.add(me, me, -half, 0.0)
            prob.add(me, me, r * half * unit_phasor(phi_self), tau_self)
            prob.add(me, other, -half * unit_phasor(d.phi_minus), d.tau_minus)
            prob.add(me, other, r * half * unit_phasor(d.phi_plus), d.tau_plus)
    _check_step(delays, dt)
    rate = 2.0 * (config.gamma_g + config.gamma_xi)
    return _run(prob, FrequencyShift(), [config.ce1_0, config.ce2_0], dt, n_steps, rate, config)


def symmetric_antisymmetric(traj: Trajectory):
    """Return ``(P+, P-)`` with ``P± = (c_e1 ± c_e2)/sqrt(2)``."""
    amps = np.asarray(traj.amplitudes if isinstance(traj, Trajectory) else traj)
    if amps.ndim != 2 or amps.shape[0] != 2:
        raise ValueError(f"expected a two-row trajectory, got shape {amps.shape}")
    c1, c2 = amps
    return (c1 + c2) / math.sqrt(2.0), (c1 - c2) / math.sqrt(2.0)
