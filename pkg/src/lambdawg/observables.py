"""Output field at a detector beyond the atom, and probability-flux bookkeeping."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .dde import Trajectory
from .model import InvalidParameterError, SingleAtomConfig


@dataclass(frozen=True)
class OutputField:
    """Field amplitude of one channel at ``x0 + d`` against retarded time.

    ``emitter`` holds ``c_e`` sampled on the same retarded grid; it is what
    the mirror-leakage part of the flux balance needs.
    """

    channel: str
    offset: float
    t_bar: np.ndarray
    amplitude: np.ndarray
    emitter: np.ndarray
    gamma: float
    velocity: float
    truncated: bool = False

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.amplitude) ** 2

    @property
    def normalized_intensity(self) -> np.ndarray:
        """Intensity divided by ``Gamma_mu / (2 v_mu)``."""
        scale = self.gamma / (2.0 * self.velocity)
        if scale == 0:
            return np.zeros_like(self.t_bar)
        return self.intensity / scale

    @property
    def lab_times(self) -> np.ndarray:
        """Detector clock times ``t = t_bar + d / v``."""
        return self.t_bar + self.offset / self.velocity


def output_field(
    traj: Trajectory,
    config: SingleAtomConfig,
    channel: str,
    d: float = 0.0,
    t_bar=None,
) -> OutputField:
    """``psi_mu = sqrt(G/2v) e^{i mu0 d} [c(t_bar) - r e^{i phi} c(t_bar - tau) Theta(t_bar - tau)]``.

    ``d = 0`` stands for a detector just beyond the atom. Retarded times past
    the end of the trajectory are dropped and the result is flagged
    ``truncated``.
    """
    if channel not in ("k", "q"):
        raise InvalidParameterError(f"channel must be 'k' or 'q', got {channel!r}")
    if d < 0:
        raise InvalidParameterError(f"detector offset must be >= 0, got {d}")
    ch = config.channel_k if channel == "k" else config.channel_q
    grid = traj.times if t_bar is None else np.asarray(t_bar, dtype=float)
    truncated = False
    limit = traj.t_end + 1e-9 * traj.dt
    if np.any(grid > limit):
        truncated = True
        warnings.warn("retarded window exceeds trajectory range; output truncated", stacklevel=2)
        grid = grid[grid <= limit]

    ce_now = traj.sample(grid)
    delayed_t = grid - ch.delay
    on = delayed_t >= -1e-9 * traj.dt
    ce_late = np.zeros_like(ce_now)
    ce_late[on] = traj.sample(np.maximum(delayed_t[on], 0.0))
    ce_now = np.where(grid >= 0, ce_now, 0.0)

    phase = 1.0 if ch.carrier is None else complex(math.cos(ch.carrier * d), math.sin(ch.carrier * d))
    pref = math.sqrt(ch.gamma / (2.0 * ch.velocity)) * phase
    feedback = config.mirror_amplitude * ch.feedback_phasor
    amp = pref * (ce_now - feedback * ce_late)
    return OutputField(
        channel=channel,
        offset=float(d),
        t_bar=grid,
        amplitude=amp,
        emitter=ce_now,
        gamma=ch.gamma,
        velocity=ch.velocity,
        truncated=truncated,
    )


def _trapz(y, x):
    if len(x) < 2:
        return 0.0
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(x)))


def flux_components(field_k: OutputField, field_q: OutputField, config: SingleAtomConfig) -> dict:
    """Time-integrated probability leaving the atom-mirror region, split by route.

    ``detector``: ``int v_k |psi_k|^2 + v_q |psi_q|^2 dt`` past the atom.
    ``leakage``: ``(1 - R) sum_mu (G_mu/2) int |c_e|^2 dt``, the share of the
    mirror-bound emission transmitted through an imperfect mirror.
    """
    if field_k.t_bar.shape != field_q.t_bar.shape or not np.allclose(field_k.t_bar, field_q.t_bar):
        raise ValueError("output fields must share one retarded-time grid")
    t = field_k.t_bar
    if t.size < 2:
        return {"detector": 0.0, "leakage": 0.0, "total": 0.0}
    density = field_k.velocity * field_k.intensity + field_q.velocity * field_q.intensity
    detector = _trapz(density, t)
    leak_rate = (1.0 - config.reflectivity) * 0.5 * (field_k.gamma + field_q.gamma)
    leakage = leak_rate * _trapz(np.abs(field_k.emitter) ** 2, t) if leak_rate else 0.0

    tail = t >= t[0] + 0.95 * (t[-1] - t[0])
    tail_rate = density + leak_rate * np.abs(field_k.emitter) ** 2
    if _trapz(tail_rate[tail], t[tail]) > 1e-6:
        warnings.warn("flux grid ends before the emission has died out", stacklevel=2)
    return {"detector": detector, "leakage": leakage, "total": detector + leakage}


def integrated_flux(field_k: OutputField, field_q: OutputField, config: SingleAtomConfig) -> float:
    """Total probability emitted out of the atom-mirror region over the grid."""
    return flux_components(field_k, field_q, config)["total"]
