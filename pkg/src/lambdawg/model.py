"""Parameter records for a Lambda-type atom (or a pair of them) in front of a mirror.

All quantities are dimensionless: the reference decay rate sets the unit of
rate, so times are in units of its inverse and velocities default to 1.
Amplitudes live in the frame rotating at the excited-state energy, which is
why the atomic and photon carrier frequencies never enter the dynamics.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

TWO_PI = 2.0 * math.pi


class InvalidParameterError(ValueError):
    """Raised when a configuration violates a physical or numerical constraint."""


def wrap_phase(phase: float) -> float:
    """Reduce a phase to [-pi, pi] so that exact multiples of 2*pi map to 0."""
    return math.remainder(phase, TWO_PI)


def unit_phasor(phase: float) -> complex:
    return cmath.exp(1j * wrap_phase(phase))


def mirror_amplitude(reflectivity: float) -> complex:
    """Complex backward-reflection amplitude r = R + i*sqrt(R(1-R)); |r|^2 = R."""
    R = float(reflectivity)
    if not 0.0 <= R <= 1.0:
        raise InvalidParameterError(f"reflectivity must lie in [0, 1], got {R}")
    return complex(R, math.sqrt(R * (1.0 - R)))


@dataclass(frozen=True)
class ChannelParams:
    """One decay channel of the atom: rate, mirror phase, round-trip delay.

    ``carrier`` is the resonant wave number; it is only needed by the mode
    oracle and by the detector phase factor, so it may be left unset when the
    channel is specified directly through (gamma, phase, delay).
    """

    gamma: float
    phase: float = 0.0
    delay: float = 0.0
    velocity: float = 1.0
    carrier: Optional[float] = None

    def __post_init__(self):
        for name in ("gamma", "phase", "delay", "velocity"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidParameterError(f"{name} must be finite")
        if self.gamma < 0:
            raise InvalidParameterError(f"gamma must be >= 0, got {self.gamma}")
        if self.delay < 0:
            raise InvalidParameterError(f"delay must be >= 0, got {self.delay}")
        if self.velocity <= 0:
            raise InvalidParameterError(f"velocity must be > 0, got {self.velocity}")

    @property
    def feedback_phasor(self) -> complex:
        return unit_phasor(self.phase)

    @property
    def distance(self) -> float:
        """Atom-mirror distance implied by the delay, x0 = v*tau/2."""
        return 0.5 * self.velocity * self.delay


def channel_from_geometry(x0: float, v: float, mu0: float, gamma: float) -> ChannelParams:
    """Build a channel from the atom position, group velocity and carrier.

    The round trip to the mirror takes ``2*x0/v`` and accumulates the phase
    ``2*mu0*x0``.
    """
    if not v > 0:
        raise InvalidParameterError(f"velocity must be > 0, got {v}")
    if x0 < 0:
        raise InvalidParameterError(f"atom position must be >= 0, got {x0}")
    return ChannelParams(
        gamma=gamma, phase=2.0 * mu0 * x0, delay=2.0 * x0 / v, velocity=v, carrier=mu0
    )


SHIFT_KINDS = ("none", "smooth-step", "sinusoid", "sampled")


@dataclass(frozen=True)
class FrequencyShift:
    """Time-dependent atomic frequency shift Delta(t).

    * ``smooth-step``: ``A*(1 + tanh((t - t0)/w))/2``
    * ``sinusoid``: ``A*sin(omega*(t - t0))`` for ``t >= t0``, zero before
    * ``sampled``: linear interpolation of ``(times, values)``, zero outside
      (continuous only if the table starts and ends at zero)
    """

    kind: str = "none"
    amplitude: float = 0.0
    t0: float = 0.0
    width: float = 1.0
    omega: float = 0.0
    times: Optional[tuple] = None
    values: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in SHIFT_KINDS:
            raise InvalidParameterError(
                f"unknown shift kind {self.kind!r}; expected one of {SHIFT_KINDS}"
            )
        if self.kind == "smooth-step" and not self.width > 0:
            raise InvalidParameterError("smooth-step width must be > 0")
        if self.kind == "sampled":
            if self.times is None or self.values is None:
                raise InvalidParameterError("sampled shift needs times and values")
            ts = np.asarray(self.times, dtype=float)
            vs = np.asarray(self.values, dtype=float)
            if ts.ndim != 1 or ts.shape != vs.shape or ts.size < 2:
                raise InvalidParameterError("sampled shift table must be two equal 1-D columns")
            if np.any(np.diff(ts) <= 0):
                raise InvalidParameterError("sampled shift time column must be strictly increasing")
            if not (np.all(np.isfinite(ts)) and np.all(np.isfinite(vs))):
                raise InvalidParameterError("sampled shift table must be finite")
            object.__setattr__(self, "times", tuple(ts.tolist()))
            object.__setattr__(self, "values", tuple(vs.tolist()))

    @classmethod
    def sampled(cls, times: Sequence[float], values: Sequence[float]) -> "FrequencyShift":
        return cls(kind="sampled", times=tuple(times), values=tuple(values))

    @property
    def is_zero(self) -> bool:
        if self.kind == "none":
            return True
        if self.kind == "sampled":
            return not any(self.values)
        return self.amplitude == 0.0

    def __call__(self, t):
        return shift_value(self, t)


def shift_value(shift: FrequencyShift, t):
    """Evaluate Delta(t); accepts a scalar or an array of times."""
    t_arr = np.asarray(t, dtype=float)
    if shift.kind == "none":
        out = np.zeros_like(t_arr)
    elif shift.kind == "smooth-step":
        out = 0.5 * shift.amplitude * (1.0 + np.tanh((t_arr - shift.t0) / shift.width))
    elif shift.kind == "sinusoid":
        out = np.where(
            t_arr >= shift.t0, shift.amplitude * np.sin(shift.omega * (t_arr - shift.t0)), 0.0
        )
    else:
        out = np.interp(t_arr, shift.times, shift.values, left=0.0, right=0.0)
    if np.ndim(t) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class SingleAtomConfig:
    channel_k: ChannelParams
    channel_q: ChannelParams
    reflectivity: float = 1.0
    shift: FrequencyShift = field(default_factory=FrequencyShift)
    ce0: complex = 1.0 + 0.0j

    def __post_init__(self):
        mirror_amplitude(self.reflectivity)
        object.__setattr__(self, "ce0", complex(self.ce0))
        if abs(self.ce0) > 1.0 + 1e-12:
            raise InvalidParameterError(f"|c_e(0)| must be <= 1, got {abs(self.ce0)}")

    @classmethod
    def symmetric(
        cls,
        gamma: float = 1.0,
        phase: float = TWO_PI,
        delay: float = 1.0,
        **kwargs,
    ) -> "SingleAtomConfig":
        """Both channels with the same rate, phase and delay."""
        ch = ChannelParams(gamma=gamma, phase=phase, delay=delay)
        return cls(channel_k=ch, channel_q=ch, **kwargs)

    @property
    def mirror_amplitude(self) -> complex:
        return mirror_amplitude(self.reflectivity)

    @property
    def channels(self) -> tuple:
        return (self.channel_k, self.channel_q)

    @property
    def total_gamma(self) -> float:
        return self.channel_k.gamma + self.channel_q.gamma


@dataclass(frozen=True)
class PairDelays:
    """Delays and phases of one channel for two atoms at x1 <= x2."""

    tau1: float
    tau2: float
    tau_minus: float
    tau_plus: float
    phi1: float
    phi2: float
    phi_minus: float
    phi_plus: float


@dataclass(frozen=True)
class TwoAtomConfig:
    """Two identical Lambda atoms at positions ``x1 <= x2`` sharing both channels."""

    x1: float
    x2: float
    gamma_g: float = 1.0
    gamma_xi: float = 1.0
    v_k: float = 1.0
    v_q: float = 1.0
    k0: float = 0.0
    q0: float = 0.0
    reflectivity: float = 1.0
    ce1_0: complex = 1.0 + 0.0j
    ce2_0: complex = 0.0j

    def __post_init__(self):
        if not 0.0 <= self.x1 <= self.x2:
            raise InvalidParameterError(f"need 0 <= x1 <= x2, got x1={self.x1}, x2={self.x2}")
        if self.gamma_g < 0 or self.gamma_xi < 0:
            raise InvalidParameterError("decay rates must be >= 0")
        if self.v_k <= 0 or self.v_q <= 0:
            raise InvalidParameterError("velocities must be > 0")
        mirror_amplitude(self.reflectivity)
        object.__setattr__(self, "ce1_0", complex(self.ce1_0))
        object.__setattr__(self, "ce2_0", complex(self.ce2_0))
        if abs(self.ce1_0) ** 2 + abs(self.ce2_0) ** 2 > 1.0 + 1e-12:
            raise InvalidParameterError("initial two-atom populations exceed 1")

    def pair_delays(self, channel: str) -> PairDelays:
        if channel == "k":
            v, mu0 = self.v_k, self.k0
        elif channel == "q":
            v, mu0 = self.v_q, self.q0
        else:
            raise InvalidParameterError(f"channel must be 'k' or 'q', got {channel!r}")
        x1, x2 = self.x1, self.x2
        return PairDelays(
            tau1=2.0 * x1 / v,
            tau2=2.0 * x2 / v,
            tau_minus=(x2 - x1) / v,
            tau_plus=(x2 + x1) / v,
            phi1=2.0 * x1 * mu0,
            phi2=2.0 * x2 * mu0,
            phi_minus=(x2 - x1) * mu0,
            phi_plus=(x2 + x1) * mu0,
        )

    @property
    def mirror_amplitude(self) -> complex:
        return mirror_amplitude(self.reflectivity)

    def channel_rates(self) -> dict:
        return {"k": self.gamma_g, "q": self.gamma_xi}
