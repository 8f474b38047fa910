"""Closed-form results for the single atom in front of a perfect mirror.

Covers the interval-by-interval series solution for equal delays, the
Laplace-domain amplitude and its final value, the trapping condition, and
the atom-photon bound state (energy root and atomic occupation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from .model import (
    TWO_PI,
    ChannelParams,
    InvalidParameterError,
    SingleAtomConfig,
    wrap_phase,
)

CONDITION_TOL = 1e-12
POLE_TOL = 1e-14


class UnsupportedConfigurationError(InvalidParameterError):
    """The requested closed form does not apply to this configuration."""


class LaplacePoleError(ArithmeticError):
    pass


class InvalidRootError(ValueError):
    """Energy is not a normalizable bound state (or not a root at all)."""


def _require_ideal_mirror(config: SingleAtomConfig, what: str):
    if config.reflectivity != 1.0:
        raise UnsupportedConfigurationError(f"{what} needs a perfect mirror (R = 1)")
    if not config.shift.is_zero:
        raise UnsupportedConfigurationError(f"{what} needs a time-independent atom (no shift)")


# ---------------------------------------------------------------------------
# series solution


def series_solution(config: SingleAtomConfig, t):
    """Sum of delayed exponentials valid when both channels share one delay.

    Term ``n`` is ``a^n (t - n tau)^n / n! * exp(-b (t - n tau))`` with
    ``a = (Gg e^{i phi_k} + Gx e^{i phi_q})/2`` and ``b = (Gg + Gx)/2``; it is
    assembled in log space so that large ``n`` never overflows.
    """
    _require_ideal_mirror(config, "series solution")
    ck, cq = config.channel_k, config.channel_q
    taus = [ch.delay for ch in config.channels if ch.gamma > 0] or [ck.delay]
    tau = taus[0]
    if any(not math.isclose(x, tau, rel_tol=1e-12, abs_tol=0.0) for x in taus):
        raise UnsupportedConfigurationError("series solution needs tau_k == tau_q")
    if tau <= 0:
        raise UnsupportedConfigurationError(
            "series solution degenerates for zero delay; use the Markovian exponential"
        )
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t_arr < 0):
        raise ValueError("series solution is defined for t >= 0")
    a = 0.5 * (ck.gamma * ck.feedback_phasor + cq.gamma * cq.feedback_phasor)
    b = 0.5 * config.total_gamma
    out = np.exp(-b * t_arr).astype(complex)
    if a != 0 and t_arr.size:
        log_a = complex(math.log(abs(a)), math.atan2(a.imag, a.real))
        n_max = int(math.floor(t_arr.max() / tau))
        for n in range(1, n_max + 1):
            u = t_arr - n * tau
            live = u > 0
            if not np.any(live):
                break
            uu = u[live]
            log_term = n * (log_a + np.log(uu)) - math.lgamma(n + 1) - b * uu
            out[live] += np.exp(log_term)
    out *= config.ce0
    if np.ndim(t) == 0:
        return complex(out[0])
    return out


# ---------------------------------------------------------------------------
# Laplace domain / steady state


def _one_minus_exp(z):
    """``1 - exp(z)`` without cancellation for small ``|z|`` (complex, vectorized)."""
    z = np.asarray(z, dtype=complex)
    x, y = z.real, z.imag
    em1 = np.expm1(x) * np.cos(y) - 2.0 * np.sin(0.5 * y) ** 2
    return -(em1 + 1j * np.exp(x) * np.sin(y))


def steady_state_condition(phi_k: float, phi_q: float, gamma_g: float, gamma_xi: float) -> bool:
    """True when ``(Gg/2)(1 - e^{i phi_k}) + (Gx/2)(1 - e^{i phi_q})`` vanishes."""
    val = 0.5 * gamma_g * _one_minus_exp(1j * wrap_phase(phi_k)) + 0.5 * gamma_xi * _one_minus_exp(
        1j * wrap_phase(phi_q)
    )
    return bool(abs(complex(val)) < CONDITION_TOL)


def _config_condition(config: SingleAtomConfig) -> bool:
    ck, cq = config.channel_k, config.channel_q
    return steady_state_condition(ck.phase, cq.phase, ck.gamma, cq.gamma)


def _retardation_load(config: SingleAtomConfig) -> float:
    ck, cq = config.channel_k, config.channel_q
    return 1.0 + 0.5 * (ck.gamma * ck.delay + cq.gamma * cq.delay)


def steady_state_population(config: SingleAtomConfig) -> float:
    """Long-time ``|c_e|^2``: ``|c_e(0)|^2 / (1 + (Gg tau_k + Gx tau_q)/2)^2`` if trapped, else 0."""
    _require_ideal_mirror(config, "steady-state population")
    if not _config_condition(config):
        return 0.0
    return abs(config.ce0) ** 2 / _retardation_load(config) ** 2


def laplace_amplitude(config: SingleAtomConfig, s):
    """Laplace transform of ``c_e`` at complex ``s`` (scalar or array)."""
    _require_ideal_mirror(config, "Laplace amplitude")
    s_arr = np.asarray(s, dtype=complex)
    den = s_arr.copy()
    for ch in config.channels:
        if ch.gamma:
            den = den + 0.5 * ch.gamma * _one_minus_exp(1j * wrap_phase(ch.phase) - s_arr * ch.delay)
    if np.any(np.abs(den) < POLE_TOL):
        raise LaplacePoleError("s sits on a pole of the Laplace amplitude")
    out = config.ce0 / den
    if s_arr.ndim == 0:
        return complex(out)
    return out


def final_value(config: SingleAtomConfig) -> complex:
    """``lim_{s->0} s * c~(s)``: the long-time amplitude (not the population)."""
    _require_ideal_mirror(config, "final value")
    if not _config_condition(config):
        return 0j
    return config.ce0 / _retardation_load(config)


# ---------------------------------------------------------------------------
# bound state


@dataclass(frozen=True)
class BoundState:
    """Bound-state energy root and atomic occupation ``alpha = |c_e^bs|^2``.

    Photon amplitudes follow in closed form from the stored channels; see
    :meth:`photon_amplitude`. ``resonant`` records whether the root also
    zeroes the coupling at the pole (``(E - w0) tau + phi = 2 n pi`` on every
    active channel), which is what makes the state normalizable.
    """

    energy: float
    omega0: float
    alpha: float
    channel_k: ChannelParams
    channel_q: ChannelParams
    residual: float
    resonant: bool

    @property
    def population(self) -> float:
        """Long-time atomic population carried by this state, ``alpha**2``."""
        return self.alpha**2

    def photon_amplitude(self, channel: str, mu):
        """``c_mu^bs * conj(c_e^bs)`` as a function of wave number ``mu``.

        Needs the channel carrier; the atom sits at ``x0 = v tau / 2``.
        """
        ch = self.channel_k if channel == "k" else self.channel_q
        if ch.carrier is None:
            raise InvalidParameterError("photon amplitude needs the channel carrier wave number")
        mu = np.asarray(mu, dtype=float)
        x0 = ch.distance
        coupling = math.sqrt(ch.gamma * ch.velocity / math.pi) * np.sin(mu * x0)
        detuning = (self.energy - self.omega0) - (mu - ch.carrier) * ch.velocity
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.alpha * coupling / detuning


def _bs_function(eps, ck: ChannelParams, cq: ChannelParams):
    out = np.asarray(eps, dtype=float).copy()
    for ch in (ck, cq):
        if ch.gamma:
            out = out + ch.gamma / (2.0 * ch.velocity) * np.sin(eps * ch.delay + wrap_phase(ch.phase))
    return out


def _bs_derivative(eps, ck: ChannelParams, cq: ChannelParams):
    out = 1.0
    for ch in (ck, cq):
        if ch.gamma:
            out += ch.gamma * ch.delay / (2.0 * ch.velocity) * math.cos(eps * ch.delay + wrap_phase(ch.phase))
    return out


def bound_state_residual(energy: float, omega0: float, channel_k, channel_q) -> float:
    """``|E - w0 + sum Gmu/(2 v_mu) sin((E - w0) tau_mu + phi_mu)|``."""
    return abs(float(_bs_function(energy - omega0, channel_k, channel_q)))


def bound_state_energy(
    omega0: float, channel_k: ChannelParams, channel_q: ChannelParams, n_brackets: int = 10_000
) -> List[float]:
    """Real roots of the bound-state energy equation.

    The sine terms bound the shift ``E - w0`` by ``Gg/(2 v_k) + Gx/(2 v_q)``;
    that interval is scanned in ``n_brackets`` cells, every sign change is
    bisected, and each root is polished by Newton. Tangential roots without
    a sign change are not reported.
    """
    half_width = sum(ch.gamma / (2.0 * ch.velocity) for ch in (channel_k, channel_q))
    if half_width == 0:
        return [float(omega0)]
    grid = np.linspace(-half_width, half_width, n_brackets + 1)
    vals = _bs_function(grid, channel_k, channel_q)
    roots = []
    for i in range(n_brackets + 1):
        if vals[i] == 0.0:
            roots.append(float(grid[i]))
            continue
        if i < n_brackets and vals[i] * vals[i + 1] < 0:
            roots.append(_bisect_newton(grid[i], grid[i + 1], vals[i], channel_k, channel_q))
    roots.sort()
    unique: list = []
    for r in roots:
        if not unique or abs(r - unique[-1]) > 1e-10 * max(1.0, half_width):
            unique.append(r)
    return [float(omega0) + r for r in unique]


def _bisect_newton(lo, hi, f_lo, ck, cq):
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        f_mid = float(_bs_function(mid, ck, cq))
        if f_mid == 0.0:
            return mid
        if (f_mid < 0) == (f_lo < 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    for _ in range(3):
        d = _bs_derivative(x, ck, cq)
        if d == 0:
            break
        step = float(_bs_function(x, ck, cq)) / d
        if not lo <= x - step <= hi:
            break
        x -= step
    return x


def bound_state_population(
    energy: float, omega0: float, channel_k: ChannelParams, channel_q: ChannelParams
) -> BoundState:
    """Atomic occupation ``alpha`` of the bound state at ``energy``.

    ``alpha = 1 / (1 + (Gg tau_k/2) cos(theta_k) + (Gx tau_q/2) cos(theta_q))``
    with ``theta_mu = (E - w0) tau_mu + phi_mu``.
    """
    scale = max(1.0, abs(omega0), sum(ch.gamma / ch.velocity for ch in (channel_k, channel_q)))
    residual = bound_state_residual(energy, omega0, channel_k, channel_q)
    if residual > 1e-9 * scale:
        raise InvalidRootError(f"energy {energy} is not a root (residual {residual:.3e})")
    eps = energy - omega0
    denom = 1.0
    resonant = True
    for ch in (channel_k, channel_q):
        if not ch.gamma:
            continue
        theta = eps * ch.delay + wrap_phase(ch.phase)
        denom += 0.5 * ch.gamma * ch.delay * math.cos(theta)
        if abs(math.remainder(theta, TWO_PI)) > 1e-9:
            resonant = False
    if not denom > 0:
        raise InvalidRootError(f"non-normalizable root: occupation denominator {denom:.3e} <= 0")
    return BoundState(
        energy=float(energy),
        omega0=float(omega0),
        alpha=1.0 / denom,
        channel_k=channel_k,
        channel_q=channel_q,
        residual=residual,
        resonant=resonant,
    )


def bound_states(omega0: float, channel_k: ChannelParams, channel_q: ChannelParams) -> List[BoundState]:
    """All roots paired with their occupations; non-normalizable roots are dropped."""
    out = []
    for e in bound_state_energy(omega0, channel_k, channel_q):
        try:
            out.append(bound_state_population(e, omega0, channel_k, channel_q))
        except InvalidRootError:
            continue
    return out
