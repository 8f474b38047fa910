"""Named presets that expand into fully explicit scenario mappings.

Each preset is a list of ``(label, mapping)`` pairs; the mappings contain
every physical key, so writing them back out gives a standalone scenario
file. ``2*pi`` stands for any phase that is a multiple of a full turn.
"""

from __future__ import annotations

import math
from typing import Dict, List, Tuple

TWO_PI = 2.0 * math.pi

Preset = List[Tuple[str, dict]]


def _single(mode: str, tau_k: float, tau_q: float, t_max: float, *, gamma_g=1.0, gamma_xi=1.0,
            phi_k=TWO_PI, phi_q=TWO_PI, reflectivity=1.0, steps_per_delay=200, **extra) -> dict:
    out = {
        "mode": mode,
        "gamma_g": gamma_g,
        "gamma_xi": gamma_xi,
        "phi_k": phi_k,
        "phi_q": phi_q,
        "tau_k": tau_k,
        "tau_q": tau_q,
        "reflectivity": reflectivity,
        "shift_kind": "none",
        "t_max": t_max,
        "dt": min(tau_k, tau_q) / steps_per_delay,
    }
    out.update(extra)
    return out


def _phase_sweep(tau: float, t_max: float) -> Preset:
    return [
        ("phi_2npi", _single("single", tau, tau, t_max)),
        ("phi_k_half_pi", _single("single", tau, tau, t_max, phi_k=0.5 * math.pi)),
        ("phi_k_pi", _single("single", tau, tau, t_max, phi_k=math.pi)),
    ]


def _fig3a() -> Preset:
    return [
        (f"tau_{tk:g}_{tq:g}", _single("single", tk, tq, 10.0))
        for tk, tq in ((1.5, 1.5), (0.4, 1.0), (0.2, 0.5))
    ]


def _fig3b() -> Preset:
    return [
        (f"gamma_xi_{gx:g}", _single("single", 0.4, 1.0, 10.0, gamma_xi=gx))
        for gx in (0.3, 1.0, 3.0)
    ]


def _fig5a() -> Preset:
    shift = {"shift_kind": "smooth-step", "shift_amp": 2.0, "shift_t0": 15.0, "shift_w": 0.2}
    cfg = _single("output-field", 1.0, 2.0, 40.0)
    cfg.update(shift)
    return [("smooth_step", cfg)]


def _fig5b() -> Preset:
    shift = {"shift_kind": "sinusoid", "shift_amp": 2.0, "shift_t0": 5.0, "shift_omega": 20.0}
    cfg = _single("output-field", 0.1, 0.2, 40.0)
    cfg.update(shift)
    return [("sinusoid", cfg)]


def _fig6() -> Preset:
    out: Preset = []
    for R in (1.0, 0.8, 0.0):
        for mode, tag in (("single", "population"), ("output-field", "field")):
            out.append((f"R_{R:g}_{tag}", _single(mode, 0.1, 0.5, 10.0, reflectivity=R)))
    return out


PRESETS: Dict[str, callable] = {
    "fig2a": lambda: _phase_sweep(1.0, 20.0),
    "fig2b": lambda: _phase_sweep(0.1, 10.0),
    "fig3a": _fig3a,
    "fig3b": _fig3b,
    "fig4a": lambda: [("phi_2npi", _single("output-field", 0.1, 0.5, 10.0))],
    "fig4b": lambda: [("phi_q_half_pi", _single("output-field", 0.1, 0.1, 10.0, phi_q=0.5 * math.pi))],
    "fig5a": _fig5a,
    "fig5b": _fig5b,
    "fig6": _fig6,
}


def expand(name: str) -> Preset:
    """Scenario mappings for preset ``name``; raises ``KeyError`` if unknown."""
    if name not in PRESETS:
        raise KeyError(f"unknown figure {name!r}; expected one of {', '.join(PRESETS)}")
    return PRESETS[name]()
