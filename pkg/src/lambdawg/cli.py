"""Command-line scenario runner.

Subcommands::

    lambdawg simulate <config.yaml>
    lambdawg figure <fig2a|fig2b|fig3a|fig3b|fig4a|fig4b|fig5a|fig5b|fig6>
    lambdawg bound-state <config.yaml>
    lambdawg compare <config.yaml> [--refinements N]

CSV files and JSON summaries go to ``$LAMBDAWG_OUTPUT_DIR`` (default
``./out``) unless ``--output-dir`` is given. Exit status is 0 on success,
1 for bad input and 2 for a numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import warnings
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from . import analytic, dde, figures, observables, oracle
from .model import InvalidParameterError
from .scenario import Scenario, SchemaError, load_scenario, parse_scenario

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2
OUTPUT_ENV = "LAMBDAWG_OUTPUT_DIR"

HEADERS = {
    "single": ("t", "re_ce", "im_ce", "pop"),
    "output-field": ("t_bar", "intensity_k", "intensity_q"),
    "two-atom": ("t", "pop1", "pop2", "pop_sym", "pop_antisym"),
    "bound-state": ("energy", "alpha", "population", "residual", "resonant"),
    "compare": ("level", "n_modes", "window", "discrepancy", "norm_drift"),
}


# ---------------------------------------------------------------------------
# output helpers


def output_dir(override: Optional[str] = None) -> Path:
    path = Path(override or os.environ.get(OUTPUT_ENV) or "out")
    path.mkdir(parents=True, exist_ok=True)
    return path


def _atomic_write(path: Path, text: str):
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _with(stem: Path, ext: str) -> Path:
    return stem.parent / (stem.name + ext)


def write_csv(path: Path, header, columns):
    cols = [np.asarray(c, dtype=float) for c in columns]
    lines = [",".join(header)]
    for row in zip(*cols):
        lines.append(",".join("%.15g" % v for v in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def _jsonable(value):
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def emit_summary(path: Path, summary: dict) -> str:
    line = json.dumps(_jsonable(summary), sort_keys=True)
    _atomic_write(path, line + "\n")
    print(line)
    return line


# ---------------------------------------------------------------------------
# analytic summary pieces


def _bound_state_summary(scn: Scenario, config) -> list:
    states = analytic.bound_states(scn["omega0"], config.channel_k, config.channel_q)
    return [
        {"energy": s.energy, "alpha": s.alpha, "population": s.population, "resonant": s.resonant}
        for s in states
    ]


def _analytic_summary(scn: Scenario, config) -> dict:
    ideal = config.reflectivity == 1.0 and config.shift.is_zero
    out = {"steady_state_population": None, "bound_states": None}
    if ideal:
        out["steady_state_population"] = analytic.steady_state_population(config)
        out["bound_states"] = _bound_state_summary(scn, config)
    return out


# ---------------------------------------------------------------------------
# runners: each writes its CSV and returns the summary mapping


def _run_single(scn: Scenario, stem: Path) -> dict:
    config = scn.single_config()
    traj = dde.integrate_single(config, scn["t_max"], scn["dt"])
    ce = traj.ce
    write_csv(_with(stem, ".csv"), HEADERS["single"], (traj.times, ce.real, ce.imag, np.abs(ce) ** 2))
    summary = _analytic_summary(scn, config)
    summary.update(final_population=float(abs(ce[-1]) ** 2), error_bound=traj.error_bound)
    return summary


def _run_output_field(scn: Scenario, stem: Path) -> dict:
    config = scn.single_config()
    traj = dde.integrate_single(config, scn["t_max"], scn["dt"])
    d = scn["detector_offset"]
    fk = observables.output_field(traj, config, "k", d)
    fq = observables.output_field(traj, config, "q", d)
    if scn["normalize"]:
        ik, iq = fk.normalized_intensity, fq.normalized_intensity
    else:
        ik, iq = fk.intensity, fq.intensity
    write_csv(_with(stem, ".csv"), HEADERS["output-field"], (fk.t_bar, ik, iq))
    summary = _analytic_summary(scn, config)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        flux = observables.flux_components(fk, fq, config)
    summary.update(final_population=float(abs(traj.ce[-1]) ** 2), flux=flux, normalized=scn["normalize"])
    return summary


def _two_atom_columns(times, amps):
    p_sym, p_anti = dde.symmetric_antisymmetric(amps)
    pops = np.abs(amps) ** 2
    return times, pops[0], pops[1], np.abs(p_sym) ** 2, np.abs(p_anti) ** 2


def _run_two_atom(scn: Scenario, stem: Path) -> dict:
    config = scn.two_atom_config()
    traj = dde.integrate_two_atom(config, scn["t_max"], scn["dt"])
    cols = _two_atom_columns(traj.times, traj.amplitudes)
    write_csv(_with(stem, ".csv"), HEADERS["two-atom"], cols)
    return {
        "final_population": [float(cols[1][-1]), float(cols[2][-1])],
        "final_pop_sym": float(cols[3][-1]),
        "final_pop_antisym": float(cols[4][-1]),
        "error_bound": traj.error_bound,
    }


def _run_oracle_single(scn: Scenario, stem: Path) -> dict:
    config = scn.single_config()
    res = oracle.evolve_config_single(
        config, scn["t_max"], scn["n_modes"], scn["window"], scn["dt"], scn["record_every"]
    )
    ce = res.ce[0]
    write_csv(_with(stem, ".csv"), HEADERS["single"], (res.times, ce.real, ce.imag, np.abs(ce) ** 2))
    summary = _analytic_summary(scn, config)
    summary.update(final_population=float(abs(ce[-1]) ** 2), max_norm_drift=res.max_norm_drift,
                   atom_position=res.metadata["x0"])
    return summary


def _run_oracle_two(scn: Scenario, stem: Path) -> dict:
    config = scn.two_atom_config()
    grid = oracle.grid_for_two_atoms(config, scn["n_modes"], scn["window"])
    res = oracle.evolve_modes_two(config, grid, scn["t_max"], scn["dt"], scn["record_every"])
    cols = _two_atom_columns(res.times, res.ce)
    write_csv(_with(stem, ".csv"), HEADERS["two-atom"], cols)
    return {
        "final_population": [float(cols[1][-1]), float(cols[2][-1])],
        "final_pop_sym": float(cols[3][-1]),
        "final_pop_antisym": float(cols[4][-1]),
        "max_norm_drift": res.max_norm_drift,
    }


def _run_bound_state(scn: Scenario, stem: Path) -> dict:
    config = scn.single_config()
    if config.reflectivity != 1.0:
        raise analytic.UnsupportedConfigurationError("bound states need a perfect mirror (R = 1)")
    omega0 = scn["omega0"]
    roots = analytic.bound_state_energy(omega0, config.channel_k, config.channel_q)
    rows, skipped = [], []
    for e in roots:
        try:
            rows.append(analytic.bound_state_population(e, omega0, config.channel_k, config.channel_q))
        except analytic.InvalidRootError as exc:
            skipped.append({"energy": e, "reason": str(exc)})
    write_csv(
        _with(stem, ".csv"),
        HEADERS["bound-state"],
        (
            [s.energy for s in rows],
            [s.alpha for s in rows],
            [s.population for s in rows],
            [s.residual for s in rows],
            [1.0 if s.resonant else 0.0 for s in rows],
        ),
    )
    summary = {
        "bound_states": [
            {"energy": s.energy, "alpha": s.alpha, "population": s.population,
             "residual": s.residual, "resonant": s.resonant}
            for s in rows
        ],
        "rejected_roots": skipped,
    }
    if config.shift.is_zero:
        summary["steady_state_population"] = analytic.steady_state_population(config)
    return summary


RUNNERS = {
    "single": _run_single,
    "output-field": _run_output_field,
    "two-atom": _run_two_atom,
    "oracle-single": _run_oracle_single,
    "oracle-two": _run_oracle_two,
    "bound-state": _run_bound_state,
}


def run_scenario(scn: Scenario, out: Path, stem_name: Optional[str] = None) -> dict:
    """Run one non-figure scenario; writes ``<stem>.csv`` and ``<stem>.json``."""
    if scn.mode == "figure":
        return run_figure(scn["figure"], out)
    name = stem_name or scn["output"] or scn.mode
    stem = out / name
    summary = {"mode": scn.mode, "name": name}
    summary.update(RUNNERS[scn.mode](scn, stem))
    emit_summary(_with(stem, ".json"), summary)
    return summary


def run_figure(name: str, out: Path) -> dict:
    """Expand preset ``name``, save each explicit scenario, and run it."""
    try:
        series = figures.expand(name)
    except KeyError as exc:
        raise SchemaError(str(exc.args[0])) from None
    results = {}
    for label, mapping in series:
        stem_name = f"{name}_{label}"
        scn = parse_scenario(mapping)
        _atomic_write(out / f"{stem_name}.yaml", yaml.safe_dump(scn.as_dict(), sort_keys=True))
        results[label] = run_scenario(scn, out, stem_name)
    return {"figure": name, "series": sorted(results)}


# ---------------------------------------------------------------------------
# DDE vs oracle comparison


def compare(scn: Scenario, refinements: int = 2, factor: int = 2) -> dict:
    """Max ``|c_DDE - c_oracle|`` on the base mode grid and ``refinements`` enlarged ones.

    Each refinement multiplies the frequency window and mode count by
    ``factor`` at fixed spacing, so the revival time is unchanged.
    """
    two = scn.mode in ("two-atom", "oracle-two")
    t_max = scn["t_max"]
    if t_max is None:
        raise SchemaError("compare needs key 't_max'")
    if two:
        config = scn.two_atom_config()
        if config.reflectivity != 1.0:
            raise analytic.UnsupportedConfigurationError("the mode oracle only represents R = 1")
        delays = [d for ch in ("k", "q") for d in _pair_delay_list(config, ch)]
        grid = oracle.grid_for_two_atoms(config, scn["n_modes"], scn["window"])
    else:
        config = scn.single_config()
        if config.reflectivity != 1.0:
            raise analytic.UnsupportedConfigurationError("the mode oracle only represents R = 1")
        delays = [ch.delay for ch in config.channels if ch.gamma > 0]
        x0, grid = oracle.grid_for_config(config, scn["n_modes"], scn["window"])

    positive = [d for d in delays if d > 0]
    dt = scn["dt"] or (min(positive) / 1000.0 if positive else 1e-3)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        traj = dde.integrate_two_atom(config, t_max, dt) if two else dde.integrate_single(config, t_max, dt)

    levels = []
    for level in range(refinements + 1):
        if two:
            res = oracle.evolve_modes_two(config, grid, t_max)
        else:
            res = oracle.evolve_modes_single(x0, grid, t_max, None, config.ce0, config.shift)
        ref = np.vstack([traj.sample(np.minimum(res.times, traj.t_end), row) for row in range(traj.n_rows)])
        disc = float(np.max(np.abs(ref - res.ce)))
        levels.append({
            "level": level,
            "n_modes": grid.k.n_modes,
            "window": grid.window,
            "discrepancy": disc,
            "norm_drift": res.max_norm_drift,
        })
        grid = grid.refined(factor)
    discs = [lv["discrepancy"] for lv in levels]
    return {
        "levels": levels,
        "max_discrepancy": discs[0],
        "monotone": all(b < a for a, b in zip(discs, discs[1:])),
        "dde_dt": dt,
    }


def _pair_delay_list(config, ch):
    if config.channel_rates()[ch] == 0:
        return []
    d = config.pair_delays(ch)
    return [d.tau1, d.tau2, d.tau_minus, d.tau_plus]


def _run_compare(scn: Scenario, out: Path, refinements: int) -> dict:
    report = compare(scn, refinements)
    name = (scn["output"] or scn.mode) + "_compare"
    lv = report["levels"]
    write_csv(
        out / f"{name}.csv",
        HEADERS["compare"],
        ([x["level"] for x in lv], [x["n_modes"] for x in lv], [x["window"] for x in lv],
         [x["discrepancy"] for x in lv], [x["norm_drift"] for x in lv]),
    )
    report["name"] = name
    emit_summary(out / f"{name}.json", report)
    return report


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lambdawg", description="Lambda atom before a mirror: scenario runner")
    p.add_argument("--output-dir", help=f"where CSV/JSON files go (default: ${OUTPUT_ENV} or ./out)")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("simulate", help="run the scenario in a config file")
    s.add_argument("config")
    f = sub.add_parser("figure", help="reproduce a figure preset")
    f.add_argument("name", choices=sorted(figures.PRESETS))
    b = sub.add_parser("bound-state", help="bound-state energies and occupations")
    b.add_argument("config")
    c = sub.add_parser("compare", help="DDE vs mode-oracle discrepancy with grid refinements")
    c.add_argument("config")
    c.add_argument("--refinements", type=int, default=2)
    return p


def _dispatch(args) -> None:
    out = output_dir(args.output_dir)
    if args.command == "figure":
        run_figure(args.name, out)
        return
    scn = load_scenario(args.config)
    if args.command == "simulate":
        run_scenario(scn, out)
    elif args.command == "bound-state":
        stem = (scn["output"] or scn.mode) + "_bound_state"
        summary = {"mode": "bound-state", "name": stem}
        summary.update(_run_bound_state(scn, out / stem))
        emit_summary(out / f"{stem}.json", summary)
    else:
        if args.refinements < 0:
            raise SchemaError("--refinements must be >= 0")
        _run_compare(scn, out, args.refinements)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _dispatch(args)
    except (InvalidParameterError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (dde.IntegrationDivergedError, oracle.OracleAccuracyError, analytic.LaplacePoleError,
            ArithmeticError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
