"""Command-line front end.

Runs one experiment from a YAML configuration and writes CSV tables, a JSON
summary and ``manifest.json`` into the output directory::

    muxjba scurve --config run.yaml --seed 7 --out results/ --threads 4

Every flag can also be given as an environment variable ``MUXJBA_<FLAG>``
(``MUXJBA_SEED``, ``MUXJBA_SHOTS``, ...); command-line flags win. Exit codes:
0 success, 2 configuration error, 3 runtime error. Errors are reported as a
single JSON object on stderr.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
import time
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np
import yaml

from . import __version__, experiments, streams
from .analysis import AnalysisError, error_budget, scurve_crossing, scurve_width
from .config import ConfigError, parse_config
from .demod import write_iq_csv
from .jba import bifurcation_drive, bifurcation_edges, readout_frame, steady_states
from .params import dispersive_pulls, linewidth, purcell_time
from .waveform import write_envelope_csv

__all__ = ["main", "build_parser", "sha256_file"]

SUBCOMMANDS = ("scurve", "rabi", "simultaneous", "crosstalk", "iqcloud", "derive")
ENV_PREFIX = "MUXJBA_"
EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def build_parser():
    parser = argparse.ArgumentParser(prog="muxjba", description="Multiplexed JBA readout simulator")
    parser.add_argument("--version", action="version", version=f"muxjba {__version__}")
    parser.add_argument("command", choices=SUBCOMMANDS)
    parser.add_argument("--config", help="YAML run configuration (defaults if omitted)")
    parser.add_argument("--seed", help="master seed, unsigned 64-bit")
    parser.add_argument("--out", help="output directory (default: ./muxjba-out)")
    parser.add_argument("--threads", help="worker threads; results do not depend on it")
    parser.add_argument("--shots", help="override n_shots of the configuration")
    return parser


def _resolve(args, env):
    """Fill unset flags from MUXJBA_* environment variables."""
    for name in ("config", "seed", "out", "threads", "shots"):
        if getattr(args, name) is None:
            setattr(args, name, env.get(ENV_PREFIX + name.upper()))
    if args.out is None:
        args.out = "muxjba-out"
    try:
        args.threads = int(args.threads) if args.threads is not None else 1
        args.seed = int(args.seed) if args.seed is not None else None
        args.shots = int(args.shots) if args.shots is not None else None
    except ValueError as exc:
        raise ConfigError(f"bad flag value: {exc}") from None
    if args.threads < 1:
        raise ConfigError("--threads must be >= 1", field="threads")
    return args


def _effective_config(text, seed, shots):
    """Config text with command-line overrides folded in."""
    if seed is None and shots is None:
        return text
    data = yaml.safe_load(text) or {}
    if not isinstance(data, dict):
        return text
    if seed is not None:
        data["seed"] = seed
    if shots is not None:
        data["n_shots"] = shots
    return yaml.safe_dump(data, sort_keys=False)


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer, np.bool_)):
        return int(v)
    return v


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer, np.bool_)):
        return int(obj)
    return obj


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _safe(fn, *args):
    try:
        return fn(*args)
    except AnalysisError:
        return None


def derive_quantities(cell):
    pulls = dispersive_pulls(cell)
    frame = readout_frame(cell, 0)
    lo, hi = bifurcation_edges(frame)
    # branch the resonator jumps to when the low state disappears
    high_branch = steady_states(frame, bifurcation_drive(frame, "upper") * (1 + 1e-9))[-1]
    return {
        "cell": cell.cell_id,
        "two_chi_hz": pulls.two_chi,
        "pulls_hz": list(pulls.pull_per_level),
        "kappa_over_2pi_hz": linewidth(cell),
        "purcell_time_s": purcell_time(cell),
        "thermal_population": cell.thermal_excited_population,
        "drive_detuning_hz": frame.detuning_over_2pi,
        "bifurcation_edges_photons": [lo, hi],
        "high_branch_photons_at_switching": float(high_branch),
    }


def _cmd_derive(plan, out, threads):
    rows = [derive_quantities(c) for c in plan.cells]
    for r in rows:
        print(
            f"cell {r['cell']}: 2chi = {r['two_chi_hz'] / 1e6:.3f} MHz, "
            f"kappa/2pi = {r['kappa_over_2pi_hz'] / 1e6:.3f} MHz, "
            f"T_P = {r['purcell_time_s'] * 1e6:.2f} us, "
            f"edges = ({r['bifurcation_edges_photons'][0]:.2f}, {r['bifurcation_edges_photons'][1]:.2f}) photons"
        )
    _write_json(out / "derive.json", {"cells": rows})
    return ["derive.json"], {"cells": rows}


def _cmd_scurve(plan, out, threads):
    res = experiments.run_scurve_experiment(plan, threads)
    files, summary = [], {"cells": {}}
    for cell in plan.cells:
        cid = cell.cell_id
        curves = res.curves[cid]
        names = list(plan.preps)
        name = f"scurve_cell{cid}.csv"
        header = ["power_db"] + [f"p_{n}" for n in names] + [f"agreement_{n}" for n in names]
        rows = [
            [float(plan.powers_db[j])]
            + [curves[n].p_switch[j] for n in names]
            + [res.agreement[cid][n][j] for n in names]
            for j in range(len(plan.powers_db))
        ]
        _write_csv(out / name, header, rows)
        files.append(name)
        info = {
            "p50_db": {n: _safe(scurve_crossing, curves[n], 0.5) for n in names},
            "width_db": {n: _safe(scurve_width, curves[n]) for n in names},
            "separatrix": {"normal": res.separatrices[cid].normal, "offset": res.separatrices[cid].offset},
        }
        if {"ground", "pi", "pi_shelved"} <= set(names):
            budget = error_budget(curves["ground"], curves["pi"], curves["pi_shelved"], cell)
            info["budget"] = asdict(budget)
        summary["cells"][cid] = info
    _write_json(out / "summary.json", summary)
    return files + ["summary.json"], summary


def _cmd_rabi(plan, out, threads):
    res = experiments.run_rabi_experiment(plan, threads)
    ids = [c.cell_id for c in plan.cells]
    rows = [[t] + [res.p[c][j] for c in ids] for j, t in enumerate(res.durations)]
    _write_csv(out / "rabi.csv", ["t_equiv_s"] + [f"p_cell{c}" for c in ids], rows)
    summary = {"fits": res.fits, "agreement_min": {c: float(res.agreement[c].min()) for c in ids}}
    _write_json(out / "summary.json", summary)
    return ["rabi.csv", "summary.json"], summary


def _readout_files(res, out, plan, stem):
    files = [f"{stem}_iq.csv", f"{stem}_histograms.csv", f"{stem}_drive.csv"]
    write_iq_csv(out / files[0], res.iq, res.cell_ids)
    rows = []
    for cid in res.cell_ids:
        counts, edges = res.histograms[cid]
        rows += [[cid, edges[k], edges[k + 1], counts[k]] for k in range(len(counts))]
    _write_csv(out / files[1], ["cell", "bin_lo", "bin_hi", "count"], rows)
    write_envelope_csv(res.drive_waveform, out / files[2])
    summary = {
        "p_switch": res.p_switch,
        "separation_in_std": res.separation_in_std,
        "separatrices": {c: {"normal": s.normal, "offset": s.offset} for c, s in res.separatrices.items()},
        "readout_powers_db": {c.cell_id: plan.working_power(c) for c in plan.cells},
    }
    _write_json(out / "summary.json", summary)
    return files + ["summary.json"], summary


def _cmd_simultaneous(plan, out, threads):
    return _readout_files(experiments.run_simultaneous_readout(plan, "half_pi", threads), out, plan, "simultaneous")


def _cmd_iqcloud(plan, out, threads):
    sub = replace(plan, cells=[plan.cells[0]])
    return _readout_files(experiments.run_iq_cloud(plan, "half_pi", threads), out, sub, "iqcloud")


def _cmd_crosstalk(plan, out, threads):
    res = experiments.run_crosstalk_experiment(plan, threads)
    src, tgt = plan.crosstalk_cells
    _write_csv(
        out / "crosstalk.csv",
        ["source_state", "p_target", "n_shots"],
        [[0, res.p_target_when_ground, res.n_shots], [1, res.p_target_when_excited, res.n_shots]],
    )
    summary = {
        "source_cell": src,
        "target_cell": tgt,
        "jba_coupling": plan.jba_coupling,
        "delta_p": res.delta_p,
        "sigma": res.sigma,
        "significance": res.significance,
        "shots_for_resolution": res.shots_for_resolution,
    }
    _write_json(out / "summary.json", summary)
    return ["crosstalk.csv", "summary.json"], summary


_COMMANDS = {
    "derive": _cmd_derive,
    "scurve": _cmd_scurve,
    "rabi": _cmd_rabi,
    "simultaneous": _cmd_simultaneous,
    "iqcloud": _cmd_iqcloud,
    "crosstalk": _cmd_crosstalk,
}


def _fail(kind, exc, code):
    err = {"error": kind, "message": str(exc)}
    for attr in ("line", "field"):
        if getattr(exc, attr, None) is not None:
            err[attr] = getattr(exc, attr)
    sys.stderr.write(json.dumps(err) + "\n")
    return code


def run(args, env=None):
    """Execute a parsed command; returns the exit code."""
    env = os.environ if env is None else env
    t_start = time.perf_counter()
    try:
        args = _resolve(args, env)
        if args.config is not None:
            try:
                text = Path(args.config).read_text(encoding="utf-8")
            except OSError as exc:
                raise ConfigError(f"cannot read config {args.config}: {exc.strerror}") from None
        else:
            text = ""
        text = _effective_config(text, args.seed, args.shots)
        plan, warnings = parse_config(text)
    except ConfigError as exc:
        return _fail("config", exc, EXIT_CONFIG)

    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        config_copy = out / "config.yaml"
        config_copy.write_text(text, encoding="utf-8")
        files, _ = _COMMANDS[args.command](plan, out, args.threads)
    except Exception as exc:  # noqa: BLE001 - every failure maps to exit 3
        return _fail("runtime", exc, EXIT_RUNTIME)

    manifest = {
        "command": args.command,
        "artifact_version": __version__,
        "config_file": "config.yaml",
        "config_sha256": sha256_file(config_copy),
        "master_seed": plan.seed,
        "n_shots": plan.n_shots,
        "threads": args.threads,
        "stream_scheme": streams.SCHEME,
        "files": {name: sha256_file(out / name) for name in files},
        "warnings": list(warnings),
        "wall_clock_s": time.perf_counter() - t_start,
    }
    _write_json(out / "manifest.json", manifest)
    for w in warnings:
        sys.stderr.write(f"warning: {w}\n")
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
