"""YAML run configuration -> validated ExperimentPlan."""

from __future__ import annotations

import numpy as np
import yaml

from .experiments import NOISE_PHOTONS, PREPS, ExperimentPlan
from .params import QUBIT_TEMPERATURE, CellParams, ParameterError, default_cell, thermal_population
from .waveform import ReadoutPulseShape

__all__ = ["ConfigError", "load_config", "parse_config", "EXAMPLE_CONFIG"]


class ConfigError(ValueError):
    """Bad configuration; ``line`` is 1-based when known."""

    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        where = f" (line {line})" if line else ""
        super().__init__(f"{message}{where}")


EXAMPLE_CONFIG = """\
# cell 1 alone at its -1.08 GHz working point
seed: 1
n_shots: 2000
cells:
  - id: 1
powers_db: {start: -13.0, stop: 2.0, num: 25}
"""

_TOP_KEYS = {
    "seed", "n_shots", "noise_photons", "jba_coupling", "cells", "readout", "powers_db",
    "preps", "shelved_cells", "readout_powers_db", "rabi", "crosstalk_cells", "temperature",
    "sigma", "readout_gap", "window", "chunk",
}
_CELL_KEYS = {
    "id", "f_r_bare", "quality_factor", "kerr_over_2pi", "g_over_2pi", "f01", "detuning",
    "anharmonicity_over_2pi", "t1", "gamma_10", "gamma_21", "thermal_excited_population",
    "temperature",
}
_READOUT_KEYS = {"step_duration", "latch_duration", "latch_fraction"}
_RABI_KEYS = {"durations", "rabi_frequency"}
_WINDOW_KEYS = {"delay", "length"}


def _num(value, name):
    # YAML 1.1 reads "2e-6" as a string
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: expected a number, got {value!r}", field=name) from None


def _grid(value, name):
    if isinstance(value, dict):
        if "num" in value:
            return tuple(np.linspace(_num(value["start"], name), _num(value["stop"], name), int(value["num"])))
        if "step" in value:
            start, stop, step = (_num(value[k], name) for k in ("start", "stop", "step"))
            n = int(np.floor((stop - start) / step + 1e-9)) + 1
            return tuple(start + step * np.arange(n))
        raise ConfigError(f"{name}: grid needs start/stop and num or step", field=name)
    if isinstance(value, (list, tuple)):
        return tuple(_num(v, name) for v in value)
    raise ConfigError(f"{name}: expected a list or a start/stop grid", field=name)


def _unknown(section, mapping, allowed, warnings):
    for key in mapping:
        if key not in allowed:
            warnings.append(f"unknown key '{section}{key}' ignored")


def _cell(entry, temperature, warnings, idx):
    if not isinstance(entry, dict) or "id" not in entry:
        raise ConfigError(f"cells[{idx}]: each cell needs an 'id'", field="cells")
    _unknown(f"cells[{idx}].", entry, _CELL_KEYS, warnings)
    cid = int(entry["id"])
    if not 1 <= cid <= 4:
        raise ConfigError(f"cells[{idx}].id: must be in 1..4", field="id")
    t1 = _num(entry.get("t1", 2.0e-6), "t1")
    detuning = _num(entry["detuning"], "detuning") if "detuning" in entry else None
    temp = _num(entry.get("temperature", temperature), "temperature")
    try:
        base = default_cell(cid, detuning=detuning, t1=t1, temperature=temp)
    except ParameterError as exc:
        raise ConfigError(f"cells[{idx}].{exc.field_name}: {exc}", field=exc.field_name) from None
    fields = {}
    for key in ("f_r_bare", "quality_factor", "kerr_over_2pi", "g_over_2pi", "f01",
                "anharmonicity_over_2pi", "gamma_10", "gamma_21", "thermal_excited_population"):
        if key in entry:
            fields[key] = _num(entry[key], key)
    if "f_r_bare" in fields and "f01" not in fields:
        fields["f01"] = fields["f_r_bare"] + base.detuning
    if "gamma_10" in fields and "gamma_21" not in fields and "t1" not in entry:
        fields["gamma_21"] = 2.0 * fields["gamma_10"]
    if "f01" in fields and "thermal_excited_population" not in fields:
        fields["thermal_excited_population"] = thermal_population(fields["f01"], temp)
    merged = {**base.__dict__, **fields}
    try:
        return CellParams(**merged)
    except ParameterError as exc:
        raise ConfigError(f"cells[{idx}].{exc.field_name}: {exc}", field=exc.field_name) from None


def parse_config(text):
    """Parse YAML text into ``(plan, warnings)``."""
    try:
        data = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        line = exc.problem_mark.line + 1 if exc.problem_mark is not None else None
        raise ConfigError(f"parse error: {exc.problem}", line=line) from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"parse error: {exc}") from None
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("top level must be a mapping")
    warnings = []
    _unknown("", data, _TOP_KEYS, warnings)

    temperature = _num(data.get("temperature", QUBIT_TEMPERATURE), "temperature")
    if temperature <= 0:
        raise ConfigError("temperature: must be > 0", field="temperature")
    cells_cfg = data.get("cells", [{"id": 1}])
    if not isinstance(cells_cfg, list) or not cells_cfg:
        raise ConfigError("cells: expected a non-empty list", field="cells")
    cells = [_cell(e, temperature, warnings, i) for i, e in enumerate(cells_cfg)]
    if len({c.cell_id for c in cells}) != len(cells):
        raise ConfigError("cells: duplicate cell ids", field="cells")

    kwargs = {"cells": cells}
    readout = data.get("readout", {}) or {}
    _unknown("readout.", readout, _READOUT_KEYS, warnings)
    try:
        kwargs["readout"] = ReadoutPulseShape(
            **{k: _num(v, k) for k, v in readout.items() if k in _READOUT_KEYS}
        )
    except ValueError as exc:
        raise ConfigError(f"readout: {exc}", field="readout") from None
    if "powers_db" in data:
        kwargs["powers_db"] = _grid(data["powers_db"], "powers_db")
    if "preps" in data:
        preps = tuple(data["preps"])
        for p in preps:
            if p not in PREPS:
                raise ConfigError(f"preps: unknown preparation '{p}'", field="preps")
        kwargs["preps"] = preps
    if "shelved_cells" in data:
        kwargs["shelved_cells"] = tuple(int(c) for c in data["shelved_cells"] or ())
    if "readout_powers_db" in data:
        kwargs["readout_powers_db"] = {
            int(k): _num(v, "readout_powers_db") for k, v in (data["readout_powers_db"] or {}).items()
        }
    rabi = data.get("rabi", {}) or {}
    _unknown("rabi.", rabi, _RABI_KEYS, warnings)
    if "durations" in rabi:
        kwargs["rabi_durations"] = _grid(rabi["durations"], "rabi.durations")
    if "rabi_frequency" in rabi:
        kwargs["rabi_frequency"] = _num(rabi["rabi_frequency"], "rabi.rabi_frequency")
    if "crosstalk_cells" in data:
        pair = tuple(int(c) for c in data["crosstalk_cells"])
        if len(pair) != 2 or pair[0] == pair[1]:
            raise ConfigError("crosstalk_cells: need two distinct cell ids", field="crosstalk_cells")
        kwargs["crosstalk_cells"] = pair
    window = data.get("window", {}) or {}
    _unknown("window.", window, _WINDOW_KEYS, warnings)
    if "delay" in window:
        kwargs["window_delay"] = _num(window["delay"], "window.delay")
    if "length" in window:
        kwargs["window_length"] = _num(window["length"], "window.length")
    for key in ("n_shots", "chunk"):
        if key in data:
            kwargs[key] = int(_num(data[key], key))
    for key in ("noise_photons", "jba_coupling", "sigma", "readout_gap"):
        if key in data:
            kwargs[key] = _num(data[key], key)
    if "seed" in data:
        kwargs["seed"] = int(data["seed"])
    kwargs.setdefault("noise_photons", NOISE_PHOTONS)
    if kwargs["noise_photons"] < 0:
        raise ConfigError("noise_photons: must be >= 0", field="noise_photons")
    try:
        plan = ExperimentPlan(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    plan.warnings = warnings
    return plan, warnings


def load_config(path):
    """Read and validate a YAML configuration file."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text)
