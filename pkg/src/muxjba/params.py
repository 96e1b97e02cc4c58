"""Static cell parameters and the quantities derived from them.

All frequencies are ordinary frequencies in Hz (i.e. angular values divided
by 2*pi); rates are in 1/s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import constants

__all__ = [
    "ParameterError",
    "CellParams",
    "DispersivePulls",
    "linewidth",
    "dispersive_pulls",
    "purcell_time",
    "thermal_population",
    "default_cell",
    "default_cells",
    "DRIVE_OFFSET",
    "QUBIT_TEMPERATURE",
    "READOUT_CARRIER",
    "CHANNEL_OFFSETS",
]


class ParameterError(ValueError):
    """Raised when a parameter record violates one of its invariants."""

    def __init__(self, field_name, message):
        self.field_name = field_name
        super().__init__(f"{field_name}: {message}")


# Drive frequency sits this far below the low-power resonance (qubit in |0>).
DRIVE_OFFSET = 9.0e6
QUBIT_TEMPERATURE = 0.070
# Readout carrier and per-cell sideband offsets. Integer-MHz offsets keep the
# channels orthogonal over a 1 us demodulation window.
CHANNEL_OFFSETS = (-122.0e6, -61.0e6, 8.0e6, 104.0e6)
READOUT_CARRIER = 7.75e9 - DRIVE_OFFSET - CHANNEL_OFFSETS[0]

_QUALITY_FACTORS = (2500.0, 2550.0, 2650.0, 2200.0)
# Qubit-resonator detunings used for the simultaneous four-cell runs.
MULTIPLEXED_DETUNINGS = (-1.20e9, -1.76e9, -3.12e9, -2.06e9)
CELL1_DETUNING = -1.08e9


@dataclass(frozen=True)
class CellParams:
    """Physical parameters of one transmon + JBA cell.

    ``f_r_bare`` is the low-power resonance with the qubit in its ground
    state; ``f01`` is the qubit 0-1 transition. Kerr and anharmonicity are
    negative for a transmon-like junction.
    """

    cell_id: int
    f_r_bare: float
    quality_factor: float
    kerr_over_2pi: float
    g_over_2pi: float
    f01: float
    anharmonicity_over_2pi: float
    gamma_10: float
    gamma_21: float
    thermal_excited_population: float

    def __post_init__(self):
        if not 1 <= int(self.cell_id) <= 4:
            raise ParameterError("cell_id", f"must be in 1..4, got {self.cell_id}")
        if not self.quality_factor > 0:
            raise ParameterError("quality_factor", f"must be > 0, got {self.quality_factor}")
        if not self.kerr_over_2pi < 0:
            raise ParameterError("kerr_over_2pi", f"must be < 0, got {self.kerr_over_2pi}")
        if not self.anharmonicity_over_2pi < 0:
            raise ParameterError(
                "anharmonicity_over_2pi", f"must be < 0, got {self.anharmonicity_over_2pi}"
            )
        if not 0.0 <= self.thermal_excited_population < 0.5:
            raise ParameterError(
                "thermal_excited_population",
                f"must be in [0, 0.5), got {self.thermal_excited_population}",
            )
        if self.gamma_10 < 0 or self.gamma_21 < 0:
            raise ParameterError("gamma_10", "relaxation rates must be >= 0")
        if not abs(self.f01 - self.f_r_bare) > 10.0 * self.f_r_bare / self.quality_factor:
            raise ParameterError(
                "f01", "qubit too close to the resonator for the dispersive model"
            )

    @property
    def detuning(self):
        """Qubit-resonator detuning f01 - f_r (Hz)."""
        return self.f01 - self.f_r_bare

    @property
    def kappa_over_2pi(self):
        return linewidth(self)

    def with_(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True)
class DispersivePulls:
    """Resonator frequency offsets (Hz) for the qubit in |0>, |1>, |2>."""

    pull_per_level: tuple = field(default=(0.0, 0.0, 0.0))

    def __post_init__(self):
        pulls = tuple(float(p) for p in self.pull_per_level)
        if len(pulls) != 3 or not all(math.isfinite(p) for p in pulls):
            raise ParameterError("pull_per_level", "need three finite values")
        object.__setattr__(self, "pull_per_level", pulls)

    def __getitem__(self, level):
        return self.pull_per_level[level]

    @property
    def two_chi(self):
        return self.pull_per_level[0] - self.pull_per_level[1]

    @property
    def chi(self):
        return 0.5 * self.two_chi

    def relative_to_ground(self):
        """Offsets measured from the |0> resonance, as seen by the drive."""
        p0 = self.pull_per_level[0]
        return tuple(p - p0 for p in self.pull_per_level)


def linewidth(params):
    """Resonator energy linewidth kappa/2pi = f_r / Q in Hz."""
    if not params.quality_factor > 0:
        raise ParameterError("quality_factor", "must be > 0")
    if math.isinf(params.quality_factor):
        return 0.0
    return params.f_r_bare / params.quality_factor


def _chi(g_sq, f_transition, f_r, guard):
    delta = f_transition - f_r
    if abs(delta) < guard:
        raise ParameterError(
            "f01", f"transition at {f_transition:.6g} Hz is degenerate with the resonator"
        )
    return g_sq / delta


def dispersive_pulls(params):
    """Level-resolved dispersive shifts of the resonator.

    Uses the second-order transmon result with couplings g*sqrt(k+1):
    ``shift_k = chi_{k-1,k} - chi_{k,k+1}`` where
    ``chi_{k,k+1} = (k+1) g^2 / (f_{k,k+1} - f_r)``.
    With the qubit below the resonator the |0> shift is positive, so the
    resonator moves down towards the drive when the qubit is excited.
    """
    f_r = params.f_r_bare
    g_sq = params.g_over_2pi**2
    guard = 10.0 * linewidth(params)
    alpha = params.anharmonicity_over_2pi
    transitions = [params.f01 + k * alpha for k in range(3)]
    chis = [_chi((k + 1) * g_sq, transitions[k], f_r, guard) for k in range(3)]
    pulls = (
        -chis[0],
        chis[0] - chis[1],
        chis[1] - chis[2],
    )
    return DispersivePulls(pulls)


def purcell_time(params):
    """Purcell-limited T1 (s) through the resonator input line."""
    delta = params.detuning
    if delta == 0:
        raise ParameterError("f01", "zero qubit-resonator detuning")
    rate = 2.0 * math.pi * linewidth(params) * (params.g_over_2pi / delta) ** 2
    if rate == 0:
        return math.inf
    return 1.0 / rate


def thermal_population(f01, temperature):
    """Excited-state population of a two-level system at ``temperature`` K."""
    if not temperature > 0:
        raise ParameterError("temperature", "must be > 0")
    x = constants.h * f01 / (constants.k * temperature)
    # logistic form stays finite for large x
    return float(1.0 / (1.0 + np.exp(x)))


def default_cell(cell_id=1, detuning=None, t1=2.0e-6, gamma_21=None, temperature=QUBIT_TEMPERATURE):
    """Cell parameters at the values reported for the four-cell chip.

    ``detuning`` defaults to -1.08 GHz for cell 1 and to the multiplexed
    working point for cells 2-4.
    """
    idx = int(cell_id) - 1
    if not 0 <= idx < 4:
        raise ParameterError("cell_id", f"must be in 1..4, got {cell_id}")
    f_r = READOUT_CARRIER + CHANNEL_OFFSETS[idx] + DRIVE_OFFSET
    if detuning is None:
        detuning = CELL1_DETUNING if idx == 0 else MULTIPLEXED_DETUNINGS[idx]
    f01 = f_r + detuning
    gamma_10 = 1.0 / t1
    return CellParams(
        cell_id=idx + 1,
        f_r_bare=f_r,
        quality_factor=_QUALITY_FACTORS[idx],
        kerr_over_2pi=-310.0e3,
        g_over_2pi=85.0e6,
        f01=f01,
        anharmonicity_over_2pi=-434.0e6,
        gamma_10=gamma_10,
        gamma_21=2.0 * gamma_10 if gamma_21 is None else gamma_21,
        thermal_excited_population=thermal_population(f01, temperature),
    )


def default_cells(multiplexed=True):
    """All four cells; ``multiplexed`` selects the four-qubit detunings."""
    cells = []
    for i in range(4):
        det = MULTIPLEXED_DETUNINGS[i] if multiplexed else None
        cells.append(default_cell(i + 1, detuning=det))
    return cells
