"""Digitisation and per-channel digital down-conversion."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .waveform import ComplexEnvelope

__all__ = [
    "DemodulationError",
    "IQPoint",
    "DemodWindow",
    "digitize",
    "demodulate",
    "demodulate_many",
    "default_window",
    "write_iq_csv",
    "DIGITIZER_RATE",
    "DIGITIZER_BANDWIDTH",
]

DIGITIZER_RATE = 2.0e9
DIGITIZER_BANDWIDTH = 1.0e9


class DemodulationError(ValueError):
    pass


@dataclass(frozen=True)
class IQPoint:
    cell_id: int
    i_value: float
    q_value: float
    shot_index: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.i_value) and math.isfinite(self.q_value)):
            raise DemodulationError("IQ values must be finite")

    @property
    def complex(self):
        return complex(self.i_value, self.q_value)


@dataclass(frozen=True)
class DemodWindow:
    t_start: float
    t_stop: float

    def __post_init__(self):
        if not self.t_stop > self.t_start:
            raise DemodulationError("window must have t_stop > t_start")

    def shifted(self, dt):
        return DemodWindow(self.t_start + dt, self.t_stop + dt)


def default_window(step_duration=25e-9, readout_start=0.0, length=1e-6):
    """Averaging window 300 ns after the end of the measurement step."""
    t0 = readout_start + step_duration + 300e-9
    return DemodWindow(t0, t0 + length)


def digitize(signal, offsets=(), rate=DIGITIZER_RATE, bandwidth=DIGITIZER_BANDWIDTH):
    """Real samples of an offset-frequency signal as seen by the digitiser.

    ``offsets`` lists the channel frequencies present in ``signal``; any
    beyond ``bandwidth`` would alias and are rejected. Returns the real part
    resampled onto the ``rate`` grid starting at ``signal.t0``; the ideal
    low-pass leaves in-band content untouched.
    """
    for d in offsets:
        if abs(d) > bandwidth:
            raise DemodulationError(f"channel at {d:.4g} Hz lies outside the {bandwidth:.4g} Hz band")
    x = np.real(signal.samples)
    if signal.sample_rate == rate:
        return x.copy()
    n_out = int(round(signal.duration * rate))
    t_out = signal.t0 + np.arange(n_out) / rate
    return np.interp(t_out, signal.times, x)


def _window_slice(n, window, rate, t0):
    k0 = max(0, int(math.ceil((window.t_start - t0) * rate - 1e-6)))
    k1 = min(n, int(math.ceil((window.t_stop - t0) * rate - 1e-6)))
    if k1 <= k0:
        raise DemodulationError("demodulation window selects no samples")
    if (window.t_start - t0) * rate < -1e-6 or (window.t_stop - t0) * rate > n + 1e-6:
        raise DemodulationError("demodulation window extends beyond the record")
    return slice(k0, k1)


def demodulate_many(samples, delta, window, rate=DIGITIZER_RATE, t0=0.0):
    """Vectorised demodulation over the last axis.

    Returns complex ``I + iQ`` with ``I = (2/N) sum s cos(2 pi delta t)`` and
    ``Q = -(2/N) sum s sin(2 pi delta t)``; a unit tone ``cos(2 pi delta t + phi)``
    gives ``exp(i phi)``.
    """
    samples = np.asarray(samples, dtype=float)
    sl = _window_slice(samples.shape[-1], window, rate, t0)
    t = t0 + np.arange(sl.start, sl.stop) / rate
    ref = np.exp(-2j * np.pi * delta * t)
    seg = samples[..., sl]
    return (2.0 / seg.shape[-1]) * (seg @ ref)


def demodulate(samples, delta, window, rate=DIGITIZER_RATE, t0=0.0, cell_id=1, shot_index=0):
    """Demodulate one record into an :class:`IQPoint`."""
    z = complex(demodulate_many(np.asarray(samples, dtype=float), delta, window, rate, t0))
    return IQPoint(cell_id, z.real, z.imag, shot_index)


def write_iq_csv(path, iq, cell_ids, shot_indices=None):
    """Write ``shot, cell, I, Q`` rows; ``iq`` is complex of shape (shots, cells)."""
    iq = np.atleast_2d(np.asarray(iq))
    n_shots = iq.shape[0]
    shots = np.arange(n_shots) if shot_indices is None else shot_indices
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["shot", "cell", "I", "Q"])
        for s in range(n_shots):
            for c, cell in enumerate(cell_ids):
                z = iq[s, c]
                writer.writerow([int(shots[s]), int(cell), repr(float(z.real)), repr(float(z.imag))])


def tone(delta, n, rate=DIGITIZER_RATE, t0=0.0, amplitude=1.0, phase=0.0):
    """Complex baseband envelope of a single offset tone (test helper)."""
    t = t0 + np.arange(n) / rate
    return ComplexEnvelope(amplitude * np.exp(1j * (2 * np.pi * delta * t + phase)), rate, t0)
