"""Baseband envelopes and frequency-multiplexed waveform synthesis."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

__all__ = [
    "WaveformError",
    "ComplexEnvelope",
    "ReadoutPulseShape",
    "make_readout_envelope",
    "make_control_envelope",
    "ssb_compose",
    "write_envelope_csv",
]

DEFAULT_SAMPLE_RATE = 2.0e9


class WaveformError(ValueError):
    pass


@dataclass(frozen=True)
class ComplexEnvelope:
    """Uniformly sampled complex waveform starting at ``t0``."""

    samples: np.ndarray
    sample_rate: float
    t0: float = 0.0

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=complex)
        if samples.ndim != 1:
            raise WaveformError("envelope samples must be one-dimensional")
        if not self.sample_rate > 0:
            raise WaveformError(f"sample_rate must be > 0, got {self.sample_rate}")
        if not np.all(np.isfinite(samples)):
            raise WaveformError("envelope contains non-finite samples")
        object.__setattr__(self, "samples", samples)

    def __len__(self):
        return self.samples.size

    @property
    def dt(self):
        return 1.0 / self.sample_rate

    @property
    def times(self):
        return self.t0 + np.arange(self.samples.size) / self.sample_rate

    @property
    def duration(self):
        return self.samples.size / self.sample_rate

    @property
    def t_end(self):
        return self.t0 + self.duration

    def scaled(self, factor):
        return ComplexEnvelope(self.samples * factor, self.sample_rate, self.t0)

    def shifted(self, t0):
        return ComplexEnvelope(self.samples, self.sample_rate, t0)

    def energy(self):
        """Sum of |x|^2 dt."""
        return float(np.sum(np.abs(self.samples) ** 2) / self.sample_rate)

    def padded(self, t0, n_samples):
        """Place the envelope on a longer grid starting at ``t0``."""
        offset = _grid_offset(self.t0 - t0, self.sample_rate)
        if offset < 0 or offset + self.samples.size > n_samples:
            raise WaveformError("envelope does not fit inside the requested grid")
        out = np.zeros(n_samples, dtype=complex)
        out[offset : offset + self.samples.size] = self.samples
        return ComplexEnvelope(out, self.sample_rate, t0)


@dataclass(frozen=True)
class ReadoutPulseShape:
    """Two-step readout pulse: a short measurement step then a latching plateau.

    ``latch_fraction`` applies to power, so the plateau amplitude is
    ``sqrt(latch_fraction)`` times the step amplitude.
    """

    step_duration: float = 25e-9
    latch_duration: float = 2e-6
    latch_fraction: float = 0.85
    peak_power_dB: float = 0.0

    def __post_init__(self):
        if not 0 < self.latch_fraction <= 1:
            raise WaveformError("latch_fraction must be in (0, 1]")
        if self.step_duration <= 0 or self.latch_duration <= 0:
            raise WaveformError("readout pulse durations must be > 0")

    @property
    def duration(self):
        return self.step_duration + self.latch_duration


def _grid_offset(dt, sample_rate):
    x = dt * sample_rate
    k = int(round(x))
    if abs(x - k) > 1e-6:
        raise WaveformError("envelope start times are not aligned to a common sample grid")
    return k


def make_readout_envelope(shape, sample_rate=DEFAULT_SAMPLE_RATE, reference_amplitude=1.0, t0=0.0):
    """Sampled two-step readout envelope.

    The step amplitude is ``reference_amplitude * 10**(peak_power_dB/20)``.
    """
    n_step = int(round(shape.step_duration * sample_rate))
    n_latch = int(round(shape.latch_duration * sample_rate))
    peak = reference_amplitude * 10.0 ** (shape.peak_power_dB / 20.0)
    samples = np.empty(n_step + n_latch, dtype=complex)
    samples[:n_step] = peak
    samples[n_step:] = peak * math.sqrt(shape.latch_fraction)
    return ComplexEnvelope(samples, sample_rate, t0)


def _gaussian_edge(t, sigma):
    return np.exp(-0.5 * (t / sigma) ** 2)


def make_control_envelope(pulse, sample_rate=DEFAULT_SAMPLE_RATE, amplitude=1.0, t0=None):
    """Flat-top pulse with 3-sigma Gaussian rise and fall.

    ``pulse`` needs ``sigma``, ``flat_top`` and ``start`` attributes (see
    :class:`muxjba.transmon.ControlPulse`). The envelope is sampled at the
    sample midpoints and starts at ``pulse.start`` unless ``t0`` is given.
    """
    sigma = pulse.sigma
    total = pulse.flat_top + 6.0 * sigma
    start = pulse.start if t0 is None else t0
    n = int(math.ceil(total * sample_rate - 1e-9))
    t = (np.arange(n) + 0.5) / sample_rate
    env = np.ones(n)
    rise = t < 3 * sigma
    env[rise] = _gaussian_edge(t[rise] - 3 * sigma, sigma)
    fall = t > 3 * sigma + pulse.flat_top
    env[fall] = _gaussian_edge(t[fall] - 3 * sigma - pulse.flat_top, sigma)
    return ComplexEnvelope(amplitude * env, sample_rate, start)


def gaussian_edge_area(sigma, flat_top):
    """Integral of a unit-height flat-top pulse with 3-sigma Gaussian edges."""
    return flat_top + 2.0 * sigma * math.sqrt(math.pi / 2.0) * erf(3.0 / math.sqrt(2.0))


def ssb_compose(channels):
    """Sum of envelopes translated to their sideband offsets.

    ``channels`` is a sequence of ``(offset_hz, ComplexEnvelope)``. Each
    envelope is multiplied by ``exp(i 2 pi offset t)`` with ``t`` its absolute
    sample time; the result spans the union of all inputs.
    """
    channels = list(channels)
    if not channels:
        raise WaveformError("need at least one channel")
    rate = channels[0][1].sample_rate
    for _, env in channels:
        if env.sample_rate != rate:
            raise WaveformError("all channels must share one sample rate")
    t0 = min(env.t0 for _, env in channels)
    t_end = max(env.t_end for _, env in channels)
    n = int(round((t_end - t0) * rate))
    out = np.zeros(n, dtype=complex)
    for offset, env in channels:
        k = _grid_offset(env.t0 - t0, rate)
        t = env.times
        out[k : k + env.samples.size] += env.samples * np.exp(2j * np.pi * offset * t)
    return ComplexEnvelope(out, rate, t0)


def write_envelope_csv(envelope, path):
    """Write ``t, re, im`` rows."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "re", "im"])
        for t, x in zip(envelope.times, envelope.samples):
            writer.writerow([repr(float(t)), repr(float(x.real)), repr(float(x.imag))])
