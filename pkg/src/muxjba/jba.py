"""Semiclassical Kerr resonator driven in its bistable regime.

Amplitude equation in the frame rotating at the drive::

    da/dt = [-i 2pi (D + K |a|^2) - pi kappa] a - i eps(t) + noise

with ``D`` the resonator-minus-drive detuning and ``K < 0`` the Kerr
constant (both in Hz), ``kappa`` the energy linewidth (Hz) and ``eps`` the
drive in sqrt(photons)/s. ``|a|^2`` is the intra-resonator photon number.
Steady states solve ``n [(D + K n)^2 + (kappa/2)^2] = (eps / 2pi)^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import streams
from .analysis import SCurve
from .waveform import ComplexEnvelope, ReadoutPulseShape, make_readout_envelope

__all__ = [
    "IntegrationError",
    "DriveFrame",
    "FieldTrajectory",
    "PullTimeline",
    "steady_states",
    "bifurcation_edges",
    "bifurcation_drive",
    "latch_threshold",
    "readout_frame",
    "integrate_field",
    "integrate_fields",
    "detect_latch",
    "switching_probability_vs_drive",
    "LATCH_HOLD",
    "MAX_PHOTONS",
]

LATCH_HOLD = 50e-9
MAX_PHOTONS = 1.0e4
_ROOT_RTOL = 1e-9


class IntegrationError(RuntimeError):
    """The integrator left the physical range (step too large)."""


@dataclass(frozen=True)
class DriveFrame:
    """Resonator parameters seen from the drive's rotating frame (all in Hz)."""

    detuning_over_2pi: float
    kerr_over_2pi: float
    kappa_over_2pi: float

    def __post_init__(self):
        if not self.kappa_over_2pi > 0:
            raise ValueError("kappa_over_2pi must be > 0")

    def shifted(self, offset):
        return replace(self, detuning_over_2pi=self.detuning_over_2pi + offset)


@dataclass(frozen=True)
class PullTimeline:
    """Piecewise-constant frequency offset: ``values[j]`` on ``[times[j], times[j+1])``."""

    times: tuple
    values: tuple

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        values = tuple(float(v) for v in self.values)
        if len(times) != len(values) or not times:
            raise ValueError("times and values must be non-empty and of equal length")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, value, t0=-math.inf):
        return cls((t0,), (value,))

    def at(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(np.asarray(self.times), t, side="right") - 1
        vals = np.asarray(self.values)
        return vals[np.clip(idx, 0, None)]


@dataclass
class FieldTrajectory:
    samples: np.ndarray
    dt: float
    latch_flag: bool
    latch_time: float | None = None
    t0: float = 0.0

    @property
    def photons(self):
        return np.abs(self.samples) ** 2

    @property
    def times(self):
        return self.t0 + self.dt * np.arange(self.samples.size)


def _cubic_coeffs(frame, eps):
    d, k, half = frame.detuning_over_2pi, frame.kerr_over_2pi, 0.5 * frame.kappa_over_2pi
    e2 = (eps / (2.0 * math.pi)) ** 2
    return np.array([k * k, 2.0 * d * k, d * d + half * half, -e2])


def _drive_sq(frame, n):
    d, k, half = frame.detuning_over_2pi, frame.kerr_over_2pi, 0.5 * frame.kappa_over_2pi
    return n * ((d + k * n) ** 2 + half * half)


def steady_states(frame, epsilon):
    """Non-negative steady-state photon numbers, sorted ascending.

    When three are returned they are the low, unstable and high branches.
    A double root (drive exactly at a bifurcation edge) is reported once.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    if epsilon == 0:
        return (0.0,)
    coeffs = _cubic_coeffs(frame, epsilon)
    if coeffs[0] == 0:
        # Kerr-free resonator: linear response
        return (-coeffs[3] / coeffs[2],)
    # scale photon numbers to O(1) for conditioning
    scale = abs(coeffs[2] / coeffs[0]) ** 0.5 or 1.0
    scaled = coeffs * np.array([scale**3, scale**2, scale, 1.0])
    raw = np.roots(scaled) * scale
    e2 = -coeffs[3]
    roots = []
    for r in raw:
        if abs(r.imag) > 1e-4 * max(abs(r.real), 1.0):
            continue
        n = _polish(frame, r.real, e2)
        if n >= 0:
            roots.append(n)
    roots.sort()
    unique = []
    for n in roots:
        if unique and abs(n - unique[-1]) <= 1e-5 * max(n, 1.0):
            continue
        unique.append(n)
    return tuple(unique)


def _polish(frame, n, e2):
    d, k, half = frame.detuning_over_2pi, frame.kerr_over_2pi, 0.5 * frame.kappa_over_2pi
    for _ in range(50):
        f = n * ((d + k * n) ** 2 + half * half) - e2
        df = 3 * k * k * n * n + 4 * d * k * n + d * d + half * half
        if df == 0 or abs(f) <= _ROOT_RTOL * 1e-3 * e2:
            break
        step = f / df
        n -= step
        if abs(step) <= 1e-15 * max(abs(n), 1.0):
            break
    return n


def bifurcation_edges(frame):
    """Photon numbers ``(n_low_edge, n_high_edge)`` bounding the unstable branch.

    ``n_low_edge`` is where the low branch ends (upper bifurcation drive) and
    ``n_high_edge`` where the high branch ends (lower bifurcation drive).
    Returns None when the resonator cannot be bistable.
    """
    d, k, kappa = frame.detuning_over_2pi, frame.kerr_over_2pi, frame.kappa_over_2pi
    if k == 0 or d * k >= 0:
        return None
    a, b, c = 3 * k * k, 4 * d * k, d * d + 0.25 * kappa * kappa
    disc = b * b - 4 * a * c
    if disc < 0:
        if disc > -1e-12 * b * b:
            disc = 0.0
        else:
            return None
    sq = math.sqrt(disc)
    n1, n2 = sorted(((-b - sq) / (2 * a), (-b + sq) / (2 * a)))
    if n1 <= 0:
        return None
    return (n1, n2)


def bifurcation_drive(frame, edge="upper"):
    """Drive amplitude (sqrt(photons)/s) at a bifurcation.

    ``edge="upper"`` is the drive where the low branch disappears and the
    resonator must switch; ``"lower"`` is where the high branch disappears.
    """
    edges = bifurcation_edges(frame)
    if edges is None:
        raise ValueError("frame is not bistable")
    n = edges[0] if edge == "upper" else edges[1]
    return 2.0 * math.pi * math.sqrt(_drive_sq(frame, n))


def latch_threshold(frame, epsilon):
    """Photon number that a latched resonator must exceed.

    Inside the bistable band this is the unstable branch; above it the low
    edge; below it (or without bistability) latching is impossible and the
    threshold is infinite.
    """
    edges = bifurcation_edges(frame)
    if edges is None or epsilon <= 0:
        return math.inf
    e2 = (epsilon / (2.0 * math.pi)) ** 2
    if e2 >= _drive_sq(frame, edges[0]):
        return edges[0]
    if e2 <= _drive_sq(frame, edges[1]):
        return math.inf
    roots = steady_states(frame, epsilon)
    mid = [n for n in roots if edges[0] < n < edges[1]]
    return mid[0] if mid else edges[0]


def readout_frame(params, level=None, drive_offset=None):
    """Drive frame for a cell driven ``drive_offset`` below its |0> resonance.

    With ``level=None`` the detuning excludes the qubit pull (add the
    per-level pulls from a :class:`PullTimeline`); otherwise the pull of that
    level is included.
    """
    from .params import DRIVE_OFFSET, dispersive_pulls, linewidth

    offset = DRIVE_OFFSET if drive_offset is None else drive_offset
    pulls = dispersive_pulls(params)
    base = offset - pulls[0]
    if level is not None:
        base += pulls[level]
    return DriveFrame(base, params.kerr_over_2pi, linewidth(params))


def _threshold_table(frame, eps_levels, det_levels):
    table = np.empty((len(eps_levels), len(det_levels)))
    for j, d in enumerate(det_levels):
        fr = replace(frame, detuning_over_2pi=float(d))
        for i, e in enumerate(eps_levels):
            table[i, j] = latch_threshold(fr, float(abs(e)))
    return table


def detect_latch(photons, thresholds, dt, hold=LATCH_HOLD):
    """First index where ``photons > thresholds`` holds for ``hold`` seconds.

    Works on the last axis; returns ``(flags, indices)`` with index -1 where
    no latch occurs.
    """
    above = photons > thresholds
    w = max(1, int(round(hold / dt)))
    n = above.shape[-1]
    if n < w:
        flags = np.zeros(above.shape[:-1], dtype=bool)
        return flags, np.full(above.shape[:-1], -1)
    csum = np.concatenate(
        [np.zeros(above.shape[:-1] + (1,), dtype=np.int64), np.cumsum(above, axis=-1)], axis=-1
    )
    sustained = (csum[..., w:] - csum[..., :-w]) == w
    flags = sustained.any(axis=-1)
    idx = np.where(flags, sustained.argmax(axis=-1), -1)
    return flags, idx


def integrate_fields(
    frame,
    drive,
    dt,
    detuning_offsets=None,
    noise_photons=0.0,
    noise=None,
    a0=0.0,
    coupling=None,
    drive_frequencies=None,
    t0=0.0,
):
    """Vectorised exponential-Euler integration for a batch of shots and modes.

    Parameters
    ----------
    frame : DriveFrame or sequence of DriveFrame
        One frame per mode (a single frame means one mode).
    drive : ndarray, shape (modes, steps)
        Complex drive amplitude ``eps`` per step, in sqrt(photons)/s.
    dt : float
        Step (s).
    detuning_offsets : ndarray, optional
        Extra detuning (Hz) broadcastable to ``(shots, modes, steps)``.
    noise_photons : float
        Noise strength: the undriven stationary mean photon number.
    noise : ndarray, optional
        Complex standard normals of shape ``(shots, modes, steps)`` with
        ``E|z|^2 = 1``. Required when ``noise_photons > 0``.
    coupling : ndarray, optional
        Symmetric ``(modes, modes)`` linear coupling rates over 2pi (Hz).
    drive_frequencies : ndarray, optional
        Absolute drive frequencies (Hz), needed with ``coupling`` to rotate
        the partner field into each mode's frame.

    Returns
    -------
    ndarray, shape (shots, modes, steps)
        ``a`` at the start of every step.
    """
    frames = [frame] if isinstance(frame, DriveFrame) else list(frame)
    m = len(frames)
    drive = np.asarray(drive, dtype=complex).reshape(m, -1)
    n_steps = drive.shape[1]
    det0 = np.array([f.detuning_over_2pi for f in frames])[None, :, None]
    kerr = 2.0 * np.pi * np.array([f.kerr_over_2pi for f in frames])[None, :]
    half_kappa = np.pi * np.array([f.kappa_over_2pi for f in frames])[None, :]

    if noise is not None:
        n_shots = noise.shape[0]
    elif detuning_offsets is not None and np.ndim(detuning_offsets) == 3:
        n_shots = np.shape(detuning_offsets)[0]
    else:
        n_shots = 1
    if noise_photons > 0 and noise is None:
        raise ValueError("noise samples are required when noise_photons > 0")

    det = det0 if detuning_offsets is None else det0 + np.asarray(detuning_offsets, dtype=float)
    det = np.broadcast_to(2.0 * np.pi * det, (n_shots, m, n_steps))
    sigmas = np.sqrt(2.0 * half_kappa * noise_photons * dt) if noise_photons > 0 else None

    couple = None
    if coupling is not None and np.any(np.asarray(coupling) != 0):
        coupling = 2.0 * np.pi * np.asarray(coupling, dtype=float)
        freqs = np.asarray(drive_frequencies, dtype=float)
        beat = freqs[None, :] - freqs[:, None]  # beat[i, j] = f_j - f_i
        couple = (coupling, beat)

    out = np.empty((n_shots, m, n_steps), dtype=complex)
    a = np.broadcast_to(np.asarray(a0, dtype=complex), (n_shots, m)).copy()
    drive_term = -1j * drive
    for k in range(n_steps):
        out[:, :, k] = a
        n = a.real * a.real + a.imag * a.imag
        if n.max() > MAX_PHOTONS:
            raise IntegrationError(
                f"photon number exceeded {MAX_PHOTONS:g} at step {k}; reduce the time step"
            )
        lin = -1j * (det[:, :, k] + kerr * n) - half_kappa
        prop = np.exp(lin * dt)
        forcing = drive_term[:, k]
        if couple is not None:
            mat, beat = couple
            phase = np.exp(-2j * np.pi * beat * (t0 + k * dt))
            forcing = forcing - 1j * np.einsum("ij,sj->si", mat * phase, a)
        a = prop * a + (prop - 1.0) / lin * forcing
        if sigmas is not None:
            a = a + sigmas * noise[:, :, k]
    return out


def _shot_noise(master_seed, keys, shape):
    z = np.empty((len(keys),) + shape, dtype=complex)
    for i, key in enumerate(keys):
        rng = streams.stream(master_seed, *key)
        g = rng.standard_normal((2,) + shape)
        z[i] = (g[0] + 1j * g[1]) * math.sqrt(0.5)
    return z


def integrate_field(frame, envelope, noise_strength=0.0, pull_timeline=None, seed=None, a0=0.0, hold=LATCH_HOLD):
    """Integrate one trajectory under ``envelope`` and report whether it latched.

    ``pull_timeline`` adds a piecewise-constant detuning (Hz) on top of the
    frame, e.g. qubit jumps that move the resonator mid-pulse.
    """
    dt = envelope.dt
    if dt > 1e-9:
        raise ValueError("envelope must be sampled at 1 GS/s or faster")
    t = envelope.times
    offsets = None if pull_timeline is None else pull_timeline.at(t)[None, None, :]
    noise = None
    if noise_strength > 0:
        noise = _shot_noise(streams.as_seed(seed), [(streams.EXPERIMENT_CODES["switching"], 0, 0, 0, 0, streams.FIELD)], (1, t.size))
    a = integrate_fields(
        frame,
        envelope.samples[None, :],
        dt,
        detuning_offsets=offsets,
        noise_photons=noise_strength,
        noise=noise,
        a0=a0,
        t0=envelope.t0,
    )[0, 0]
    det = frame.detuning_over_2pi + (0.0 if offsets is None else offsets[0, 0])
    thr = _thresholds_for(frame, envelope.samples, np.broadcast_to(det, t.shape))
    flags, idx = detect_latch(np.abs(a) ** 2, thr, dt, hold)
    latched = bool(flags)
    return FieldTrajectory(
        samples=a,
        dt=dt,
        latch_flag=latched,
        latch_time=float(t[int(idx)]) if latched else None,
        t0=envelope.t0,
    )


def _thresholds_for(frame, drive, detuning):
    """Latch thresholds for drive samples (steps,) and detunings (..., steps)."""
    eps = np.abs(np.asarray(drive))
    eps_levels, eps_idx = np.unique(np.round(eps, 6), return_inverse=True)
    det_levels, det_idx = np.unique(np.round(np.asarray(detuning), 3), return_inverse=True)
    det_idx = det_idx.reshape(np.shape(detuning))
    table = _threshold_table(frame, eps_levels, det_levels)
    return table[eps_idx.reshape(eps.shape), det_idx]


def switching_probability_vs_drive(
    frame,
    pulse_shape=None,
    noise_strength=0.0,
    n_shots=1000,
    seed=0,
    powers_db=None,
    sample_rate=2e9,
    chunk=500,
    hold=LATCH_HOLD,
):
    """Latch fraction versus peak drive power for a fixed frame.

    Powers are in dB relative to the upper bifurcation drive of ``frame``.
    ``pulse_shape`` is a :class:`ReadoutPulseShape` or a unit-peak
    :class:`ComplexEnvelope`; the default is the 25 ns / 2 us readout pulse.
    """
    if n_shots < 100:
        raise ValueError("n_shots must be >= 100")
    if powers_db is None:
        powers_db = np.linspace(-4.0, 2.0, 25)
    if pulse_shape is None:
        pulse_shape = ReadoutPulseShape()
    if isinstance(pulse_shape, ComplexEnvelope):
        unit = pulse_shape
    else:
        unit = make_readout_envelope(replace(pulse_shape, peak_power_dB=0.0), sample_rate)
    ref = bifurcation_drive(frame)
    seed = streams.as_seed(seed)
    code = streams.EXPERIMENT_CODES["switching"]
    p = []
    for j, pdb in enumerate(np.asarray(powers_db, dtype=float)):
        env = unit.scaled(ref * 10.0 ** (pdb / 20.0))
        thr = _thresholds_for(frame, env.samples, np.full(len(env), frame.detuning_over_2pi))
        if noise_strength <= 0:
            a = integrate_fields(frame, env.samples[None, :], env.dt)
            flags, _ = detect_latch(np.abs(a[:, 0]) ** 2, thr[None, :], env.dt, hold)
            p.append(float(flags[0]))
            continue
        hits = 0
        for start in range(0, n_shots, chunk):
            shots = range(start, min(n_shots, start + chunk))
            noise = _shot_noise(seed, [(code, 0, j, 0, s, streams.FIELD) for s in shots], (1, len(env)))
            a = integrate_fields(
                frame, env.samples[None, :], env.dt, noise_photons=noise_strength, noise=noise
            )
            flags, _ = detect_latch(np.abs(a[:, 0]) ** 2, thr[None, :], env.dt, hold)
            hits += int(np.count_nonzero(flags))
        p.append(hits / n_shots)
    return SCurve(np.asarray(powers_db, dtype=float), np.asarray(p), np.full(len(p), n_shots))
