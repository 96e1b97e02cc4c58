"""Three-level transmon Monte Carlo: thermal start, control pulses, relaxation.

The qubit is tracked as a classical level between jumps. A control pulse on
the (k, l) transition swaps k and l with probability sin^2(theta/2); the
swap is applied at the pulse's area centroid, which for a symmetric pi pulse
reproduces the mean time spent in the upper level. Relaxation 2->1 and 1->0
runs continuously, during pulses included.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import streams
from .jba import PullTimeline
from .waveform import gaussian_edge_area

__all__ = [
    "PulseOverlapError",
    "ControlPulse",
    "QubitTrajectory",
    "equivalent_duration",
    "pulse_for_duration",
    "prep_pulses",
    "simulate_qubit",
    "pull_timeline",
    "prep_relaxation_loss",
    "DEFAULT_SIGMA",
    "DEFAULT_RABI_FREQUENCY",
]

DEFAULT_SIGMA = 4e-9
# full-amplitude Gaussian (no flat top) is a pi pulse
DEFAULT_RABI_FREQUENCY = 1.0 / (2.0 * gaussian_edge_area(DEFAULT_SIGMA, 0.0))


class PulseOverlapError(ValueError):
    pass


@dataclass(frozen=True)
class ControlPulse:
    """Flat-top control pulse with 3-sigma Gaussian edges.

    ``amplitude`` is relative to the maximum drive amplitude; pulses shorter
    than a bare Gaussian are produced at reduced amplitude.
    """

    transition: tuple
    angle: float
    sigma: float = DEFAULT_SIGMA
    flat_top: float = 0.0
    start: float = 0.0
    amplitude: float = 1.0

    def __post_init__(self):
        transition = tuple(int(x) for x in self.transition)
        if transition not in ((0, 1), (1, 2)):
            raise ValueError(f"unsupported transition {self.transition}")
        object.__setattr__(self, "transition", transition)
        if not self.sigma > 0:
            raise ValueError("sigma must be > 0")
        if self.flat_top < 0:
            raise ValueError("flat_top must be >= 0")
        if not 0.0 <= self.angle <= 2.0 * math.pi + 1e-12:
            raise ValueError("angle must lie in [0, 2pi]")

    @property
    def duration(self):
        return self.flat_top + 6.0 * self.sigma

    @property
    def end(self):
        return self.start + self.duration

    @property
    def centroid(self):
        return self.start + 0.5 * self.duration


def equivalent_duration(pulse):
    """Length of the full-amplitude rectangular pulse with the same area."""
    return pulse.amplitude * gaussian_edge_area(pulse.sigma, pulse.flat_top)


def pulse_for_duration(t_equiv, rabi_frequency=DEFAULT_RABI_FREQUENCY, transition=(0, 1), sigma=DEFAULT_SIGMA, start=0.0):
    """Control pulse with a given equivalent duration.

    The rotation angle is ``2 pi rabi_frequency t_equiv`` (wrapped into
    [0, 2pi], which leaves the transfer probability unchanged).
    """
    if t_equiv < 0:
        raise ValueError("t_equiv must be >= 0")
    t_gauss = gaussian_edge_area(sigma, 0.0)
    if t_equiv <= t_gauss:
        flat, amp = 0.0, t_equiv / t_gauss
    else:
        flat, amp = t_equiv - t_gauss, 1.0
    angle = 2.0 * math.pi * rabi_frequency * t_equiv
    if angle > 2.0 * math.pi:
        angle = math.fmod(angle, 2.0 * math.pi)
    return ControlPulse(transition, angle, sigma, flat, start, amp)


def prep_pulses(theta=math.pi, shelve=False, start=0.0, sigma=DEFAULT_SIGMA, t_equiv=None, rabi_frequency=DEFAULT_RABI_FREQUENCY):
    """Rotation on 0-1 optionally followed by a pi pulse on 1-2 (shelving).

    With ``t_equiv`` the 0-1 pulse is built from its equivalent duration
    (Rabi sweeps); otherwise a full-amplitude Gaussian of angle ``theta``.
    """
    pulses = []
    t = start
    if t_equiv is not None:
        p = pulse_for_duration(t_equiv, rabi_frequency, (0, 1), sigma, t)
        pulses.append(p)
        t = p.end
    elif theta != 0:
        p = ControlPulse((0, 1), theta, sigma, 0.0, t)
        pulses.append(p)
        t = p.end
    if shelve:
        p = ControlPulse((1, 2), math.pi, sigma, 0.0, t)
        pulses.append(p)
    return pulses


@dataclass(frozen=True)
class QubitTrajectory:
    """Level history of one shot: ``events`` are ``(time, new_level)``."""

    initial_level: int
    events: tuple = ()
    t_start: float = 0.0
    t_end: float = math.inf

    def __post_init__(self):
        times = [t for t, _ in self.events]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("event times must be strictly increasing")
        if any(level not in (0, 1, 2) for _, level in self.events) or self.initial_level not in (0, 1, 2):
            raise ValueError("levels must be 0, 1 or 2")

    def level_at(self, t):
        """Level at time(s) ``t`` (vectorised)."""
        levels = np.array([self.initial_level] + [lv for _, lv in self.events])
        times = np.array([t for t, _ in self.events], dtype=float)
        idx = np.searchsorted(times, np.asarray(t, dtype=float), side="right")
        out = levels[idx]
        return int(out) if out.ndim == 0 else out

    final_level_at = level_at


def _relax(level, t, t_stop, rates, rng, events):
    while level > 0:
        rate = rates[level]
        if rate <= 0:
            break
        t = t + rng.exponential(1.0 / rate)
        if t >= t_stop:
            break
        level -= 1
        events.append((t, level))
    return level


def simulate_qubit(prep, params, t_end, seed=None, rng=None, t_start=0.0):
    """One Monte Carlo shot of the qubit level from ``t_start`` to ``t_end``.

    Pass either a master ``seed`` or an explicit ``rng``.
    """
    if rng is None:
        rng = streams.stream(streams.as_seed(seed), streams.EXPERIMENT_CODES["budget"], 0, 0, 0, 0, streams.QUBIT)
    pulses = sorted(prep, key=lambda p: p.start)
    for a, b in zip(pulses, pulses[1:]):
        if b.start < a.end - 1e-15:
            raise PulseOverlapError(f"pulses overlap: {a} and {b}")
    rates = (0.0, params.gamma_10, params.gamma_21)
    level = 1 if rng.random() < params.thermal_excited_population else 0
    initial = level
    events = []
    t = t_start
    for pulse in pulses:
        tc = pulse.centroid
        level = _relax(level, t, tc, rates, rng, events)
        t = tc
        k, l = pulse.transition
        if level in (k, l):
            p = math.sin(0.5 * pulse.angle) ** 2
            if rng.random() < p:
                level = l if level == k else k
                if events and events[-1][0] == t:
                    events[-1] = (t, level)
                else:
                    events.append((t, level))
    level = _relax(level, t, t_end, rates, rng, events)
    return QubitTrajectory(initial, tuple(events), t_start, t_end)


def pull_timeline(traj, pulls):
    """Resonator frequency offset versus time implied by a qubit trajectory."""
    values = [pulls[traj.initial_level]] + [pulls[lv] for _, lv in traj.events]
    times = [traj.t_start] + [t for t, _ in traj.events]
    if len(times) > 1 and times[1] <= times[0]:
        # event at t_start replaces the initial value
        times, values = times[1:], values[1:]
    return PullTimeline(tuple(times), tuple(values))


def prep_relaxation_loss(params, shelve=False, n_shots=20000, seed=0, sigma=DEFAULT_SIGMA):
    """Excited population lost to relaxation before readout.

    Difference of the ground fraction at readout start between simulations
    with and without relaxation, after a pi pulse (and a shelving pulse).
    """
    pulses = prep_pulses(math.pi, shelve, 0.0, sigma)
    t_read = pulses[-1].end
    frozen = params.with_(gamma_10=0.0, gamma_21=0.0)
    code = streams.EXPERIMENT_CODES["budget"]
    lost_on = lost_off = 0
    for s in range(n_shots):
        on = simulate_qubit(pulses, params, t_read, rng=streams.stream(seed, code, int(shelve), 0, 0, s, streams.QUBIT))
        off = simulate_qubit(pulses, frozen, t_read, rng=streams.stream(seed, code, int(shelve), 0, 0, s, streams.QUBIT))
        lost_on += on.level_at(t_read) == 0
        lost_off += off.level_at(t_read) == 0
    return (lost_on - lost_off) / n_shots
