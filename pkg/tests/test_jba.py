import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from muxjba import streams
from muxjba.jba import (
    DriveFrame,
    PullTimeline,
    _shot_noise,
    bifurcation_drive,
    bifurcation_edges,
    detect_latch,
    integrate_field,
    integrate_fields,
    latch_threshold,
    readout_frame,
    steady_states,
    switching_probability_vs_drive,
)
from muxjba.params import default_cell
from muxjba.waveform import ComplexEnvelope, ReadoutPulseShape, make_readout_envelope

FRAME = DriveFrame(9e6, -0.31e6, 3.1e6)


def test_edges_closed_form():
    # roots of 3K^2 n^2 + 4DK n + D^2 + kappa^2/4
    d, k, kap = 9e6, -0.31e6, 3.1e6
    roots = np.sort(np.roots([3 * k * k, 4 * d * k, d * d + kap * kap / 4]).real)
    lo, hi = bifurcation_edges(FRAME)
    assert lo == pytest.approx(roots[0], rel=1e-9)
    assert hi == pytest.approx(roots[1], rel=1e-9)
    assert lo == pytest.approx(10.118, abs=1e-3)
    assert hi == pytest.approx(28.59, abs=1e-2)


def test_no_bistability_below_critical_detuning():
    # critical detuning sqrt(3) kappa / 2
    assert bifurcation_edges(DriveFrame(0.85 * math.sqrt(3) * 3.1e6 / 2, -0.31e6, 3.1e6)) is None
    assert bifurcation_edges(DriveFrame(1.05 * math.sqrt(3) * 3.1e6 / 2, -0.31e6, 3.1e6)) is not None


@given(st.floats(0.05, 2.0))
@settings(max_examples=60, deadline=None)
def test_steady_states_solve_cubic(scale):
    eps = scale * bifurcation_drive(FRAME)
    roots = steady_states(FRAME, eps)
    e2 = (eps / (2 * math.pi)) ** 2
    for n in roots:
        resid = n * ((9e6 - 0.31e6 * n) ** 2 + (1.55e6) ** 2) - e2
        assert abs(resid) <= 1e-7 * e2
    lower = bifurcation_drive(FRAME, "lower")
    upper = bifurcation_drive(FRAME)
    inside = lower * 1.0001 < eps < upper * 0.9999
    outside = eps < lower * 0.9999 or eps > upper * 1.0001
    if inside:
        assert len(roots) == 3
    elif outside:
        assert len(roots) == 1


def test_latch_threshold_regions():
    lo, hi = bifurcation_edges(FRAME)
    assert latch_threshold(FRAME, 0.5 * bifurcation_drive(FRAME, "lower")) == math.inf
    assert latch_threshold(FRAME, 1.2 * bifurcation_drive(FRAME)) == lo
    mid = latch_threshold(FRAME, 0.98 * bifurcation_drive(FRAME))
    assert lo < mid < hi


def test_linear_resonator_reaches_analytic_steady_state():
    frame = DriveFrame(2e6, 0.0, 3e6)
    eps = 1e7
    a = integrate_fields(frame, np.full((1, 6000), eps), 0.5e-9)[0, 0]
    expected = -1j * eps / (1j * 2 * math.pi * 2e6 + math.pi * 3e6)
    assert abs(a[-1] - expected) < 1e-6 * abs(expected)


def _ramp(level):
    # adiabatic ramp: a sudden step overshoots and can switch below the edge
    eps = bifurcation_drive(FRAME) * level
    env = ComplexEnvelope(eps * np.minimum(np.arange(8000) / 4000, 1.0).astype(complex), 2e9)
    return integrate_field(FRAME, env)


@pytest.mark.parametrize("level, latched", [(0.8, False), (0.98, False), (1.02, True), (1.1, True)])
def test_deterministic_switching(level, latched):
    traj = _ramp(level)
    assert traj.latch_flag is latched
    if latched:
        eps = bifurcation_drive(FRAME) * level
        assert traj.photons[-1] == pytest.approx(steady_states(FRAME, eps)[-1], rel=1e-3)


def test_hysteresis_no_unlatch_at_85_percent_hold():
    env = make_readout_envelope(ReadoutPulseShape(peak_power_dB=1.0), 2e9, bifurcation_drive(FRAME))
    n_shots = 200
    noise = _shot_noise(3, [(99, 0, 0, 0, s, streams.FIELD) for s in range(n_shots)], (1, len(env)))
    a = integrate_fields(FRAME, env.samples[None, :], env.dt, noise_photons=0.6, noise=noise)[:, 0]
    photons = np.abs(a) ** 2
    lo, _ = bifurcation_edges(FRAME)
    thr = np.full(len(env), lo)
    flags, idx = detect_latch(photons, thr, env.dt)
    assert flags.mean() > 0.95
    hold_thr = latch_threshold(FRAME, abs(env.samples[-1]))
    for s in np.flatnonzero(flags):
        after = photons[s, idx[s] + 200 :]
        assert after.min() > hold_thr


def test_stationary_noise_photons():
    n_shots, n_steps = 200, 4000
    noise = _shot_noise(1, [(98, 0, 0, 0, s, streams.FIELD) for s in range(n_shots)], (1, n_steps))
    a = integrate_fields(FRAME, np.zeros((1, n_steps)), 0.5e-9, noise_photons=0.5, noise=noise)
    mean_n = np.mean(np.abs(a[:, 0, 1000:]) ** 2)
    assert mean_n == pytest.approx(0.5, rel=0.05)


def test_detect_latch_needs_sustained_excursion():
    dt = 0.5e-9
    photons = np.zeros(400)
    photons[10:90] = 50.0  # 40 ns spike
    flags, _ = detect_latch(photons, np.full(400, 20.0), dt)
    assert not flags
    photons[200:320] = 50.0
    flags, idx = detect_latch(photons, np.full(400, 20.0), dt)
    assert flags and idx == 200


def test_pull_timeline_mid_pulse_jump():
    tl = PullTimeline((0.0, 100e-9), (0.0, -3.8e6))
    assert tl.at([0.0, 50e-9, 100e-9, 1e-6]).tolist() == [0.0, 0.0, -3.8e6, -3.8e6]


def test_readout_frame_detunings_cell1():
    cell = default_cell(1)
    assert readout_frame(cell, 0).detuning_over_2pi == pytest.approx(9e6)
    assert readout_frame(cell, 1).detuning_over_2pi == pytest.approx(9e6 - 3.835e6, rel=1e-3)


def test_switching_curve_deterministic_step():
    s = switching_probability_vs_drive(FRAME, powers_db=[-3.0, -1.5, 0.3, 2.0], n_shots=100)
    assert s.p_switch.tolist() == [0.0, 0.0, 1.0, 1.0]


def test_switching_curve_seed_reproducible():
    kw = dict(noise_strength=0.5, n_shots=100, powers_db=[-1.0, 0.0], pulse_shape=ReadoutPulseShape(latch_duration=300e-9))
    a = switching_probability_vs_drive(FRAME, seed=5, **kw)
    b = switching_probability_vs_drive(FRAME, seed=5, **kw)
    assert np.array_equal(a.p_switch, b.p_switch)
