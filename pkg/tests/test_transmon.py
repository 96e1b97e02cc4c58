import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from muxjba import streams
from muxjba.params import default_cell
from muxjba.transmon import (
    DEFAULT_RABI_FREQUENCY,
    ControlPulse,
    PulseOverlapError,
    QubitTrajectory,
    equivalent_duration,
    prep_pulses,
    prep_relaxation_loss,
    pull_timeline,
    pulse_for_duration,
    simulate_qubit,
)

CELL = default_cell(1)
COLD = CELL.with_(thermal_excited_population=0.0)


def _levels(pulses, params, t, n, tag):
    return np.array(
        [simulate_qubit(pulses, params, t, rng=streams.stream(0, 90, tag, 0, 0, s, 0)).level_at(t) for s in range(n)]
    )


def test_gaussian_pi_pulse_equivalent_duration():
    p = ControlPulse((0, 1), math.pi)
    assert equivalent_duration(p) == pytest.approx(4e-9 * math.sqrt(2 * math.pi) * math.erf(3 / math.sqrt(2)))
    assert 2 * math.pi * DEFAULT_RABI_FREQUENCY * equivalent_duration(p) == pytest.approx(math.pi)


@given(st.floats(0.0, 60e-9))
@settings(max_examples=50, deadline=None)
def test_pulse_for_duration_area(t_equiv):
    p = pulse_for_duration(t_equiv)
    assert equivalent_duration(p) == pytest.approx(t_equiv, abs=1e-18)
    # transfer probability follows sin^2(pi f t)
    assert math.sin(p.angle / 2) ** 2 == pytest.approx(math.sin(math.pi * DEFAULT_RABI_FREQUENCY * t_equiv) ** 2, abs=1e-9)


def test_overlapping_pulses_rejected():
    a = ControlPulse((0, 1), math.pi, start=0.0)
    b = ControlPulse((1, 2), math.pi, start=10e-9)
    with pytest.raises(PulseOverlapError):
        simulate_qubit([a, b], CELL, 1e-6, seed=0)


def test_half_pi_transfer_fraction():
    lv = _levels(prep_pulses(math.pi / 2), COLD.with_(gamma_10=0.0, gamma_21=0.0), 30e-9, 4000, 1)
    assert lv.mean() == pytest.approx(0.5, abs=0.03)


def test_thermal_start():
    lv = _levels([], CELL.with_(gamma_10=0.0, gamma_21=0.0), 0.0, 20000, 2)
    assert lv.mean() == pytest.approx(CELL.thermal_excited_population, abs=0.003)


def test_double_jump_two_exponential_oracle():
    # start in |2>: P0(t) = 1 - (a e^{-bt} - b e^{-at}) / (a - b) with a = G21, b = G10
    a, b = COLD.gamma_21, COLD.gamma_10
    pulses = prep_pulses(math.pi, shelve=True)
    t0 = pulses[-1].centroid
    t = t0 + 1.5e-6
    n = 6000
    lv = _levels(pulses, COLD, t, n, 3)
    tau = t - t0
    p0 = 1 - (a * math.exp(-b * tau) - b * math.exp(-a * tau)) / (a - b)
    # relaxation during the pulses slightly perturbs the start; allow 4 sigma
    assert (lv == 0).mean() == pytest.approx(p0, abs=4 * math.sqrt(p0 * (1 - p0) / n) + 0.01)


def test_shelving_delays_decay():
    t = 1.0e-6
    plain = (_levels(prep_pulses(math.pi), COLD, t, 3000, 4) == 0).mean()
    shelved = (_levels(prep_pulses(math.pi, True), COLD, t, 3000, 5) == 0).mean()
    assert shelved < plain


def test_prep_relaxation_loss_magnitudes():
    lo = prep_relaxation_loss(CELL, False, n_shots=5000)
    hi = prep_relaxation_loss(CELL, True, n_shots=5000)
    # pi pulse centroid to readout ~ half a pulse plus ~ one more for shelving
    assert 0.002 < lo < hi < 0.02


def test_pull_timeline_follows_levels():
    traj = QubitTrajectory(1, ((50e-9, 0),), 0.0, 1e-6)
    tl = pull_timeline(traj, (6.0, 2.0, 1.0))
    assert tl.at([0.0, 49e-9, 50e-9]).tolist() == [2.0, 2.0, 6.0]
