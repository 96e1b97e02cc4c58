"""
Latching a bifurcation amplifier
================================

Single trajectories of the resonator field under the two-step readout
pulse, with and without noise, and the resulting switching curve.
"""

import numpy as np

from muxjba.jba import bifurcation_drive, integrate_field, readout_frame, switching_probability_vs_drive
from muxjba.params import default_cell
from muxjba.waveform import ReadoutPulseShape, make_readout_envelope

frame = readout_frame(default_cell(1), 0)
eps = bifurcation_drive(frame)

# Without noise the outcome is a step function of the peak power.
for db in (-2.0, -0.5, 0.5):
    env = make_readout_envelope(ReadoutPulseShape(peak_power_dB=db), 2e9, eps)
    traj = integrate_field(frame, env)
    print(f"{db:+.1f} dB: latched={traj.latch_flag}, final photons {traj.photons[-1]:.1f}")

###############################################################################
# With noise
# ----------
# Additive noise turns the step into an S-shaped curve. The hold at 85 % of
# the peak power keeps latched shots on the high branch.

powers = np.arange(-5.0, 1.01, 0.5)
s = switching_probability_vs_drive(frame, noise_strength=0.487, n_shots=300, seed=1, powers_db=powers)
for x, p in zip(s.power_db, s.p_switch):
    print(f"{x:+5.1f} dB  {'#' * int(40 * p):40s} {p:.2f}")
