"""
Cell parameters and what follows from them
==========================================

Linewidth, dispersive pulls, Purcell limit and thermal population for the
first cell, followed by the bistable band of its bifurcation amplifier.
"""

from muxjba.jba import bifurcation_drive, bifurcation_edges, readout_frame, steady_states
from muxjba.params import default_cell, dispersive_pulls, linewidth, purcell_time

cell = default_cell(1)
print(f"resonator {cell.f_r_bare / 1e9:.3f} GHz, qubit {cell.f01 / 1e9:.3f} GHz")
print(f"kappa/2pi = {linewidth(cell) / 1e6:.2f} MHz")

# Each qubit level pulls the resonator by a different amount; the drive
# sees the difference between levels.
pulls = dispersive_pulls(cell)
print("pull per level (MHz):", [round(p / 1e6, 3) for p in pulls.pull_per_level])
print(f"2chi = {pulls.two_chi / 1e6:.3f} MHz")
print(f"Purcell limit T_P = {purcell_time(cell) * 1e6:.2f} us")
print(f"thermal excited population at 70 mK = {cell.thermal_excited_population:.4f}")

###############################################################################
# The bistable band
# -----------------
# Driving 9 MHz below the resonance with a negative Kerr constant gives three
# steady states between two critical drives.

frame = readout_frame(cell, 0)
n_lo, n_hi = bifurcation_edges(frame)
print(f"low branch ends at {n_lo:.2f} photons, high branch ends at {n_hi:.2f}")
eps_up = bifurcation_drive(frame)
for scale in (0.7, 0.9, 0.99, 1.01):
    roots = steady_states(frame, scale * eps_up)
    print(f"drive {scale:4.2f} x switching drive -> photons {[round(float(n), 2) for n in roots]}")
