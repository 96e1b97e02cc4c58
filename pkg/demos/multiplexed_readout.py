"""
Four qubits read from one line
==============================

Four readout tones at different sideband offsets share one drive and one
output record. Each channel is demodulated separately and classified with
its own separatrix.
"""

import numpy as np

from muxjba.experiments import ExperimentPlan, run_simultaneous_readout
from muxjba.params import CHANNEL_OFFSETS, default_cells

plan = ExperimentPlan(cells=default_cells(), n_shots=400, seed=3)
res = run_simultaneous_readout(plan, "half_pi")

print("sideband offsets (MHz):", [d / 1e6 for d in CHANNEL_OFFSETS])
print(f"composed drive: {len(res.drive_waveform)} samples, peak |x| {np.abs(res.drive_waveform.samples).max():.2f}")
for cid in res.cell_ids:
    counts, _ = res.histograms[cid]
    print(
        f"cell {cid}: p = {res.p_switch[cid]:.3f}, "
        f"cluster separation {res.separation_in_std[cid]:.1f} std, {counts.size} histogram bins"
    )
