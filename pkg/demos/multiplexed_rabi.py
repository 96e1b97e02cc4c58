"""
Simultaneous Rabi oscillations
==============================

Every cell gets a control pulse of the same equivalent duration, one after
the other, then all four are read at once.
"""

from muxjba.experiments import ExperimentPlan, run_rabi_experiment
from muxjba.params import default_cells

plan = ExperimentPlan(cells=default_cells(), n_shots=300, seed=4)
res = run_rabi_experiment(plan)
for cid, fit in res.fits.items():
    if fit is None:
        print(f"cell {cid}: fit failed")
        continue
    print(f"cell {cid}: period {fit['period'] * 1e9:.1f} ns, contrast {fit['contrast']:.2f}")
