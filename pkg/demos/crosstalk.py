"""
Crosstalk between neighbouring readouts
=======================================

Cell 2 is put in an equal superposition while cell 1 is left in |0> or
flipped to |1>. Any change in cell 2's switching probability is crosstalk.
A linear coupling between the resonators makes it visible.
"""

from muxjba.experiments import ExperimentPlan, run_crosstalk_experiment
from muxjba.params import default_cell

for coupling in (0.0, 0.1):
    plan = ExperimentPlan(cells=[default_cell(1), default_cell(2)], n_shots=2000, seed=5, jba_coupling=coupling)
    r = run_crosstalk_experiment(plan)
    print(f"coupling {coupling}: dp2 = {r.delta_p:+.4f} +- {r.sigma:.4f} ({r.significance:.1f} sigma)")
print(f"shots per condition for 0.05 % resolution: {r.shots_for_resolution['shots']}")
