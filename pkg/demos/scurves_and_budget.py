"""
S-curves and readout error budget
=================================

Switching probability versus readout power after no pulse, a pi pulse, and
a pi pulse followed by shelving into the second excited level. The contrast
at the best power sets the readout errors.
"""

from muxjba.analysis import error_budget, scurve_crossing, scurve_separation
from muxjba.experiments import ExperimentPlan, run_scurve_experiment
from muxjba.params import default_cell

cell = default_cell(1)
plan = ExperimentPlan(cells=[cell], n_shots=500, seed=2)
res = run_scurve_experiment(plan)
curves = res.curves[1]

print("power   ground     pi  pi+shelve")
for j, x in enumerate(plan.powers_db):
    row = [curves[n].p_switch[j] for n in ("ground", "pi", "pi_shelved")]
    print(f"{x:+6.2f}  " + "  ".join(f"{p:5.3f}" for p in row))

for name in curves:
    print(f"{name}: 50% point at {scurve_crossing(curves[name], 0.5):+.2f} dB")
print(f"separation 0/1 = {scurve_separation(curves['ground'], curves['pi']):.2f} dB")

###############################################################################
# Budget
# ------
# Errors at the power of maximum contrast, split into thermal population,
# decay before readout and decay during readout.

b = error_budget(curves["ground"], curves["pi"], curves["pi_shelved"], cell)
print(f"ground error {b.ground_error:.3%}")
print(f"excited error {b.excited_error_noshelve:.3%} (shelved {b.excited_error_shelve:.3%})")
print(f"thermal {b.thermal_component:.3%}, prep decay {b.prep_relaxation_noshelve:.3%}")
