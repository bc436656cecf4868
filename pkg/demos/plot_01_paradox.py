"""
Opening any one box finds the particle
======================================

A particle is prepared in a uniform superposition over N+1 boxes and later
post-selected on a state with a negative weight on the last box. Open one
of the first N boxes in between and keep only the runs that pass
post-selection: the particle is always in the box you opened.
"""

import numpy as np

from nboxsim import NBoxScenario, born_distribution, conditional_distribution, ensemble, open_box_measurement
from nboxsim.nbox import residual_pure_state

s = NBoxScenario(3)
print("initial:", np.round(s.initial.real, 4))
print("final:  ", np.round(s.final.real, 4))

###############################################################################
# Before post-selection, opening box 1 mostly finds it empty.

m = open_box_measurement(s, 1)
print(born_distribution(s.initial, m).as_dict())

###############################################################################
# After post-selection the "empty" branch is gone. The residual state left
# by finding box 1 empty is orthogonal to the final state.

for i in range(1, s.n + 1):
    d = conditional_distribution(ensemble(s, open_box_measurement(s, i), "pure"))
    overlap = abs(np.vdot(s.final, residual_pure_state(s, i)))
    print(f"box {i}: P(box-{i} | post) = {d.as_dict()[f'box-{i}']:.12g}, <final|residual> = {overlap:.1e}")
