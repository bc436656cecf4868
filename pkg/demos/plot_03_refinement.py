"""
Two refinements of one degenerate measurement
=============================================

"Is the particle in box i?" has a degenerate "no" outcome. Two finer
measurements reproduce its statistics: opening every box, or measuring the
uniform superposition of the other boxes. Both refine the coarse one, yet
they do not commute with each other.
"""

from nboxsim import NBoxScenario, all_boxes_measurement, is_refinement, open_box_measurement
from nboxsim.nbox import indistinguishable_measurement, refinement_report

s = NBoxScenario(2)
coarse = open_box_measurement(s, 1)
print(is_refinement(coarse, all_boxes_measurement(s)).partition)
print(is_refinement(coarse, indistinguishable_measurement(s, 1)).partition)

###############################################################################
# The cross-commutator shrinks slowly with N but never vanishes.

for n in (2, 3, 4, 8):
    r = refinement_report(NBoxScenario(n), 1)
    print(f"N={n}: compatible={r.all_boxes_compatible_with_indistinguishable}, "
          f"max ||[P, Q]|| = {r.max_cross_commutator:.6f}")
