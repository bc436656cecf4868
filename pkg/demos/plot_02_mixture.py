"""
Distinguishable boxes break the certainty
=========================================

If the unopened boxes leave records of which one held the particle, a "not
box i" outcome is a classical mixture over those boxes rather than a
coherent superposition. The certainty drops to 1/(N^2 - N + 1).
"""

import numpy as np

from nboxsim import NBoxScenario, certainty_probability
from nboxsim.nbox import residual_mixture
from nboxsim.pps import raw_eq9_sum

s = NBoxScenario(2)
print("residual mixture after 'not box 1':")
print(np.round(residual_mixture(s, 1).matrix.real, 4))

###############################################################################
# Pure projection versus mixture, against the closed form.

for n in (2, 3, 5, 10):
    s = NBoxScenario(n)
    pure = certainty_probability(s, 1, "pure")
    mixed = certainty_probability(s, 1, "mixture")
    print(f"N={n:2d}: pure {pure:.6f}  mixture {mixed:.6f}  1/(N^2-N+1) = {1 / (n * n - n + 1):.6f}")

###############################################################################
# The unweighted sum of final-state populations over the unopened boxes is a
# different quantity: it ignores the initial weights of each branch.

print("raw sum, N=3, i=1:", raw_eq9_sum(NBoxScenario(3), 1))
