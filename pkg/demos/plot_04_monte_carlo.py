"""
Sampling trajectories
=====================

Simulate the experiment trial by trial: draw the intermediate outcome, the
pointer branch when boxes are distinguishable, then the post-selection test.
Trial t draws its randomness from counter block t of a Philox stream, so the
records do not depend on how trials are split across threads.
"""

from nboxsim import NBoxScenario, conditional_distribution, ensemble, open_box_measurement
from nboxsim.harness import estimate_conditional, run_trials

SEED = 1729
s = NBoxScenario(3)
for semantics in ("pure", "mixture"):
    e = ensemble(s, open_box_measurement(s, 1), semantics)
    records = run_trials(e, 100_000, SEED, workers=4)
    est = estimate_conditional(records, labels=e.labels)
    exact = conditional_distribution(e).as_dict()
    print(f"{semantics}: post-selection rate {est.postselection_rate:.4f}")
    for label in e.labels:
        print(f"  {label:10s} {est[label]:.4f} +- {est.stderr(label):.4f}   exact {exact[label]:.6f}")

###############################################################################
# A few raw records under the mixture semantics. The pointer branch names the
# box that held the particle when box 1 was found empty.

for r in records[:6]:
    print(r)
