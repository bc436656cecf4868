"""The paradox invariant suite run by ``nboxsim verify``.

Each check sweeps every ``N`` in ``[n_min, n_max]`` and every box ``i <= N``
and records the worst deviation seen. ``tolerance`` applies to the checks
stated at 1e-9; checks stated at 1e-12 keep that bound.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..hilbert import inner_product
from ..measurement import born_distribution
from ..nbox import (
    NBoxScenario,
    all_boxes_measurement,
    certainty_probability,
    ensemble,
    open_box_measurement,
    refinement_report,
    residual_pure_state,
)
from ..pps import conditional_distribution

__all__ = ["CheckResult", "brute_force_mixture_certainty", "run_invariant_suite"]

TIGHT = 1e-12
BRUTE_FORCE_MAX_N = 6


@dataclass(frozen=True)
class CheckResult:
    criterion: int
    name: str
    passed: bool
    worst: float
    bound: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.criterion}. {self.name}: worst {self.worst:.3e} (bound {self.bound:.0e}){self.detail}"


def brute_force_mixture_certainty(n: int, i: int) -> float:
    """P(box-i | post) with distinguishable boxes, by enumerating classical branches.

    Plain-float bookkeeping over (outcome, box the particle sits in,
    post-selection pass/fail); no linear algebra from the library.
    """
    d = n + 1
    amp_init = [1.0 / math.sqrt(d)] * d
    norm = math.sqrt(n * n - n + 1)
    amp_final = [1.0 / norm] * n + [-(n - 1) / norm]
    events = {}
    for box in range(1, d + 1):
        outcome = "box" if box == i else "not-box"
        p_box = amp_init[box - 1] ** 2
        p_post = amp_final[box - 1] ** 2
        events[outcome, box, True] = p_box * p_post
        events[outcome, box, False] = p_box * (1.0 - p_post)
    joint_box = sum(p for (o, _, passed), p in events.items() if passed and o == "box")
    joint_all = sum(p for (_, _, passed), p in events.items() if passed)
    return joint_box / joint_all


def _sweep(n_min, n_max):
    for n in range(n_min, n_max + 1):
        s = NBoxScenario(n)
        for i in range(1, n + 1):
            yield s, i


def run_invariant_suite(n_min: int = 2, n_max: int = 32, tolerance: float = 1e-9) -> list[CheckResult]:
    if n_min < 2 or n_max < n_min:
        raise ValueError(f"need 2 <= n_min <= n_max, got {n_min}..{n_max}")
    results = []

    worst = max(abs(certainty_probability(s, i, "pure") - 1.0) for s, i in _sweep(n_min, n_max))
    results.append(CheckResult(1, "pure-projection certainty P(box-i|post) = 1", worst <= tolerance, worst, tolerance))

    worst = max(abs(inner_product(s.final, residual_pure_state(s, i))) for s, i in _sweep(n_min, n_max))
    results.append(CheckResult(2, "residual state orthogonal to final", worst <= TIGHT, worst, TIGHT))

    worst = worst_brute = 0.0
    for s, i in _sweep(n_min, n_max):
        p = certainty_probability(s, i, "mixture")
        worst = max(worst, abs(p - 1.0 / (s.n**2 - s.n + 1)))
        if s.n <= BRUTE_FORCE_MAX_N:
            worst_brute = max(worst_brute, abs(p - brute_force_mixture_certainty(s.n, i)))
    results.append(
        CheckResult(3, "mixture certainty = 1/(N^2-N+1)", worst <= tolerance, worst, tolerance)
    )
    results.append(
        CheckResult(3, f"mixture matches brute-force enumeration (N <= {BRUTE_FORCE_MAX_N})",
                    worst_brute <= TIGHT, worst_brute, TIGHT)
    )

    worst_u = worst_c = 0.0
    for n in range(n_min, n_max + 1):
        s = NBoxScenario(n)
        m = all_boxes_measurement(s)
        probs = np.array(born_distribution(s.initial, m).probs)
        worst_u = max(worst_u, float(np.max(np.abs(probs - 1.0 / s.dim))))
        expected = np.ones(s.dim)
        expected[-1] = (n - 1) ** 2
        expected /= expected.sum()
        cond = np.array(conditional_distribution(ensemble(s, m, "pure")).conditional_probs)
        worst_c = max(worst_c, float(np.max(np.abs(cond - expected))))
    results.append(CheckResult(4, "all-boxes unconditional uniform 1/(N+1)", worst_u <= TIGHT, worst_u, TIGHT))
    results.append(
        CheckResult(4, "all-boxes post-selected proportional to (1,...,1,(N-1)^2)", worst_c <= tolerance,
                    worst_c, tolerance)
    )

    worst = 0.0
    for s, i in _sweep(n_min, n_max):
        d = born_distribution(s.initial, open_box_measurement(s, i))
        worst = max(worst, abs(d[f"not-box-{i}"] - s.n / (s.n + 1)))
    results.append(CheckResult(5, "P(not-box-i) on the initial state = N/(N+1)", worst <= TIGHT, worst, TIGHT))

    bad = []
    worst = 0.0
    for s, i in _sweep(n_min, n_max):
        r = refinement_report(s, i)
        if not (
            r.open_box_pairs_compatible
            and r.all_boxes_refines_open_box
            and r.indistinguishable_refines_open_box
            and not r.all_boxes_compatible_with_indistinguishable
        ):
            bad.append((s.n, i))
        if s.n == 2:
            worst = max(worst, abs(r.max_cross_commutator - 1.0 / math.sqrt(2.0)))
    ok = not bad and worst <= tolerance
    detail = f"; violations at (N, i) = {bad[:5]}" if bad else ""
    results.append(CheckResult(6, "refinement/compatibility structure (N=2 commutator 1/sqrt 2)", ok, worst,
                               tolerance, detail))
    return results
