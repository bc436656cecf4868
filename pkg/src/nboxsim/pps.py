"""Pre- and post-selected ensembles.

An ensemble is prepared in ``initial``, measured once with a projective
measurement, updated by one of the two rules, and finally tested for
projection onto ``final``. Statistics are reported for the sub-ensemble that
passes the final test: ``joint(k) = P(k) * P(final | updated state after k)``
and ``conditional(k) = joint(k) / sum_j joint(j)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, PostselectionImpossible
from .hilbert import ACCUM_TOL, as_state, inner_product
from .measurement import (
    ZERO_PROB,
    DensityMatrix,
    Mode,
    ProjectiveMeasurement,
    UpdateSemantics,
    born_term,
    clamp_probability,
    lueders_update,
    mixture_update,
)

__all__ = [
    "PrePostEnsemble",
    "ConditionalDistribution",
    "postselect_probability",
    "joint_probability",
    "joint_probabilities",
    "conditional_distribution",
    "raw_eq9_sum",
]


@dataclass(frozen=True, eq=False)
class PrePostEnsemble:
    """Initial state, final state, one intermediate measurement and its update rule.

    A vanishing post-selection rate is allowed here; it only becomes an error
    when conditioning is requested.
    """

    initial: np.ndarray
    final: np.ndarray
    measurement: ProjectiveMeasurement
    semantics: UpdateSemantics

    def __post_init__(self):
        object.__setattr__(self, "initial", as_state(self.initial))
        object.__setattr__(self, "final", as_state(self.final))
        if not isinstance(self.semantics, UpdateSemantics):
            object.__setattr__(
                self, "semantics", UpdateSemantics.computational(self.semantics, self.initial.shape[0])
            )
        dims = {self.initial.shape[0], self.final.shape[0], self.measurement.dim}
        if self.semantics.pointer_basis is not None:
            dims.add(self.semantics.pointer_basis.shape[0])
        if len(dims) != 1:
            raise DimensionError(f"ensemble components have dimensions {sorted(dims)}")

    @property
    def dim(self) -> int:
        return self.initial.shape[0]

    @property
    def labels(self):
        return self.measurement.labels

    def with_semantics(self, semantics):
        return PrePostEnsemble(self.initial, self.final, self.measurement, semantics)


@dataclass(frozen=True)
class ConditionalDistribution:
    labels: tuple[str, ...]
    conditional_probs: tuple[float, ...]
    joint_probs: tuple[float, ...]
    postselection_rate: float

    def __getitem__(self, label) -> float:
        return self.conditional_probs[self.labels.index(label)]

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.labels, self.conditional_probs))


def postselect_probability(rho_or_psi, final) -> float:
    """``|<final|psi>|^2`` or ``<final|rho|final>``, clamped to [0, 1]."""
    final = as_state(final)
    if isinstance(rho_or_psi, DensityMatrix):
        if rho_or_psi.dim != final.shape[0]:
            raise DimensionError(f"dimension mismatch: {rho_or_psi.dim} vs {final.shape[0]}")
        return clamp_probability(np.vdot(final, rho_or_psi.matrix @ final).real)
    return clamp_probability(abs(inner_product(final, as_state(rho_or_psi))) ** 2)


def _joint(e: PrePostEnsemble, k: int) -> float:
    p = e.measurement.projectors[k]
    if born_term(e.initial, p) < ZERO_PROB:
        return 0.0
    if e.semantics.mode is Mode.PURE:
        updated, prob = lueders_update(e.initial, p)
    else:
        updated, prob = mixture_update(e.initial, p, e.semantics.pointer_basis)
    return prob * postselect_probability(updated, e.final)


def joint_probability(e: PrePostEnsemble, outcome_label) -> float:
    """P(outcome at the intermediate time and post-selection succeeds)."""
    return _joint(e, e.measurement.index(outcome_label))


def joint_probabilities(e: PrePostEnsemble) -> tuple[float, ...]:
    return tuple(_joint(e, k) for k in range(len(e.measurement)))


def conditional_distribution(e: PrePostEnsemble) -> ConditionalDistribution:
    """Outcome distribution restricted to the post-selected sub-ensemble.

    Raises
    ------
    PostselectionImpossible
        If every joint probability is below 1e-12.
    """
    joints = joint_probabilities(e)
    if max(joints) < ZERO_PROB:
        raise PostselectionImpossible("post-selection never succeeds for this ensemble")
    rate = sum(joints)
    conditional = tuple(j / rate for j in joints)
    assert abs(sum(conditional) - 1.0) <= ACCUM_TOL
    return ConditionalDistribution(e.measurement.labels, conditional, joints, rate)


def raw_eq9_sum(scenario, excluded_box: int) -> float:
    """Unweighted ``sum_{j != i} |<j|final>|^2`` over the box basis.

    ``scenario`` is anything with a ``final`` state attribute (such as an
    :class:`~nboxsim.nbox.NBoxScenario`) or the final state itself. This is
    the naive sum-over-boxes post-selection figure; it is proportional to the
    mixture-weighted joint probability only when the initial amplitudes over
    the remaining boxes are uniform.
    """
    final = as_state(getattr(scenario, "final", scenario))
    dim = final.shape[0]
    if not 1 <= excluded_box <= dim:
        raise IndexError(f"box index {excluded_box} outside 1..{dim}")
    weights = np.abs(final) ** 2
    return float(np.delete(weights, excluded_box - 1).sum())
