"""The N-box scenario.

A particle lives in ``N + 1`` boxes (basis kets ``|1>..|N+1>``). It is
prepared in the uniform superposition and post-selected on

    |final> = (|1> + ... + |N> - (N-1)|N+1>) / sqrt(N^2 - N + 1).

Opening any single box ``i <= N`` and keeping only post-selected runs finds
the particle in box ``i`` every time under pure projection. If the unopened
boxes are treated as distinguishable (classical mixture), the same figure
drops to ``1 / (N^2 - N + 1)``.

Box indices are 1-based throughout this module.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .hilbert import (
    MAX_DIM,
    basis_state,
    complement_projector,
    projector_from_span,
    rank_one_projector,
)
from .measurement import (
    DensityMatrix,
    Mode,
    ProjectiveMeasurement,
    UpdateSemantics,
    are_compatible,
    is_refinement,
    max_cross_commutator,
)
from .pps import PrePostEnsemble, conditional_distribution

__all__ = [
    "EXCLUDED_MARK",
    "NBoxScenario",
    "GuessReport",
    "RefinementReport",
    "initial_state",
    "final_state",
    "open_box_measurement",
    "all_boxes_measurement",
    "indistinguishable_measurement",
    "residual_pure_state",
    "residual_mixture",
    "box_semantics",
    "ensemble",
    "certainty_probability",
    "guessing_game",
    "refinement_report",
]

EXCLUDED_MARK = "[excluded]"


@dataclass(frozen=True)
class NBoxScenario:
    n: int

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)):
            raise TypeError(f"n must be an integer, got {self.n!r}")
        if self.n < 2:
            raise ValueError(f"n must be at least 2, got {self.n}")
        if self.n + 1 > MAX_DIM:
            raise ValueError(f"n + 1 exceeds the supported dimension {MAX_DIM}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def dim(self) -> int:
        return self.n + 1

    @cached_property
    def initial(self):
        return initial_state(self)

    @cached_property
    def final(self):
        return final_state(self)


@dataclass(frozen=True)
class GuessReport:
    opened_box: int
    guessed_box: int
    record_in_opened_prob: float
    guess_correct_prob: float
    semantics: UpdateSemantics


@dataclass(frozen=True)
class RefinementReport:
    box: int
    all_boxes_refines_open_box: bool
    indistinguishable_refines_open_box: bool
    all_boxes_compatible_with_indistinguishable: bool
    max_cross_commutator: float
    open_box_pairs_compatible: bool


def _readonly(a):
    a.setflags(write=False)
    return a


def initial_state(s: NBoxScenario):
    """Uniform superposition over all ``N + 1`` boxes."""
    return _readonly(np.full(s.dim, 1.0 / np.sqrt(s.dim), dtype=np.complex128))


def final_state(s: NBoxScenario):
    n = s.n
    norm = np.sqrt(n * n - n + 1.0)
    v = np.full(s.dim, 1.0 / norm, dtype=np.complex128)
    v[n] = -(n - 1) / norm
    return _readonly(v)


def _check_box(s, i, force=False):
    if isinstance(i, bool) or not isinstance(i, (int, np.integer)):
        raise TypeError(f"box index must be an integer, got {i!r}")
    if not 1 <= i <= s.dim:
        raise IndexError(f"box index {i} outside 1..{s.dim}")
    if i == s.dim and not force:
        raise IndexError(f"box {i} is the post-selection box; pass force=True to use it")
    return int(i)


def _box_projector(s, i):
    return rank_one_projector(basis_state(s.dim, i))


@lru_cache(maxsize=512)
def open_box_measurement(s: NBoxScenario, i: int, force: bool = False) -> ProjectiveMeasurement:
    """Open box ``i`` only: outcomes ``box-i`` and ``not-box-i``.

    Box ``N + 1`` is refused unless ``force`` is set, in which case both
    labels carry the ``[excluded]`` marker.
    """
    i = _check_box(s, i, force)
    p = _box_projector(s, i)
    mark = EXCLUDED_MARK if i == s.dim else ""
    return ProjectiveMeasurement([p, complement_projector(p)], [f"box-{i}{mark}", f"not-box-{i}{mark}"])


@lru_cache(maxsize=512)
def all_boxes_measurement(s: NBoxScenario) -> ProjectiveMeasurement:
    return ProjectiveMeasurement(
        [_box_projector(s, j) for j in range(1, s.dim + 1)],
        [f"box-{j}" for j in range(1, s.dim + 1)],
    )


def _uniform_rest(s, i):
    v = np.ones(s.dim, dtype=np.complex128)
    v[i - 1] = 0.0
    return v


@lru_cache(maxsize=512)
def indistinguishable_measurement(s: NBoxScenario, i: int) -> ProjectiveMeasurement:
    """Box ``i`` versus the uniform superposition of the other boxes.

    The rank ``N - 1`` remainder completes the family; it is orthogonal to
    the initial state and so never fires on it.
    """
    i = _check_box(s, i)
    e_i = basis_state(s.dim, i)
    u = _uniform_rest(s, i)
    remainder = complement_projector(projector_from_span([e_i, u]))
    return ProjectiveMeasurement(
        [rank_one_projector(e_i), rank_one_projector(u), remainder],
        [f"box-{i}", "uniform-rest", "remainder"],
    )


def residual_pure_state(s: NBoxScenario, i: int):
    """State left by a pure-projection ``not-box-i`` outcome on the initial state."""
    i = _check_box(s, i)
    return _readonly(_uniform_rest(s, i) / np.sqrt(s.n))


def residual_mixture(s: NBoxScenario, i: int, force: bool = False) -> DensityMatrix:
    """Equal mixture of the boxes other than ``i``."""
    i = _check_box(s, i, force)
    diag = np.full(s.dim, 1.0 / s.n)
    diag[i - 1] = 0.0
    return DensityMatrix(np.diag(diag).astype(np.complex128))


def box_semantics(s: NBoxScenario, semantics) -> UpdateSemantics:
    """Coerce ``"pure"``/``"mixture"`` (or a ``Mode``) to semantics over the box basis."""
    if isinstance(semantics, UpdateSemantics):
        return semantics
    return UpdateSemantics.computational(Mode(semantics), s.dim)


def ensemble(s: NBoxScenario, measurement: ProjectiveMeasurement, semantics) -> PrePostEnsemble:
    return PrePostEnsemble(s.initial, s.final, measurement, box_semantics(s, semantics))


def certainty_probability(s: NBoxScenario, i: int, semantics) -> float:
    """P(box-i | post-selected) after opening box ``i`` alone."""
    i = _check_box(s, i)
    e = ensemble(s, open_box_measurement(s, i), semantics)
    return conditional_distribution(e)[f"box-{i}"]


def guessing_game(s: NBoxScenario, opened: int, guess: int, semantics) -> GuessReport:
    """One observer opens box ``opened``; a second, seeing only post-selection, guesses ``guess``.

    The guess is scored by rerunning the ensemble as if box ``guess`` had been
    the one opened.
    """
    sem = box_semantics(s, semantics)
    return GuessReport(
        opened_box=_check_box(s, opened),
        guessed_box=_check_box(s, guess),
        record_in_opened_prob=certainty_probability(s, opened, sem),
        guess_correct_prob=certainty_probability(s, guess, sem),
        semantics=sem,
    )


def refinement_report(s: NBoxScenario, i: int) -> RefinementReport:
    i = _check_box(s, i)
    open_i = open_box_measurement(s, i)
    everything = all_boxes_measurement(s)
    indist = indistinguishable_measurement(s, i)
    pairs_ok = all(
        are_compatible(open_i, open_box_measurement(s, j)) for j in range(1, s.n + 1) if j != i
    )
    return RefinementReport(
        box=i,
        all_boxes_refines_open_box=is_refinement(open_i, everything).holds,
        indistinguishable_refines_open_box=is_refinement(open_i, indist).holds,
        all_boxes_compatible_with_indistinguishable=are_compatible(everything, indist),
        max_cross_commutator=max_cross_commutator(everything, indist),
        open_box_pairs_compatible=pairs_ok,
    )
