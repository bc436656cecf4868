"""Projective measurements, Born statistics and state-update rules.

Two update rules are supported for an outcome with projector ``P``:

* pure projection (Lüders): ``|psi> -> P|psi> / ||P|psi>||``;
* classical mixture: the outcome is read as "one of the pointer states in the
  range of ``P``, unknown which", giving the diagonal density
  ``sum_b |<b|psi>|^2 |b><b|`` renormalized to unit trace.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import (
    DimensionError,
    LabelError,
    MeasurementError,
    PointerBasisError,
    ProbabilityError,
    ZeroProbabilityOutcome,
)
from .hilbert import (
    ACCUM_TOL,
    EXACT_TOL,
    Projector,
    as_state,
    commutator_norm,
    fix_phase,
    max_abs,
)

__all__ = [
    "ZERO_PROB",
    "Mode",
    "UpdateSemantics",
    "DensityMatrix",
    "ProjectiveMeasurement",
    "MeasurementDiagnostics",
    "OutcomeDistribution",
    "Refinement",
    "clamp_probability",
    "validate_measurement",
    "born_term",
    "born_distribution",
    "lueders_update",
    "branch_weights",
    "mixture_update",
    "dephase",
    "is_refinement",
    "max_cross_commutator",
    "are_compatible",
]

ZERO_PROB = 1e-12  # below this an outcome is treated as impossible


def clamp_probability(p: float) -> float:
    """Clamp float noise into [0, 1]; anything beyond 1e-12 outside is a bug."""
    p = float(p)
    if p < -EXACT_TOL or p > 1.0 + EXACT_TOL or not np.isfinite(p):
        raise ProbabilityError(f"probability {p!r} outside [0, 1] beyond float noise")
    return min(max(p, 0.0), 1.0)


class Mode(str, enum.Enum):
    PURE = "pure"
    MIXTURE = "mixture"


@dataclass(frozen=True, eq=False)
class UpdateSemantics:
    """Which update rule applies after the intermediate measurement.

    ``pointer_basis`` holds the distinguishing basis as columns and is required
    for (and only for) the mixture rule.
    """

    mode: Mode
    pointer_basis: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.mode is Mode.PURE:
            if self.pointer_basis is not None:
                raise ValueError("pure projection takes no pointer basis")
            return
        if self.pointer_basis is None:
            raise PointerBasisError("mixture semantics needs a pointer basis")
        b = np.array(self.pointer_basis, dtype=np.complex128)
        if b.ndim != 2 or b.shape[0] != b.shape[1]:
            raise PointerBasisError(f"pointer basis must be a square matrix of columns, got {b.shape}")
        defect = max_abs(b.conj().T @ b - np.eye(b.shape[0]))
        if defect > ACCUM_TOL:
            raise PointerBasisError(f"pointer basis not orthonormal (defect {defect:.3g})")
        b.setflags(write=False)
        object.__setattr__(self, "pointer_basis", b)

    @classmethod
    def pure(cls):
        return cls(Mode.PURE)

    @classmethod
    def mixture(cls, pointer_basis):
        return cls(Mode.MIXTURE, pointer_basis)

    @classmethod
    def computational(cls, mode, dim: int):
        """Pure, or mixture over the standard basis of a ``dim``-dimensional space."""
        mode = Mode(mode)
        if mode is Mode.PURE:
            return cls.pure()
        return cls.mixture(np.eye(dim, dtype=np.complex128))

    def __repr__(self):
        if self.mode is Mode.PURE:
            return "UpdateSemantics(pure)"
        return f"UpdateSemantics(mixture, dim={self.pointer_basis.shape[0]})"


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite operator."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"density must be square, got shape {m.shape}")
        if max_abs(m - m.conj().T) > EXACT_TOL:
            raise ValueError("density matrix not Hermitian")
        tr = np.trace(m).real
        if abs(tr - 1.0) > ACCUM_TOL:
            raise ValueError(f"density matrix has trace {tr:.15g}")
        if np.linalg.eigvalsh(m).min() < -ACCUM_TOL:
            raise ValueError("density matrix not positive semidefinite")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_state(cls, psi):
        psi = as_state(psi)
        return cls(np.outer(psi, psi.conj()))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim})"


@dataclass(frozen=True)
class MeasurementDiagnostics:
    completeness: float
    orthogonality: float
    idempotence: tuple[float, ...]
    labels_unique: bool

    def ok(self, tol=ACCUM_TOL) -> bool:
        return (
            self.labels_unique
            and self.completeness <= tol
            and self.orthogonality <= tol
            and all(d <= tol for d in self.idempotence)
        )


def validate_measurement(m) -> MeasurementDiagnostics:
    """Report how far a family of projectors is from a projective measurement.

    Accepts a :class:`ProjectiveMeasurement` or a plain sequence of projectors
    (``Projector`` objects or matrices); never raises on bad families.
    """
    if isinstance(m, ProjectiveMeasurement):
        mats, labels = [p.matrix for p in m.projectors], list(m.labels)
    else:
        mats = [p.matrix if isinstance(p, Projector) else np.asarray(p, dtype=np.complex128) for p in m]
        labels = list(range(len(mats)))
    dim = mats[0].shape[0] if mats else 0
    total = sum(mats, np.zeros((dim, dim), dtype=np.complex128))
    completeness = max_abs(total - np.eye(dim))
    orthogonality = max((max_abs(a @ b) for a, b in combinations(mats, 2)), default=0.0)
    idempotence = tuple(max_abs(a @ a - a) for a in mats)
    return MeasurementDiagnostics(completeness, orthogonality, idempotence, len(set(labels)) == len(labels))


class ProjectiveMeasurement:
    """Complete family of pairwise-orthogonal projectors with string labels."""

    def __init__(self, projectors, labels):
        self.projectors = tuple(projectors)
        self.labels = tuple(str(label) for label in labels)
        if not self.projectors:
            raise MeasurementError("a measurement needs at least one projector")
        if len(self.labels) != len(self.projectors):
            raise MeasurementError("one label per projector required")
        if not all(isinstance(p, Projector) for p in self.projectors):
            raise MeasurementError("projectors must be Projector instances")
        dims = {p.dim for p in self.projectors}
        if len(dims) != 1:
            raise DimensionError(f"projectors of mixed dimension {sorted(dims)}")
        diag = validate_measurement(self)
        if not diag.labels_unique:
            raise MeasurementError(f"duplicate labels in {self.labels}")
        if not diag.ok():
            raise MeasurementError(
                f"not a projective measurement: completeness defect {diag.completeness:.3g}, "
                f"orthogonality defect {diag.orthogonality:.3g}"
            )
        self._index = {label: k for k, label in enumerate(self.labels)}

    @property
    def dim(self) -> int:
        return self.projectors[0].dim

    def __len__(self):
        return len(self.projectors)

    def index(self, label) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise LabelError(f"unknown outcome label {label!r}; known: {list(self.labels)}") from None

    def __getitem__(self, label) -> Projector:
        return self.projectors[self.index(label)]

    def __repr__(self):
        ranks = ", ".join(f"{lab}:{p.rank}" for lab, p in zip(self.labels, self.projectors))
        return f"ProjectiveMeasurement(dim={self.dim}, [{ranks}])"


@dataclass(frozen=True)
class OutcomeDistribution:
    labels: tuple[str, ...]
    probs: tuple[float, ...]

    def __getitem__(self, label) -> float:
        try:
            return self.probs[self.labels.index(label)]
        except ValueError:
            raise LabelError(f"unknown outcome label {label!r}") from None

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.labels, self.probs))


def _state_or_density(state, dim):
    if isinstance(state, DensityMatrix):
        if state.dim != dim:
            raise DimensionError(f"dimension mismatch: {state.dim} vs {dim}")
        return state
    psi = as_state(state)
    if psi.shape[0] != dim:
        raise DimensionError(f"dimension mismatch: {psi.shape[0]} vs {dim}")
    return psi


def born_term(state, p: Projector) -> float:
    """Born probability of one projector, clamped to [0, 1].

    For a pure state this is ``||P psi||^2``; the Lüders update reuses the
    same computation so the two agree exactly.
    """
    state = _state_or_density(state, p.dim)
    if isinstance(state, DensityMatrix):
        return clamp_probability(np.sum(state.matrix * p.matrix.T).real)
    return clamp_probability(_squared_norm(p.matrix @ state))


def _squared_norm(v) -> float:
    return float(np.vdot(v, v).real)


def born_distribution(state, m: ProjectiveMeasurement) -> OutcomeDistribution:
    """Born distribution of ``m`` on a pure state or :class:`DensityMatrix`."""
    if not isinstance(m, ProjectiveMeasurement):
        raise MeasurementError("expected a ProjectiveMeasurement")
    probs = tuple(born_term(state, p) for p in m.projectors)
    if abs(sum(probs) - 1.0) > ACCUM_TOL:
        raise ProbabilityError(f"Born probabilities sum to {sum(probs):.15g}")
    return OutcomeDistribution(m.labels, probs)


def lueders_update(state, p: Projector):
    """Project ``state`` with ``p`` and renormalize.

    Returns
    -------
    (ndarray, float)
        The post-measurement state (phase convention applied) and the
        outcome probability ``||P psi||^2``.
    """
    psi = as_state(state)
    if psi.shape[0] != p.dim:
        raise DimensionError(f"dimension mismatch: {psi.shape[0]} vs {p.dim}")
    prob = born_term(psi, p)
    if prob < ZERO_PROB:
        raise ZeroProbabilityOutcome(f"outcome has probability {prob:.3g}")
    out = fix_phase((p.matrix @ psi) / np.sqrt(prob))
    out.setflags(write=False)
    return out, prob


def _aligned_subset(p: Projector, basis) -> np.ndarray:
    """Column indices of ``basis`` spanning range(p); raise if there are none such."""
    weights = np.einsum("ij,ik,kj->j", basis.conj(), p.matrix, basis).real
    subset = np.flatnonzero(weights > 0.5)
    b = basis[:, subset]
    defect = max_abs(b @ b.conj().T - p.matrix)
    if defect > ACCUM_TOL:
        raise PointerBasisError(
            f"projector range is not spanned by pointer basis vectors (defect {defect:.3g})"
        )
    return subset


def branch_weights(state, p: Projector, pointer_basis):
    """Unnormalized mixture weights ``|<b|psi>|^2`` for the pointer states in range(p).

    Returns
    -------
    (ndarray of int, ndarray of float)
        0-based column indices into ``pointer_basis`` and their weights.
    """
    psi = as_state(state)
    basis = np.asarray(pointer_basis, dtype=np.complex128)
    if psi.shape[0] != p.dim or basis.shape[0] != p.dim:
        raise DimensionError("state, projector and pointer basis dimensions differ")
    subset = _aligned_subset(p, basis)
    amps = basis[:, subset].conj().T @ psi
    return subset, np.abs(amps) ** 2


def mixture_update(state, p: Projector, pointer_basis):
    """Classical-ignorance update: diagonal mixture of pointer states in range(p).

    Returns the unit-trace :class:`DensityMatrix` and the outcome probability
    ``||P psi||^2``. Use :func:`branch_weights` for the unnormalized weights.
    """
    if isinstance(pointer_basis, UpdateSemantics):
        pointer_basis = pointer_basis.pointer_basis
    subset, weights = branch_weights(state, p, pointer_basis)
    prob = born_term(state, p)
    if prob < ZERO_PROB:
        raise ZeroProbabilityOutcome(f"outcome has probability {prob:.3g}")
    basis = np.asarray(pointer_basis, dtype=np.complex128)[:, subset]
    rho = (basis * (weights / weights.sum())) @ basis.conj().T
    return DensityMatrix(0.5 * (rho + rho.conj().T)), prob


def dephase(state, m: ProjectiveMeasurement):
    """Non-selective measurement: ``sum_k P_k rho P_k`` as a plain matrix."""
    rho = _state_or_density(state, m.dim)
    rho = rho.matrix if isinstance(rho, DensityMatrix) else np.outer(rho, rho.conj())
    return sum(p.matrix @ rho @ p.matrix for p in m.projectors)


@dataclass(frozen=True)
class Refinement:
    """Outcome of :func:`is_refinement`; truthy when the refinement holds.

    ``partition`` maps each coarse label to the fine labels summing to it.
    """

    holds: bool
    partition: dict[str, tuple[str, ...]] | None = field(default=None)

    def __bool__(self):
        return self.holds


def is_refinement(coarse: ProjectiveMeasurement, fine: ProjectiveMeasurement) -> Refinement:
    """Whether every coarse projector is a sum of fine projectors.

    Each fine projector is assigned to the coarse projector it overlaps most
    (``tr(PQ)``); zero-rank fine projectors go to the first coarse outcome.
    """
    if coarse.dim != fine.dim:
        raise DimensionError(f"dimension mismatch: {coarse.dim} vs {fine.dim}")
    groups = {label: [] for label in coarse.labels}
    for q_label, q in zip(fine.labels, fine.projectors):
        overlaps = [np.sum(p.matrix * q.matrix.T).real for p in coarse.projectors]
        groups[coarse.labels[int(np.argmax(overlaps))]].append(q_label)
    for label, p in zip(coarse.labels, coarse.projectors):
        total = sum((fine[q].matrix for q in groups[label]), np.zeros_like(p.matrix))
        if max_abs(total - p.matrix) > ACCUM_TOL:
            return Refinement(False)
    return Refinement(True, {label: tuple(v) for label, v in groups.items()})


def max_cross_commutator(m1: ProjectiveMeasurement, m2: ProjectiveMeasurement) -> float:
    """Largest ``||[P, Q]||_F`` over ``P`` in ``m1`` and ``Q`` in ``m2``."""
    if m1.dim != m2.dim:
        raise DimensionError(f"dimension mismatch: {m1.dim} vs {m2.dim}")
    return max(commutator_norm(p, q) for p in m1.projectors for q in m2.projectors)


def are_compatible(m1: ProjectiveMeasurement, m2: ProjectiveMeasurement) -> bool:
    return max_cross_commutator(m1, m2) <= ACCUM_TOL
