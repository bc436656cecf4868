"""Dense complex linear algebra on small Hilbert spaces.

States are 1-D ``complex128`` arrays of unit norm, operators are square
``complex128`` arrays, and projectors are wrapped in :class:`Projector`, which
keeps the rank next to the matrix. All returned arrays are read-only.

Basis indices are 1-based wherever a user passes one in (``basis_state(3, 1)``
is the first basis ket); internally everything is 0-based.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSpanError, DimensionError, NormalizationError

__all__ = [
    "MAX_DIM",
    "EXACT_TOL",
    "ACCUM_TOL",
    "DROP_TOL",
    "Projector",
    "as_state",
    "normalize",
    "fix_phase",
    "basis_state",
    "inner_product",
    "projector_from_span",
    "rank_one_projector",
    "identity_projector",
    "zero_projector",
    "complement_projector",
    "apply",
    "commutator_norm",
    "trace_product",
    "max_abs",
]

MAX_DIM = 4096
EXACT_TOL = 1e-12  # exact-algebra identities
ACCUM_TOL = 1e-9  # accumulated constructions
DROP_TOL = 1e-10  # Gram-Schmidt residual below which a vector is dependent
PHASE_TOL = 1e-10


def _frozen(a):
    a.setflags(write=False)
    return a


def _check_dim(dim):
    if dim < 1 or dim > MAX_DIM:
        raise DimensionError(f"dimension {dim} outside supported range 1..{MAX_DIM}")


def _vector(v):
    a = np.asarray(v, dtype=np.complex128)
    if a.ndim != 1:
        raise DimensionError(f"expected a 1-D vector, got shape {a.shape}")
    _check_dim(a.shape[0])
    if not np.all(np.isfinite(a)):
        raise ValueError("vector has non-finite entries")
    return a


def _matrix(op):
    if isinstance(op, Projector):
        return op.matrix
    a = np.asarray(op, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    _check_dim(a.shape[0])
    return a


def _same_dim(a, b):
    if a.shape[0] != b.shape[0]:
        raise DimensionError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")


def max_abs(a) -> float:
    """Largest entry modulus; 0.0 for an empty array."""
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def fix_phase(v):
    """Rotate the global phase so the first entry with modulus > 1e-10 is real positive."""
    v = np.array(v, dtype=np.complex128)
    big = np.flatnonzero(np.abs(v) > PHASE_TOL)
    if big.size:
        a = v[big[0]]
        v = v * (abs(a) / a)
        v[big[0]] = abs(a)
    return v


def as_state(v, tol=ACCUM_TOL):
    """Validate ``v`` as a state vector and return it as a read-only array.

    The vector is not renormalized; a norm off by more than ``tol`` raises
    :class:`NormalizationError`.
    """
    a = _vector(v).copy()
    norm = np.linalg.norm(a)
    if abs(norm - 1.0) > tol:
        raise NormalizationError(f"state has norm {norm:.15g}, expected 1")
    return _frozen(a)


def normalize(v):
    """Scale a raw vector to unit norm and apply the phase convention."""
    a = _vector(v)
    norm = np.linalg.norm(a)
    if norm < EXACT_TOL:
        raise DegenerateSpanError("cannot normalize the zero vector")
    return _frozen(fix_phase(a / norm))


def basis_state(dim: int, j: int):
    """The basis ket ``|j>`` of a ``dim``-dimensional space, ``j`` 1-based."""
    _check_dim(dim)
    if not 1 <= j <= dim:
        raise IndexError(f"basis index {j} outside 1..{dim}")
    e = np.zeros(dim, dtype=np.complex128)
    e[j - 1] = 1.0
    return _frozen(e)


def inner_product(a, b) -> complex:
    """``<a|b>``, conjugate-linear in the first argument."""
    a, b = _vector(a), _vector(b)
    _same_dim(a, b)
    # split real arithmetic so that <a|b> == conj(<b|a>) holds bit for bit;
    # numpy's complex multiply does not guarantee that under argument swap
    ar, ai, br, bi = a.real, a.imag, b.real, b.imag
    re = np.sum(ar * br + ai * bi)
    im = np.sum(ar * bi - ai * br)
    return complex(float(re), float(im))


@dataclass(frozen=True, eq=False)
class Projector:
    """Orthogonal projector stored densely, with its rank.

    Construct through :func:`projector_from_span` and friends; the raw
    constructor checks Hermiticity, idempotence and the trace/rank match.
    """

    matrix: np.ndarray
    rank: int

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"projector must be square, got shape {m.shape}")
        _check_dim(m.shape[0])
        herm = max_abs(m - m.conj().T)
        idem = max_abs(m @ m - m)
        if herm > EXACT_TOL:
            raise ValueError(f"projector not Hermitian (defect {herm:.3g})")
        if idem > ACCUM_TOL:
            raise ValueError(f"projector not idempotent (defect {idem:.3g})")
        if abs(np.trace(m).real - self.rank) > ACCUM_TOL:
            raise ValueError(f"trace {np.trace(m).real:.12g} does not match rank {self.rank}")
        object.__setattr__(self, "matrix", _frozen(m))
        object.__setattr__(self, "rank", int(self.rank))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def range_basis(self):
        """Orthonormal basis of the range, as columns (recomputed on each call)."""
        if self.rank == 0:
            return np.zeros((self.dim, 0), dtype=np.complex128)
        w, v = np.linalg.eigh(self.matrix)
        return v[:, np.argsort(w)[::-1][: self.rank]]

    def __repr__(self):
        return f"Projector(dim={self.dim}, rank={self.rank})"


def _orthonormal_basis(vectors):
    """Modified Gram-Schmidt with one re-orthogonalization pass.

    A vector whose residual norm falls below ``DROP_TOL`` is treated as
    linearly dependent and skipped.
    """
    basis = []
    for v in vectors:
        w = v.copy()
        for _ in range(2):
            for q in basis:
                w = w - np.vdot(q, w) * q
        norm = np.linalg.norm(w)
        if norm >= DROP_TOL:
            basis.append(w / norm)
    return basis


def _projector_from_basis(basis, dim):
    if not basis:
        return Projector(np.zeros((dim, dim), dtype=np.complex128), 0)
    q = np.column_stack(basis)
    p = q @ q.conj().T
    p = 0.5 * (p + p.conj().T)
    return Projector(p, len(basis))


def projector_from_span(vectors) -> Projector:
    """Orthogonal projector onto the span of ``vectors``.

    Parameters
    ----------
    vectors : sequence of array_like
        Raw (unnormalized) vectors of a common dimension.

    Returns
    -------
    Projector
        Rank equals the number of independent vectors found.

    Raises
    ------
    DegenerateSpanError
        If the vectors span only the zero subspace.
    """
    vs = [_vector(v) for v in vectors]
    if not vs:
        raise DegenerateSpanError("no vectors given")
    for v in vs[1:]:
        _same_dim(vs[0], v)
    basis = _orthonormal_basis(vs)
    if not basis:
        raise DegenerateSpanError("vectors span the zero subspace")
    return _projector_from_basis(basis, vs[0].shape[0])


def rank_one_projector(v) -> Projector:
    """``|v><v|/<v|v>`` for a nonzero raw vector."""
    return projector_from_span([v])


def identity_projector(dim: int) -> Projector:
    _check_dim(dim)
    return Projector(np.eye(dim, dtype=np.complex128), dim)


def zero_projector(dim: int) -> Projector:
    _check_dim(dim)
    return Projector(np.zeros((dim, dim), dtype=np.complex128), 0)


def complement_projector(p: Projector) -> Projector:
    """``I - P``."""
    return Projector(np.eye(p.dim, dtype=np.complex128) - p.matrix, p.dim - p.rank)


def apply(op, v):
    """Matrix-vector product ``op @ v`` with no normalization."""
    m, v = _matrix(op), _vector(v)
    _same_dim(m, v)
    return _frozen(m @ v)


def commutator_norm(a, b) -> float:
    """Frobenius norm of ``AB - BA``."""
    a, b = _matrix(a), _matrix(b)
    _same_dim(a, b)
    return float(np.linalg.norm(a @ b - b @ a))


def trace_product(a, b) -> complex:
    """``tr(AB)``."""
    a, b = _matrix(a), _matrix(b)
    _same_dim(a, b)
    return complex(np.sum(a * b.T))
