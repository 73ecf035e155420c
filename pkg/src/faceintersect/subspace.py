"""Orthonormal subspaces and the small amount of linear algebra built on them.

Every :class:`Subspace` is produced by an SVD of its spanning vectors, never by
Gram-Schmidt.  Thresholded singular spaces use a strict comparison for the
"large" side and an inclusive one for the "small" side, so a value sitting
exactly on the threshold always lands in the small space.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

DEFAULT_RANK_TOL = 1e-8


class DimensionError(ValueError):
    """Raised when arrays with incompatible ambient dimensions are combined."""


@dataclass(frozen=True)
class Subspace:
    """A linear subspace of ``R^m`` stored as an ``m x d`` orthonormal basis.

    Attributes
    ----------
    basis : ndarray, shape (m, d)
        Columns are orthonormal.  ``d`` may be zero.
    """

    basis: np.ndarray = field(repr=False)

    def __post_init__(self):
        B = np.asarray(self.basis, dtype=np.float64)
        if B.ndim != 2:
            raise DimensionError("basis must be a 2-d array (m x d)")
        B = B.copy()
        B.setflags(write=False)
        object.__setattr__(self, "basis", B)

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim}, ambient_dim={self.ambient_dim})"

    @classmethod
    def zero(cls, m: int) -> "Subspace":
        return cls(np.zeros((m, 0)))

    @classmethod
    def full(cls, m: int) -> "Subspace":
        return cls(np.eye(m))

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.T


@dataclass(frozen=True)
class PsdAccumulator:
    """Symmetric PSD matrix ``F = sum_i w_i v_i v_i^T`` with optional weights."""

    matrix: np.ndarray = field(repr=False)
    weights: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        F = np.asarray(self.matrix, dtype=np.float64)
        if F.ndim != 2 or F.shape[0] != F.shape[1]:
            raise DimensionError("PSD accumulator must be square")
        F = 0.5 * (F + F.T)
        F.setflags(write=False)
        object.__setattr__(self, "matrix", F)

    @classmethod
    def from_points(cls, points: np.ndarray, weights: np.ndarray) -> "PsdAccumulator":
        """Build ``sum_i w_i p_i p_i^T`` from the rows of ``points``."""
        P = np.asarray(points, dtype=np.float64)
        w = np.asarray(weights, dtype=np.float64)
        return cls((P * w[:, None]).T @ P, w)


def _as_columns(vectors, m: int | None = None) -> np.ndarray:
    if isinstance(vectors, np.ndarray) and vectors.ndim == 2:
        return np.asarray(vectors, dtype=np.float64)
    vecs = [np.asarray(v, dtype=np.float64).ravel() for v in vectors]
    if not vecs:
        if m is None:
            raise DimensionError("cannot infer ambient dimension from an empty list")
        return np.zeros((m, 0))
    dims = {v.shape[0] for v in vecs}
    if len(dims) != 1:
        raise DimensionError(f"vectors have mixed dimensions {sorted(dims)}")
    return np.column_stack(vecs)


def orthonormalize(vectors, rank_tol: float = DEFAULT_RANK_TOL, m: int | None = None) -> Subspace:
    """Orthonormal basis for the span of ``vectors``.

    Parameters
    ----------
    vectors : sequence of m-vectors, or an (m, k) array whose columns are the vectors
    rank_tol : float
        Directions whose singular value falls below this are discarded.
    m : int, optional
        Ambient dimension; only needed when ``vectors`` is empty.
    """
    if rank_tol <= 0:
        raise ValueError("rank_tol must be positive")
    V = _as_columns(vectors, m)
    if V.shape[1] == 0:
        return Subspace.zero(V.shape[0])
    U, s, _ = np.linalg.svd(V, full_matrices=False)
    return Subspace(U[:, s >= rank_tol])


def project(s: Subspace, v) -> np.ndarray:
    """Orthogonal projection ``U U^T v`` (``v`` may be a vector or a column stack)."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape[0] != s.ambient_dim:
        raise DimensionError(f"vector of length {v.shape[0]} in ambient dimension {s.ambient_dim}")
    U = s.basis
    return U @ (U.T @ v)


def complement(s: Subspace) -> Subspace:
    """Orthogonal complement, as an arbitrary orthonormal basis."""
    m, d = s.basis.shape
    if d == 0:
        return Subspace.full(m)
    U, _, _ = np.linalg.svd(s.basis, full_matrices=True)
    return Subspace(U[:, d:])


def distance(u: Subspace, v: Subspace) -> float:
    """Spectral norm ``||P_{u-perp} V||`` with ``V`` the basis of ``v``.

    Zero exactly when ``v`` is contained in ``u``; symmetric when the two
    dimensions agree (it is then the sine of the largest principal angle).
    """
    if u.ambient_dim != v.ambient_dim:
        raise DimensionError("subspaces live in different ambient spaces")
    if v.dim == 0:
        return 0.0
    R = v.basis - u.basis @ (u.basis.T @ v.basis)
    return float(min(np.linalg.norm(R, 2), 1.0))


def top_singular_space(f: PsdAccumulator | np.ndarray, threshold: float) -> Subspace:
    """Span of the eigenvectors of ``f`` with eigenvalue strictly above ``threshold``."""
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    F = f.matrix if isinstance(f, PsdAccumulator) else 0.5 * (np.asarray(f) + np.asarray(f).T)
    evals, evecs = np.linalg.eigh(F)
    keep = evals > threshold
    # eigh returns ascending order; report the basis largest-first
    return Subspace(evecs[:, keep][:, ::-1])


def small_singular_space(stacked: np.ndarray, threshold: float) -> Subspace:
    """Near-null space of ``stacked^T``.

    Returns the left singular vectors of ``stacked`` with singular value at most
    ``threshold`` together with the directions that receive no singular value at
    all because the stack has fewer columns than rows.
    """
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    S = np.asarray(stacked, dtype=np.float64)
    m = S.shape[0]
    if S.shape[1] == 0:
        return Subspace.full(m)
    U, s, _ = np.linalg.svd(S, full_matrices=True)
    sv = np.zeros(m)
    sv[: s.shape[0]] = s
    return Subspace(U[:, sv <= threshold])


def left_singular_space(Y: np.ndarray, threshold: float) -> Subspace:
    """Left singular vectors of ``Y`` with singular value strictly above ``threshold``."""
    Y = np.asarray(Y, dtype=np.float64)
    if Y.shape[1] == 0:
        return Subspace.zero(Y.shape[0])
    U, s, _ = np.linalg.svd(Y, full_matrices=False)
    return Subspace(U[:, s > threshold])


def stack_complements(subs: Iterable[Subspace]) -> np.ndarray:
    subs = list(subs)
    m = subs[0].ambient_dim
    cols = [complement(s).basis for s in subs]
    return np.hstack(cols) if cols else np.zeros((m, 0))


def intersect(subs: Sequence[Subspace], threshold: float) -> Subspace:
    """Robust intersection: near-null space of the stacked complement bases."""
    subs = list(subs)
    if not subs:
        raise ValueError("need at least one subspace")
    m = subs[0].ambient_dim
    if any(s.ambient_dim != m for s in subs):
        raise DimensionError("subspaces live in different ambient spaces")
    return small_singular_space(stack_complements(subs), threshold)
