"""Data model for row-stochastic NMF: ``M = A W``.

Holds the matrix containers, row normalization, the robustness measure
``sigma_r(W)``, support bookkeeping for the weight matrix ``A`` and the
volume-reducing move used to show why separable-by-subsets structure is
needed for minimum-volume factorizations.
"""

from __future__ import annotations

import itertools
import logging
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

log = logging.getLogger(__name__)

ZERO_TOL = 1e-9


class NotShrinkableError(ValueError):
    """The requested column pair cannot be used for a volume-reducing step."""


@dataclass(frozen=True)
class DataMatrix:
    """Non-negative data matrix, optionally with the row sums it was scaled by."""

    entries: np.ndarray = field(repr=False)
    row_scales: np.ndarray | None = field(default=None, repr=False)
    normalized: bool = False

    def __post_init__(self):
        E = np.array(self.entries, dtype=np.float64)
        if E.ndim != 2:
            raise ValueError("data matrix must be 2-d")
        if np.any(E < 0):
            raise ValueError("data matrix has negative entries")
        if self.normalized and not np.allclose(E.sum(axis=1), 1.0, atol=1e-10, rtol=0):
            raise ValueError("rows of a normalized data matrix must sum to 1")
        E.setflags(write=False)
        object.__setattr__(self, "entries", E)

    @property
    def shape(self):
        return self.entries.shape

    def denormalized(self) -> np.ndarray:
        if self.row_scales is None:
            return self.entries.copy()
        return self.entries * self.row_scales[:, None]


@dataclass
class Factorization:
    """Row-stochastic factors plus where each row of ``W`` came from."""

    A: np.ndarray
    W: np.ndarray
    vertex_provenance: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.A = _clean_stochastic(self.A)
        self.W = _clean_stochastic(self.W)
        if not self.vertex_provenance:
            self.vertex_provenance = ["unknown"] * self.W.shape[0]
        if len(self.vertex_provenance) != self.W.shape[0]:
            raise ValueError("one provenance tag per row of W is required")

    @property
    def r(self) -> int:
        return self.W.shape[0]


def _clean_stochastic(X: np.ndarray) -> np.ndarray:
    X = np.array(X, dtype=np.float64)
    X[X < 0] = 0.0
    s = X.sum(axis=1, keepdims=True)
    s[s == 0] = 1.0
    return X / s


@dataclass(frozen=True)
class FacetSupport:
    support: tuple[int, ...]
    row_indices: tuple[int, ...]

    @property
    def count(self) -> int:
        return len(self.row_indices)


def row_normalize(M) -> DataMatrix:
    """Scale every row to sum 1, remembering the original sums.

    Raises
    ------
    ValueError
        If some row sums to zero; the message names the first such row.
    """
    M = np.asarray(M, dtype=np.float64)
    if np.any(M < 0):
        raise ValueError("matrix has negative entries")
    sums = M.sum(axis=1)
    bad = np.flatnonzero(sums <= 0)
    if bad.size:
        raise ValueError(f"zero row {int(bad[0])}")
    return DataMatrix(M / sums[:, None], row_scales=sums, normalized=True)


def alpha_robustness(W) -> float:
    """``sigma_r(W)`` for an ``r x m`` matrix with ``r <= m``."""
    W = np.asarray(W, dtype=np.float64)
    r, m = W.shape
    if r > m:
        raise ValueError(f"r={r} exceeds m={m}")
    if np.any(np.linalg.norm(W, axis=1) > 1 + 1e-8):
        warnings.warn("rows of W have norm above 1; is W row-stochastic?", stacklevel=2)
    return float(np.linalg.svd(W, compute_uv=False)[r - 1])


def _row_supports(A: np.ndarray, zero_tol: float):
    nz = np.asarray(A) > zero_tol
    groups: dict[tuple[int, ...], list[int]] = {}
    for i, row in enumerate(nz):
        groups.setdefault(tuple(np.flatnonzero(row).tolist()), []).append(i)
    return groups


def facet_support(A, zero_tol: float = ZERO_TOL) -> list[FacetSupport]:
    """Distinct row supports of ``A``, sorted by size and then lexicographically."""
    if zero_tol < 0:
        raise ValueError("zero_tol must be non-negative")
    groups = _row_supports(np.asarray(A, dtype=np.float64), zero_tol)
    out = [FacetSupport(s, tuple(rows)) for s, rows in groups.items() if s]
    out.sort(key=lambda f: (len(f.support), f.support))
    return out


def is_subset_separable(A, zero_tol: float = ZERO_TOL):
    """Check the pairwise zero pattern that characterizes separability by subsets.

    Returns
    -------
    ok : bool
        True iff for every ordered pair ``(j1, j2)`` some row has ``A[i, j1]``
        at most ``zero_tol`` and ``A[i, j2]`` above it.
    witness : list of FacetSupport
        The distinct supports, followed by, for each column ``j`` that can be
        isolated, the supports whose common intersection is exactly ``{j}``.
    """
    A = np.asarray(A, dtype=np.float64)
    r = A.shape[1]
    supports = facet_support(A, zero_tol)
    nz = A > zero_tol
    ok = True
    for j1, j2 in itertools.permutations(range(r), 2):
        if not np.any(~nz[:, j1] & nz[:, j2]):
            ok = False
            break
    witness = list(supports)
    for j in range(r):
        # the intersection of every support containing j is the smallest set
        # any subfamily can reach; it is {j} exactly when j can be isolated
        fam = [f for f in supports if j in f.support]
        if not fam:
            continue
        common = set(range(r))
        for f in fam:
            common &= set(f.support)
        if common == {j}:
            witness.append(FacetSupport((j,), tuple(i for f in fam for i in f.row_indices)))
    return ok, witness


def volume_proxy(W) -> float:
    """``sqrt(det(D D^T))`` with ``D`` the differences ``W^i - W^r`` (i < r)."""
    W = np.asarray(W, dtype=np.float64)
    D = W[:-1] - W[-1]
    if D.shape[0] == 0:
        return 0.0
    return float(np.sqrt(max(np.linalg.det(D @ D.T), 0.0)))


def max_shrink_epsilon(A, i: int, j: int) -> float:
    """Largest ``eps`` in ``[0, 1)`` keeping column ``j`` non-negative after the move."""
    A = np.asarray(A, dtype=np.float64)
    ai, aj = A[:, i], A[:, j]
    mask = ai > 0
    if not mask.any():
        return 0.0
    # need aj - eps/(1-eps) ai >= 0  <=>  eps <= t/(1+t),  t = min aj/ai
    t = float(np.min(aj[mask] / ai[mask]))
    return t / (1.0 + t)


def volume_shrink_step(A, W, i: int, j: int, epsilon: float | None = None):
    """Move vertex ``i`` toward vertex ``j`` while keeping ``A W`` fixed.

    ``A'_i = A_i / (1-eps)``, ``A'_j = A_j - eps/(1-eps) A_i`` and
    ``W'^i = (1-eps) W^i + eps W^j``.  The volume proxy shrinks by ``1 - eps``.

    Parameters
    ----------
    A, W : arrays of shape (n, r) and (r, m)
    i, j : distinct column indices (0-based)
    epsilon : float, optional
        Step to use; by default half the largest feasible value.

    Returns
    -------
    (A', W', eps)
    """
    A = np.asarray(A, dtype=np.float64)
    W = np.asarray(W, dtype=np.float64)
    if i == j:
        raise NotShrinkableError("i and j must differ")
    si = A[:, i] > ZERO_TOL
    sj = A[:, j] > ZERO_TOL
    if not np.array_equal(si, sj):
        raise NotShrinkableError(f"not shrinkable on ({i},{j})")
    eps_max = max_shrink_epsilon(A, i, j)
    eps = 0.5 * eps_max if epsilon is None else float(epsilon)
    if eps < 0 or eps >= 1 or eps > eps_max + 1e-15:
        raise NotShrinkableError(f"epsilon {eps} outside the feasible range [0, {eps_max}]")
    A2 = A.copy()
    W2 = W.copy()
    if eps == 0:
        return A2, W2, 0.0
    A2[:, i] = A[:, i] / (1 - eps)
    A2[:, j] = A[:, j] - eps / (1 - eps) * A[:, i]
    A2[:, j][np.abs(A2[:, j]) < 1e-15] = 0.0
    W2[i] = (1 - eps) * W[i] + eps * W[j]
    return A2, W2, eps


def find_shrinkable_pair(A) -> tuple[int, int] | None:
    """First ordered pair with identical column supports and a positive step."""
    A = np.asarray(A, dtype=np.float64)
    r = A.shape[1]
    for i, j in itertools.permutations(range(r), 2):
        if np.array_equal(A[:, i] > ZERO_TOL, A[:, j] > ZERO_TOL) and max_shrink_epsilon(A, i, j) > 0:
            return i, j
    return None
