"""Vertices as intersections of facets.

:func:`intersect_sets` is the combinatorial version on index sets and serves as
a reference; :func:`intersect_subspaces` runs the same loop on noisy facet
subspaces, replacing "is contained in the covered set" by a projection test
against the span ``Gamma`` of everything recovered so far.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .subspace import Subspace, complement, left_singular_space, small_singular_space

log = logging.getLogger(__name__)

THRESHOLD_FLOOR = 1e-9


def intersect_sets(sets: Sequence[Sequence[int]], r: int) -> set[int]:
    """Indices that are the intersection of some subfamily of ``sets``.

    Each of ``r`` rounds starts from the full index set and intersects in every
    input that shrinks it without landing inside the already covered set ``R``.
    The round's result joins ``R`` and, if it is a singleton, the output.
    """
    fam = [frozenset(s) for s in sets]
    P: set[int] = set()
    R: set[int] = set()
    for _ in range(r):
        S = set(range(r))
        for Sj in fam:
            T = S & Sj
            if len(T) < len(S) and not T <= R:
                S = T
        R |= S
        if len(S) == 1:
            P |= S
    return P


@dataclass
class IntersectionState:
    """Book-keeping of the subspace loop; kept for diagnostics."""

    found_vertices: list[np.ndarray] = field(default_factory=list)
    Y: np.ndarray | None = None
    Gamma: Subspace | None = None
    gamma_dims: list[int] = field(default_factory=list)
    z_dims: list[int] = field(default_factory=list)
    folded: list[list[int]] = field(default_factory=list)
    eps_v: float = 0.0
    eps_Y: float = 0.0


def _vertex_from_direction(z: np.ndarray, sum_functional: np.ndarray) -> np.ndarray:
    s = float(z @ sum_functional)
    if abs(s) < 1e-300:
        s = 1e-300
    return z / s


def intersect_subspaces(
    facets: Sequence[Subspace],
    cfg,
    eps_S: float,
    *,
    sum_functional: np.ndarray | None = None,
    state: IntersectionState | None = None,
) -> list[np.ndarray]:
    """Recover the vertices that are intersections of the given facets.

    Parameters
    ----------
    facets : sequence of Subspace
        Facet estimates, folded in the given order.
    cfg : AlgoConfig or Resolved
        Supplies ``r`` (the number of rounds) and ``alpha``; ``alpha / 2``
        separates new directions from covered ones.
    eps_S : float
        Accuracy of the facets; singular values up to ``r * eps_S`` count as zero.
    sum_functional : array, optional
        Linear functional giving a vector's coordinate sum after lifting back to
        the original space; the all-ones vector when omitted.
    state : IntersectionState, optional
        Filled in with the loop's book-keeping when given.

    Returns
    -------
    list of vertex vectors scaled so that their coordinate sum is 1.
    """
    alpha, r = cfg.alpha, cfg.r
    if alpha is None:
        raise ValueError("intersect_subspaces needs a concrete alpha")
    facets = list(facets)
    st = state if state is not None else IntersectionState()
    if not facets:
        return []
    m = facets[0].ambient_dim
    ones = np.ones(m) if sum_functional is None else np.asarray(sum_functional, dtype=np.float64)
    thr = max(r * eps_S, THRESHOLD_FLOOR)
    st.eps_v = 4 * r**1.5 * eps_S / alpha
    st.eps_Y = 2 * r * st.eps_v / alpha
    comps = [complement(f).basis for f in facets]
    Y = np.zeros((m, 0))
    Gamma = Subspace.zero(m)
    for _ in range(r):
        Sigma = np.zeros((m, 0))
        Z = np.eye(m)
        used: list[int] = []
        for j, C in enumerate(comps):
            S2 = np.hstack([Sigma, C])
            Z2 = small_singular_space(S2, thr).basis
            if Z2.shape[1] >= Z.shape[1]:
                continue
            if Z2.shape[1] == 0:
                outside = 0.0
            else:
                R = Z2 - Gamma.basis @ (Gamma.basis.T @ Z2)
                outside = float(np.linalg.norm(R, 2))
            if outside > alpha / 2:
                Sigma, Z = S2, Z2
                used.append(j)
        Y = np.hstack([Y, Z])
        Gamma = left_singular_space(Y, alpha / 2)
        st.z_dims.append(Z.shape[1])
        st.gamma_dims.append(Gamma.dim)
        st.folded.append(used)
        if Z.shape[1] == 1:
            st.found_vertices.append(_vertex_from_direction(Z[:, 0], ones))
    st.Y = Y
    st.Gamma = Gamma
    log.debug("intersection", extra={"z_dims": st.z_dims, "eps_v": st.eps_v, "eps_Y": st.eps_Y})
    return list(st.found_vertices)
