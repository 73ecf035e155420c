"""Facet discovery: grow one facet from a centre, then try every row as centre.

For a single centre the loop alternates between the weight program (see
:mod:`faceintersect.solver`) and an eigen-decomposition of the weighted
second-moment matrix ``F = sum_i w_i v_i v_i^T``.  The retained eigenvectors
become the floor directions of the next round, so the estimate can only grow.

The all-centres search keeps outputs of dimension below ``r`` that have enough
points close to them, removes any that contain a smaller kept candidate, and
merges the rest with union-find.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import AlgoConfig, Resolved, resolve
from .kernels import residual_norms
from .solver import SolverError, WeightProgram, solve_weight_program
from .subspace import PsdAccumulator, Subspace, distance, top_singular_space

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FacetCandidate:
    subspace: Subspace
    center_index: int
    near_indices: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.subspace.dim

    @property
    def near_count(self) -> int:
        return int(self.near_indices.shape[0])


@dataclass(frozen=True)
class FacetTrace:
    """Per-iteration record of :func:`find_one_facet` (for tests and diagnostics)."""

    dims: tuple[int, ...]
    eigenvalues: tuple[np.ndarray, ...] = field(repr=False)
    weights: np.ndarray | None = field(default=None, repr=False)


def thread_count(requested: int | None = None) -> int:
    """Worker count: explicit request, else ``FI_THREADS``, else the CPU count."""
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get("FI_THREADS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            log.warning("ignoring non-integer FI_THREADS=%r", env)
    return os.cpu_count() or 1


def _points(points) -> np.ndarray:
    return np.asarray(getattr(points, "entries", points), dtype=np.float64)


def find_one_facet(points, center: int, cfg: AlgoConfig | Resolved, *, trace: bool = False):
    """Estimate the facet through row ``center``.

    Parameters
    ----------
    points : (n, m) array or DataMatrix
    center : int
        Row used as the centre; the remaining rows form the pool.
    cfg : AlgoConfig or Resolved
        Supplies ``eps`` (ball radius is ``2 eps``), ``gamma`` and the
        iteration cap.  An unresolved config is resolved against ``points``.

    Returns
    -------
    Subspace, or None when the program is infeasible on the first round.
    With ``trace=True`` a ``(subspace, FacetTrace)`` pair is returned.
    """
    X = _points(points)
    res = cfg if isinstance(cfg, Resolved) else resolve(cfg, X)
    n, m = X.shape
    if not 0 <= center < n:
        raise IndexError(f"center {center} out of range for {n} points")
    v0 = X[center]
    pool = np.delete(X, center, axis=0)
    Q = np.zeros((m, 0))
    dims: list[int] = []
    evs: list[np.ndarray] = []
    w_last = None
    for it in range(res.cfg.max_outer_iters):
        prog = WeightProgram(pool, v0, 2.0 * res.eps, Q, res.gamma / 2.0)
        sol = solve_weight_program(prog, res.cfg.solver_tol)
        if not sol.feasible:
            if it == 0:
                return (None, FacetTrace((), ())) if trace else None
            break
        w_last = sol.weights
        F = PsdAccumulator.from_points(pool, sol.weights)
        d_cur = Q.shape[1] + 1
        Qn = top_singular_space(F, res.gamma / (2.0 * d_cur)).basis
        evs.append(np.linalg.eigvalsh(F.matrix)[::-1])
        dims.append(Qn.shape[1])
        if Qn.shape[1] <= Q.shape[1]:
            if Qn.shape[1] == Q.shape[1]:
                Q = Qn
            break
        Q = Qn
    out = Subspace(Q)
    if trace:
        full = np.zeros(n)
        if w_last is not None:
            full[np.arange(n) != center] = w_last
        return out, FacetTrace(tuple(dims), tuple(evs), full)
    return out


def count_near_points(points, q: Subspace, radius: float):
    """Rows within ``radius`` of ``q``; returns ``(count, indices)``."""
    if radius < 0:
        raise ValueError("radius must be non-negative")
    X = _points(points)
    idx = np.flatnonzero(residual_norms(X, q.basis) <= radius)
    return int(idx.size), idx


def refit_subspace(X: np.ndarray, q: Subspace, radius: float, iters: int):
    """Re-estimate ``q`` from the points near it, keeping its dimension.

    Each round takes the rows within ``radius``, replaces the basis by their
    top right singular vectors and stops once the subspace stops moving.
    """
    d = q.dim
    Q = q.basis
    for _ in range(iters):
        idx = np.flatnonzero(residual_norms(X, Q) <= radius)
        if idx.size < d:
            break
        _, _, vt = np.linalg.svd(X[idx], full_matrices=False)
        Qn = vt[:d].T
        moved = distance(Subspace(Q), Subspace(Qn))
        Q = Qn
        if moved < 1e-12:
            break
    return Subspace(Q)


def _try_center(X, ci, res: Resolved):
    """Run one centre; returns (candidate or None, reason)."""
    r = res.r
    try:
        q = find_one_facet(X, ci, res)
    except SolverError as exc:
        return None, f"solver:{exc}"
    if q is None:
        return None, "infeasible"
    if q.dim >= r:
        return None, f"dim {q.dim} >= r"
    if q.dim < 2:
        return None, f"dim {q.dim} < 2"
    rad = res.near_radius(q.dim)
    if res.cfg.refit_iters:
        q = refit_subspace(X, q, rad, res.cfg.refit_iters)
    cnt, idx = count_near_points(X, q, rad)
    if cnt < res.n_min:
        return None, f"near {cnt} < {res.n_min}"
    return FacetCandidate(q, ci, idx), "kept"


def _find(parent, a):
    while parent[a] != a:
        parent[a] = parent[parent[a]]
        a = parent[a]
    return a


def prune_and_merge(cands: list[FacetCandidate], radius: float) -> list[FacetCandidate]:
    """Drop candidates containing a lower-dimensional one, then merge close ones.

    The merge is union-find over equal-dimension pairs within ``radius``; each
    group is represented by the member with the most near points (ties go to
    the lowest centre index).  The result is ordered by dimension, then by
    decreasing near count, then by centre index.
    """
    cands = sorted(cands, key=lambda c: c.center_index)
    kept = [
        c
        for c in cands
        if not any(o.dim < c.dim and distance(c.subspace, o.subspace) <= radius for o in cands)
    ]
    parent = list(range(len(kept)))
    for a in range(len(kept)):
        for b in range(a + 1, len(kept)):
            if kept[a].dim == kept[b].dim and distance(kept[a].subspace, kept[b].subspace) <= radius:
                ra, rb = _find(parent, a), _find(parent, b)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
    groups: dict[int, list[int]] = {}
    for a in range(len(kept)):
        groups.setdefault(_find(parent, a), []).append(a)
    reps = [kept[min(g, key=lambda a: (-kept[a].near_count, kept[a].center_index))] for g in groups.values()]
    reps.sort(key=lambda c: (c.dim, -c.near_count, c.center_index))
    return reps


def find_all_facets(points, cfg: AlgoConfig | Resolved, threads: int | None = None) -> list[FacetCandidate]:
    """Try every row as a centre and return the surviving facet candidates."""
    X = _points(points)
    res = cfg if isinstance(cfg, Resolved) else resolve(cfg, X)
    n = X.shape[0]
    workers = thread_count(threads if threads is not None else res.cfg.threads)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            outcomes = list(pool.map(lambda ci: _try_center(X, ci, res), range(n)))
    else:
        outcomes = [_try_center(X, ci, res) for ci in range(n)]
    cands = []
    for ci, (cand, reason) in enumerate(outcomes):
        log.debug("center", extra={"center": ci, "outcome": reason})
        if cand is not None:
            cands.append(cand)
    return prune_and_merge(cands, res.merge_radius)
