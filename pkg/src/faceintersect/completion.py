"""Remaining vertices, weight recovery and the end-to-end pipeline."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .config import AlgoConfig, resolve
from .discovery import FacetCandidate, find_all_facets
from .intersection import IntersectionState, intersect_subspaces
from .kernels import residual_norms, simplex_lstsq_rows
from .model import DataMatrix, Factorization

log = logging.getLogger(__name__)


class PipelineError(RuntimeError):
    """The pipeline could not produce ``r`` vertices; carries stage diagnostics."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


@dataclass(frozen=True)
class Reduction:
    """Orthonormal map onto the top-r right singular subspace and back."""

    basis: np.ndarray = field(repr=False)  # (r, m), orthonormal rows

    def reduce(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(X) @ self.basis.T

    def lift(self, Y: np.ndarray) -> np.ndarray:
        return np.asarray(Y) @ self.basis

    @property
    def sum_functional(self) -> np.ndarray:
        """Coordinate sum after lifting, as a functional on reduced vectors."""
        return self.basis.sum(axis=1)


def reduce_dimension(M, r: int):
    """Coordinates of the rows in the top-r right singular subspace.

    Returns ``(X, reduction)`` with ``X`` of shape ``(n, r)``; ``reduction.lift``
    maps reduced vectors back to ``R^m``.  For ``m == r`` the map is the identity.
    """
    M = np.asarray(getattr(M, "entries", M), dtype=np.float64)
    n, m = M.shape
    if r > m:
        raise ValueError(f"r={r} exceeds m={m}")
    if r == m:
        B = np.eye(m)
    else:
        _, _, vt = np.linalg.svd(M, full_matrices=False)
        B = vt[:r]
    red = Reduction(B)
    return red.reduce(M), red


def find_remaining_vertices(M, found, r: int) -> list[np.ndarray]:
    """Greedily add the row farthest from the span of the vertices so far."""
    X = np.asarray(getattr(M, "entries", M), dtype=np.float64)
    found = [np.asarray(v, dtype=np.float64) for v in found]
    if len(found) > r:
        raise ValueError("more vertices than r")
    V = list(found)
    out: list[np.ndarray] = []
    for _ in range(r - len(found)):
        if V:
            U, s, _ = np.linalg.svd(np.array(V).T, full_matrices=False)
            Q = U[:, s > 1e-12 * s[0]] if s[0] > 0 else U[:, :0]
        else:
            Q = np.zeros((X.shape[1], 0))
        j = int(np.argmax(residual_norms(X, Q)))
        out.append(X[j].copy())
        V.append(X[j])
    return out


def recover_weights(M, W) -> np.ndarray:
    """Row-wise least squares over the simplex: ``argmin_a ||M_i - a W||``."""
    X = np.asarray(getattr(M, "entries", M), dtype=np.float64)
    W = np.asarray(W, dtype=np.float64)
    if W.shape[0] > W.shape[1] or np.linalg.svd(W, compute_uv=False)[-1] <= 1e-10:
        raise ValueError("W is rank deficient; weights are not identifiable")
    return simplex_lstsq_rows(X, W)


@dataclass
class PipelineReport:
    factorization: Factorization
    facet_count: int
    intersection_vertex_count: int
    anchor_vertex_count: int
    residual: float
    timings: dict[str, float] = field(default_factory=dict)
    params: dict[str, float] = field(default_factory=dict)
    facets: list[FacetCandidate] = field(default_factory=list, repr=False)
    state: IntersectionState | None = field(default=None, repr=False)

    def to_text(self) -> str:
        """Flat ``key = value`` block (timings in milliseconds)."""
        lines = [
            f"facet_count = {self.facet_count}",
            f"intersection_vertex_count = {self.intersection_vertex_count}",
            f"anchor_vertex_count = {self.anchor_vertex_count}",
            f"residual = {self.residual!r}",
        ]
        lines += [f"{k} = {v!r}" for k, v in self.params.items()]
        lines += [f"time_{k}_ms = {v:.3f}" for k, v in self.timings.items()]
        lines.append("vertex_provenance = " + ",".join(self.factorization.vertex_provenance))
        return "\n".join(lines) + "\n"


def face_intersect(M, r: int | None = None, cfg: AlgoConfig | None = None, threads: int | None = None) -> PipelineReport:
    """Factorize a row-normalized matrix ``M ~ A W`` with ``r`` vertices.

    Steps: optional dimension reduction, facet discovery, facet intersection,
    greedy completion with anchor rows, lifting and weight recovery.
    """
    Mraw = np.asarray(getattr(M, "entries", M), dtype=np.float64)
    if isinstance(M, DataMatrix) and not M.normalized:
        raise ValueError("face_intersect expects a row-normalized DataMatrix")
    cfg = cfg or AlgoConfig(r=r or 5)
    if r is not None and r != cfg.r:
        cfg = cfg.replace(r=r)
    r = cfg.r
    if r < 2:
        raise ValueError("r must be at least 2")
    n, m = Mraw.shape
    if n < r:
        raise PipelineError(f"only {n} rows for r={r}", {"stage": "input"})
    timings: dict[str, float] = {}

    t0 = time.perf_counter()
    if cfg.reduce:
        X, red = reduce_dimension(Mraw, r)
    else:
        X, red = Mraw, Reduction(np.eye(m))
    res = resolve(cfg, Mraw, X)
    timings["reduce"] = 1e3 * (time.perf_counter() - t0)

    t0 = time.perf_counter()
    facets = find_all_facets(X, res, threads=threads)
    timings["discovery"] = 1e3 * (time.perf_counter() - t0)

    t0 = time.perf_counter()
    state = IntersectionState()
    verts = intersect_subspaces(
        [f.subspace for f in facets], res, res.eps_S, sum_functional=red.sum_functional, state=state
    )
    verts = verts[:r]
    timings["intersection"] = 1e3 * (time.perf_counter() - t0)

    t0 = time.perf_counter()
    anchors = find_remaining_vertices(X, verts, r)
    timings["completion"] = 1e3 * (time.perf_counter() - t0)
    diag = {"facets": len(facets), "intersection_vertices": len(verts), "anchors": len(anchors)}
    if len(verts) + len(anchors) < r:
        raise PipelineError("fewer than r vertices recovered", diag)

    t0 = time.perf_counter()
    W_hat = red.lift(np.array(verts + anchors))
    W_hat = np.clip(W_hat, 0.0, None)
    sums = W_hat.sum(axis=1, keepdims=True)
    if np.any(sums <= 0):
        raise PipelineError("a recovered vertex has no positive mass", diag)
    W_hat /= sums
    try:
        A_hat = recover_weights(Mraw, W_hat)
    except ValueError as exc:
        raise PipelineError(str(exc), diag) from exc
    timings["weights"] = 1e3 * (time.perf_counter() - t0)

    prov = ["intersection"] * len(verts) + ["anchor"] * len(anchors)
    fac = Factorization(A_hat, W_hat, prov)
    resid = float(np.linalg.norm(Mraw - fac.A @ fac.W) / max(np.linalg.norm(Mraw), 1e-300))
    return PipelineReport(
        fac, len(facets), len(verts), len(anchors), resid, timings, res.as_dict(), facets, state
    )
