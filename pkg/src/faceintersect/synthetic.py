"""Synthetic instances and empirical checks of the filling conditions.

Two generators live here.  :func:`generate` draws every row uniformly from a
randomly chosen facet (exact simplex-uniform weights).  :func:`generate_experiment`
reproduces the benchmark recipe instead: cyclic three-vertex facets, weights
drawn as i.i.d. ``Unif(0, 1)`` entries and then normalized, which is *not*
uniform on the simplex.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import linprog
from scipy.special import gammaln

from .kernels import lemma1_regions, residual_norms
from .model import DataMatrix, alpha_robustness, is_subset_separable
from .subspace import orthonormalize


@dataclass(frozen=True)
class GenerativeConfig:
    W: np.ndarray = field(repr=False)
    facets: tuple[tuple[int, ...], ...]
    probs: tuple[float, ...]
    n: int
    seed: int = 0

    def __post_init__(self):
        W = np.asarray(self.W, dtype=np.float64)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "facets", tuple(tuple(sorted(set(s))) for s in self.facets))
        object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))
        r = W.shape[0]
        if len(self.probs) != len(self.facets) + 1:
            raise ValueError("need one probability for the interior plus one per facet")
        if any(p < 0 for p in self.probs) or abs(sum(self.probs) - 1.0) > 1e-12:
            raise ValueError("probabilities must be non-negative and sum to 1")
        for s in self.facets:
            if not s or min(s) < 0 or max(s) >= r:
                raise ValueError(f"facet {s} is not a non-empty subset of range({r})")
        if self.n < 0:
            raise ValueError("n must be non-negative")

    @property
    def r(self) -> int:
        return self.W.shape[0]

    def support_pattern(self) -> np.ndarray:
        """One 0/1 row per facet, the pattern whose separability matters."""
        P = np.zeros((len(self.facets), self.r))
        for i, s in enumerate(self.facets):
            P[i, list(s)] = 1.0
        return P

    def family_is_separable(self) -> bool:
        if not self.facets:
            return False
        return is_subset_separable(self.support_pattern(), 0.5)[0]


@dataclass
class GeneratedInstance:
    M: DataMatrix
    M_noisy: DataMatrix
    A: np.ndarray
    W: np.ndarray
    labels: np.ndarray
    noise_level: float
    facets: tuple[tuple[int, ...], ...] = ()
    measured_noise: float = 0.0
    clamp_count: int = 0
    meta: dict = field(default_factory=dict)


@dataclass(frozen=True)
class NoiseResult:
    matrix: np.ndarray
    clamp_count: int
    measured_ratio: float  # mean ||noise|| / mean ||row|| of the raw Gaussian draw
    effective_ratio: float  # same ratio after clamping and re-normalization


def sample_simplex_uniform(d: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Uniform point(s) on the standard ``(d-1)``-simplex via normalized exponentials."""
    if d < 1:
        raise ValueError("d must be at least 1")
    shape = (d,) if size is None else (size, d)
    e = rng.standard_exponential(shape)
    return e / e.sum(axis=-1, keepdims=True)


def gaussian_norm_mean(m: int) -> float:
    """``E||g||`` for a standard Gaussian vector in ``R^m``."""
    return math.sqrt(2.0) * math.exp(gammaln((m + 1) / 2.0) - gammaln(m / 2.0))


def add_noise(M, level: float, rng: np.random.Generator, renormalize: bool = True) -> NoiseResult:
    """Add i.i.d. Gaussian noise sized so that mean row-noise / mean row norm = ``level``.

    Negative entries are clamped to zero (and counted); rows are then scaled
    back to sum 1 unless ``renormalize`` is False.
    """
    if level < 0:
        raise ValueError("noise level must be non-negative")
    X = np.asarray(getattr(M, "entries", M), dtype=np.float64)
    if level == 0:
        return NoiseResult(X.copy(), 0, 0.0, 0.0)
    n, m = X.shape
    row_norm = float(np.linalg.norm(X, axis=1).mean())
    sigma = level * row_norm / gaussian_norm_mean(m)
    E = rng.normal(0.0, sigma, size=X.shape)
    measured = float(np.linalg.norm(E, axis=1).mean() / row_norm)
    Y = X + E
    neg = Y < 0
    clamps = int(neg.sum())
    Y[neg] = 0.0
    if renormalize:
        s = Y.sum(axis=1, keepdims=True)
        zero = s[:, 0] <= 0
        if zero.any():
            # a row wiped out by clamping falls back to its clean version
            Y[zero] = X[zero]
            s[zero] = Y[zero].sum(axis=1, keepdims=True)
        Y = Y / s
    effective = float(np.linalg.norm(Y - X, axis=1).mean() / row_norm)
    return NoiseResult(Y, clamps, measured, effective)


def generate(cfg: GenerativeConfig) -> GeneratedInstance:
    """Draw ``cfg.n`` rows: facet index by ``probs``, then a uniform point on it."""
    rng = np.random.default_rng(cfg.seed)
    r = cfg.r
    sets = [tuple(range(r))] + list(cfg.facets)
    labels = rng.choice(len(sets), size=cfg.n, p=np.asarray(cfg.probs))
    A = np.zeros((cfg.n, r))
    for i, lab in enumerate(labels):
        S = list(sets[lab])
        A[i, S] = sample_simplex_uniform(len(S), rng)
    M = A @ cfg.W
    dm = DataMatrix(M / M.sum(axis=1, keepdims=True), normalized=True) if cfg.n else DataMatrix(np.zeros((0, cfg.W.shape[1])))
    return GeneratedInstance(dm, dm, A, cfg.W.copy(), labels.astype(np.int64), 0.0, tuple(cfg.facets))


def cyclic_facets(r: int, size: int = 3) -> list[tuple[int, ...]]:
    return [tuple(sorted((i + k) % r for k in range(size))) for i in range(r)]


def draw_robust_W(r: int, m: int, rng: np.random.Generator, alpha_floor: float = 0.1, max_tries: int = 100) -> np.ndarray:
    """Row-normalized ``Unif(0,1)`` matrix, redrawn until ``sigma_r >= alpha_floor``."""
    for _ in range(max_tries):
        W = rng.random((r, m))
        W /= W.sum(axis=1, keepdims=True)
        if alpha_robustness(W) >= alpha_floor:
            return W
    raise RuntimeError(f"no W with sigma_r >= {alpha_floor} after {max_tries} draws")


def generate_experiment(
    r: int = 5,
    m: int = 10,
    n1: int = 100,
    n2: int = 100,
    noise: float = 0.0,
    seed: int = 0,
    alpha_floor: float = 0.1,
) -> GeneratedInstance:
    """Benchmark instance: ``r`` cyclic 3-vertex facets with ``n1`` rows each plus ``n2`` interior rows.

    Rows are ordered facet by facet (labels 1..r) followed by the interior rows
    (label 0).
    """
    if r < 5:
        raise ValueError("cyclic 3-vertex facets need r >= 5 for unique pairwise intersections")
    if m < r:
        raise ValueError("m must be at least r")
    rng = np.random.default_rng(seed)
    W = draw_robust_W(r, m, rng, alpha_floor)
    facets = cyclic_facets(r)
    blocks, labels = [], []
    for i, S in enumerate(facets):
        a = np.zeros((n1, r))
        a[:, list(S)] = rng.random((n1, len(S)))
        blocks.append(a)
        labels.append(np.full(n1, i + 1))
    blocks.append(rng.random((n2, r)))
    labels.append(np.zeros(n2, dtype=np.int64))
    A = np.vstack(blocks)
    A /= A.sum(axis=1, keepdims=True)
    M = A @ W
    nz = add_noise(M, noise, rng)
    inst = GeneratedInstance(
        DataMatrix(M, normalized=True),
        DataMatrix(nz.matrix, normalized=True),
        A,
        W,
        np.concatenate(labels).astype(np.int64),
        float(noise),
        tuple(facets),
        nz.measured_ratio,
        nz.clamp_count,
    )
    inst.meta = {
        "r": r,
        "m": m,
        "n1": n1,
        "n2": n2,
        "noise": float(noise),
        "seed": int(seed),
        "measured_noise": nz.measured_ratio,
        "clamp_count": nz.clamp_count,
    }
    return inst


# ---------------------------------------------------------------------------
# Condition checker
# ---------------------------------------------------------------------------

@dataclass
class FacetCheck:
    facet: tuple[int, ...]
    count: int
    count_ok: bool
    center_index: int | None
    certified_sigma: float
    center_ok: bool

    @property
    def margin(self) -> float:
        return self.certified_sigma


@dataclass
class FillingReport:
    facets: list[FacetCheck]
    n_min: int
    gamma: float
    sampled_subspaces: int = 0
    heavy_subspaces: int = 0
    measured_H: float = 0.0

    @property
    def condition1(self) -> bool:
        return all(f.center_ok for f in self.facets)

    @property
    def condition2(self) -> bool:
        return all(f.count_ok for f in self.facets)

    @property
    def passed(self) -> bool:
        return self.condition1 and self.condition2


def _certify_center(P: np.ndarray, ci: int, d: int, rounds: int = 4) -> float:
    """Best ``sigma_d`` of ``sum_j w_j p_j p_j^T`` over convex combinations giving ``p_ci``.

    The smallest singular value is not linear in ``w``, so it is maximized
    through per-direction floors: fix an orthonormal frame, maximize the
    smallest diagonal entry by LP, then re-align the frame with the
    eigenvectors of the resulting matrix and repeat.
    """
    v0 = P[ci]
    pool = np.delete(P, ci, axis=0)
    k = pool.shape[0]
    if k < d:
        return 0.0
    U, s, _ = np.linalg.svd(pool.T, full_matrices=False)
    frame = U[:, :d]
    best = 0.0
    A_eq = np.vstack([np.ones((1, k)), pool.T])
    b_eq = np.concatenate([[1.0], v0])
    for _ in range(rounds):
        G = ((pool @ frame) ** 2).T  # (d, k)
        c = np.zeros(k + 1)
        c[-1] = -1.0
        A_ub = np.hstack([-G, np.ones((d, 1))])
        res = linprog(
            c,
            A_ub=A_ub,
            b_ub=np.zeros(d),
            A_eq=np.hstack([A_eq, np.zeros((A_eq.shape[0], 1))]),
            b_eq=b_eq,
            bounds=[(0, None)] * k + [(None, None)],
            method="highs",
        )
        if res.status != 0:
            return best
        w = np.clip(res.x[:k], 0, None)
        F = (pool * w[:, None]).T @ pool
        ev, vec = np.linalg.eigh(F)
        sig = float(ev[-d]) if ev.shape[0] >= d else 0.0
        best = max(best, sig)
        frame = vec[:, -d:]
    return best


def check_properly_filled(
    inst: GeneratedInstance,
    n_min: int,
    gamma: float,
    *,
    n_centers: int = 5,
    eps: float | None = None,
    n_random: int = 1000,
    seed: int = 0,
) -> FillingReport:
    """Check the count and centre conditions on every non-singleton facet.

    Condition 2 counts the rows whose support is exactly the facet.  Condition 1
    looks, among the ``n_centers`` rows deepest inside the facet, for one that is
    a convex combination of the other rows of that facet with a well-spread
    second-moment matrix (``sigma_|S| >= gamma``).  The subspace condition is
    only sampled: ``n_random`` random subspaces of the data span and as many
    spans of random row subsets per dimension, each with at least ``n_min`` rows
    within ``eps`` counting as "heavy"; the report gives the largest ratio
    ``min_S ||P_{Q-perp} Q_S|| / eps`` found over heavy subspaces (pass
    ``n_random=0`` to skip this part).
    """
    M = inst.M.entries
    A = inst.A
    r = inst.W.shape[0]
    checks = []
    for li, S in enumerate(inst.facets, start=1):
        if len(S) < 2:
            continue
        rows = np.flatnonzero(inst.labels == li)
        exact = np.array([set(np.flatnonzero(A[i] > 1e-12)) == set(S) for i in rows], dtype=bool)
        rows = rows[exact]
        cnt = int(rows.size)
        best_sig, best_ci = 0.0, None
        if cnt > len(S):
            depth = A[np.ix_(rows, list(S))].min(axis=1)
            order = np.argsort(-depth, kind="stable")[:n_centers]
            P = M[rows]
            for o in order:
                sig = _certify_center(P, int(o), len(S))
                if sig > best_sig:
                    best_sig, best_ci = sig, int(rows[o])
                if best_sig >= gamma:
                    break
        checks.append(FacetCheck(tuple(S), cnt, cnt >= n_min, best_ci, best_sig, best_sig >= gamma))
    report = FillingReport(checks, n_min, gamma)
    if n_random > 0:
        _sample_condition3(inst, report, n_min, eps if eps is not None else 1e-3, n_random, seed)
    return report


def _sample_condition3(inst, report: FillingReport, n_min, eps, n_random, seed):
    rng = np.random.default_rng(seed)
    M = inst.M.entries
    W = inst.W
    r, m = W.shape
    facet_spans = [orthonormalize(W[list(S)].T).basis for S in inst.facets if len(S) >= 2]
    row_space = orthonormalize(W.T).basis
    worst = 0.0
    heavy = 0
    total = 0
    for t in range(2, r):
        for kind in ("random", "rows"):
            for _ in range(n_random):
                if kind == "random":
                    Q = np.linalg.qr(row_space @ rng.standard_normal((r, t)))[0]
                else:
                    Q = orthonormalize(M[rng.choice(M.shape[0], t, replace=False)].T).basis
                total += 1
                if int((residual_norms(M, Q) <= eps).sum()) < n_min:
                    continue
                heavy += 1
                gaps = [np.linalg.norm(F - Q @ (Q.T @ F), 2) for F in facet_spans]
                worst = max(worst, min(gaps) / eps if gaps else math.inf)
    report.sampled_subspaces = total
    report.heavy_subspaces = heavy
    report.measured_H = worst


# ---------------------------------------------------------------------------
# Monte Carlo for the centre-existence lemma
# ---------------------------------------------------------------------------

def lemma1_sample_bound(d: int, eta: float = 0.1) -> int:
    """``ceil((4d)^d log(d / eta))`` samples."""
    return int(math.ceil((4 * d) ** d * math.log(d / eta)))


def lemma1_trial(P: np.ndarray) -> bool:
    """Whether the region construction certifies a centre among the points ``P``."""
    n, d = P.shape
    lab = lemma1_regions(P)
    picks = []
    for k in range(d + 1):
        hit = np.flatnonzero(lab == k)
        if hit.size == 0:
            return False
        picks.append(int(hit[0]))
    v0 = P[picks[0]]
    V = P[picks[1:]].T  # columns v^1..v^d
    try:
        w = np.linalg.solve(V, v0)
    except np.linalg.LinAlgError:
        return False
    if np.any(w < -1e-12):
        return False
    F = (V * w) @ V.T
    return float(np.linalg.eigvalsh(F)[0]) >= 1.0 / (16 * d) - 1e-12


def lemma1_empirical(d: int, n: int, trials: int, seed: int = 0) -> float:
    """Fraction of trials where ``n`` uniform simplex points yield a certified centre."""
    if d < 2:
        raise ValueError("d must be at least 2")
    if trials <= 0:
        return 0.0
    ok = 0
    for t in range(trials):
        rng = np.random.default_rng(seed + t)
        P = sample_simplex_uniform(d, rng, size=n)
        ok += lemma1_trial(P)
    return ok / trials
