"""The convex program used to grow a facet estimate around a centre point.

Given points ``v_1..v_n``, a centre ``v_0`` and an orthonormal ``Q`` (possibly
empty) it maximizes ``sum_i w_i ||P_{Q-perp} v_i||^2`` over the probability
simplex, subject to

* ``||v_0 - sum_i w_i v_i|| <= rho``  (the ball constraint), and
* ``sum_i w_i (q_k . v_i)^2 >= floor`` for each column ``q_k`` of ``Q``.

With ``rho = 0`` the ball collapses to an equality and the problem is a plain
LP, solved by HiGHS.  With ``rho > 0`` the problem is a second-order cone
program; it is handed to Clarabel in dual form, which is small (``r + k + 2``
variables against ``n`` rows), and the weights are read off as the dual
multipliers of the per-point rows.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

try:
    import clarabel
except ImportError:  # pragma: no cover
    clarabel = None


class SolverError(RuntimeError):
    """The solver stopped without a usable answer (distinct from infeasibility)."""


@dataclass(frozen=True)
class WeightProgram:
    points: np.ndarray = field(repr=False)
    center: np.ndarray = field(repr=False)
    ball_radius: float
    floor_vectors: np.ndarray = field(repr=False)
    floor: float = 0.0

    def __post_init__(self):
        P = np.asarray(self.points, dtype=np.float64)
        c = np.asarray(self.center, dtype=np.float64).ravel()
        Q = np.asarray(self.floor_vectors, dtype=np.float64)
        if Q.ndim != 2:
            Q = Q.reshape(P.shape[1], -1)
        if P.ndim != 2 or P.shape[1] != c.shape[0] or Q.shape[0] != c.shape[0]:
            raise ValueError("points, center and floor vectors must share the ambient dimension")
        if self.ball_radius < 0:
            raise ValueError("ball_radius must be non-negative")
        object.__setattr__(self, "points", P)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "floor_vectors", Q)

    def objective_coefficients(self) -> np.ndarray:
        P, Q = self.points, self.floor_vectors
        sq = np.einsum("ij,ij->i", P, P)
        if Q.shape[1]:
            C = P @ Q
            sq = sq - np.einsum("ij,ij->i", C, C)
        return np.maximum(sq, 0.0)

    def floor_matrix(self) -> np.ndarray:
        """Row k holds ``(q_k . v_i)^2`` over the points."""
        return ((self.points @ self.floor_vectors) ** 2).T

    def violation(self, w: np.ndarray) -> float:
        """Largest violation of any constraint family at ``w``."""
        w = np.asarray(w)
        v = max(0.0, -float(w.min()), abs(float(w.sum()) - 1.0))
        ball = float(np.linalg.norm(self.center - w @ self.points)) - self.ball_radius
        v = max(v, ball)
        if self.floor_vectors.shape[1]:
            v = max(v, float(np.max(self.floor - self.floor_matrix() @ w)))
        return v


@dataclass(frozen=True)
class WeightSolution:
    status: str  # "optimal" or "infeasible"
    weights: np.ndarray | None = field(default=None, repr=False)
    objective: float = float("nan")

    @property
    def feasible(self) -> bool:
        return self.status == "optimal"


def _finish(p: WeightProgram, w: np.ndarray, c: np.ndarray) -> WeightSolution:
    w = np.clip(np.asarray(w, dtype=np.float64), 0.0, None)
    s = w.sum()
    if s <= 0:
        raise SolverError("solver returned an all-zero weight vector")
    w = w / s
    return WeightSolution("optimal", w, float(c @ w))


def _solve_lp(p: WeightProgram, c: np.ndarray, tol: float) -> WeightSolution:
    n = p.points.shape[0]
    A_eq = np.vstack([np.ones((1, n)), p.points.T])
    b_eq = np.concatenate([[1.0], p.center])
    k = p.floor_vectors.shape[1]
    A_ub = -p.floor_matrix() if k else None
    b_ub = -np.full(k, p.floor) if k else None
    res = linprog(
        -c,
        A_ub=A_ub,
        b_ub=b_ub,
        A_eq=A_eq,
        b_eq=b_eq,
        bounds=(0, None),
        method="highs",
        options={"primal_feasibility_tolerance": min(tol, 1e-7), "dual_feasibility_tolerance": min(tol, 1e-7)},
    )
    if res.status == 2:
        return WeightSolution("infeasible")
    if res.status != 0:
        raise SolverError(f"HiGHS stopped with status {res.status}: {res.message}")
    return _finish(p, res.x, c)


def _solve_socp_dual(p: WeightProgram, c: np.ndarray, tol: float) -> WeightSolution:
    if clarabel is None:  # pragma: no cover
        raise SolverError("clarabel is required for a positive ball radius")
    V, v0, rho = p.points, p.center, p.ball_radius
    n, r = V.shape
    k = p.floor_vectors.shape[1]
    G = p.floor_matrix() if k else np.zeros((0, n))
    g = np.full(k, p.floor)
    # Dual variables x = [t, z (r), mu (k), s]:
    #   minimise  t - z.v0 - mu.g + rho s
    #   s.t.      t - z.v_i - mu.G_i >= c_i   (one row per point, multiplier w_i)
    #             mu >= 0,  ||z|| <= s
    nv = 1 + r + k + 1
    q = np.concatenate([[1.0], -v0, -g, [rho]])
    rows = np.hstack([-np.ones((n, 1)), V, G.T, np.zeros((n, 1))])
    blocks = [sp.csc_matrix(rows)]
    rhs = [-c]
    if k:
        Am = np.zeros((k, nv))
        Am[:, 1 + r : 1 + r + k] = -np.eye(k)
        blocks.append(sp.csc_matrix(Am))
        rhs.append(np.zeros(k))
    As = np.zeros((r + 1, nv))
    As[0, -1] = -1.0
    As[1:, 1 : 1 + r] = -np.eye(r)
    blocks.append(sp.csc_matrix(As))
    rhs.append(np.zeros(r + 1))
    cones = [clarabel.NonnegativeConeT(n + k), clarabel.SecondOrderConeT(r + 1)]
    settings = clarabel.DefaultSettings()
    settings.verbose = False
    settings.tol_gap_abs = 1e-10
    settings.tol_gap_rel = 1e-10
    settings.tol_feas = 1e-10
    settings.max_iter = 200
    solver = clarabel.DefaultSolver(
        sp.csc_matrix((nv, nv)), q, sp.vstack(blocks, format="csc"), np.concatenate(rhs), cones, settings
    )
    sol = solver.solve()
    status = str(sol.status)
    # an unbounded dual certifies an empty primal
    if "DualInfeasible" in status or "Unbounded" in status:
        return WeightSolution("infeasible")
    if "PrimalInfeasible" in status:
        raise SolverError("dual reported infeasible; the weight program cannot be unbounded")
    if status not in ("Solved", "AlmostSolved", "SolvedStatus.Solved", "SolvedStatus.AlmostSolved"):
        raise SolverError(f"clarabel stopped with status {status}")
    out = _finish(p, np.asarray(sol.z)[:n], c)
    if p.violation(out.weights) > max(tol, 1e-6):
        # numerically the problem sits on the feasibility boundary
        return WeightSolution("infeasible")
    return out


def solve_weight_program(p: WeightProgram, tol: float = 1e-7) -> WeightSolution:
    """Maximize the out-of-``Q`` mass subject to the ball and floor constraints.

    Returns a :class:`WeightSolution` whose ``status`` is ``"optimal"`` or
    ``"infeasible"``.  Raises :class:`SolverError` when the solver fails in any
    other way.
    """
    c = p.objective_coefficients()
    if p.points.shape[0] == 0:
        return WeightSolution("infeasible")
    if p.ball_radius == 0:
        return _solve_lp(p, c, tol)
    return _solve_socp_dual(p, c, tol)
