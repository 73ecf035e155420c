"""Reference methods: greedy anchor selection and projected-gradient NMF."""

from __future__ import annotations

import numpy as np

from .completion import find_remaining_vertices, recover_weights
from .model import Factorization


def anchor_words(M, r: int) -> Factorization:
    """Pick ``r`` rows greedily by residual norm, then fit weights on the simplex."""
    X = np.asarray(getattr(M, "entries", M), dtype=np.float64)
    n, m = X.shape
    if r > min(n, m):
        raise ValueError("r must not exceed min(n, m)")
    W = np.array(find_remaining_vertices(X, [], r))
    if r == 1:
        return Factorization(np.ones((n, 1)), W, ["anchor"])
    return Factorization(recover_weights(X, W), W, ["anchor"] * r)


def _pg_subproblem(V, A, W, step, sigma=0.01, beta=0.1, max_backtracks=40):
    """One projected-gradient step on ``W`` for ``min ||V - A W||^2``, Armijo rule.

    Returns the new ``W`` and a step size to try next time.  The step is only
    accepted if the sufficient-decrease condition holds, so the objective
    never goes up; if no step is accepted ``W`` is returned unchanged.
    """
    AtA = A.T @ A
    grad = AtA @ W - A.T @ V
    for _ in range(max_backtracks):
        Wn = np.maximum(W - step * grad, 0.0)
        d = Wn - W
        gd = float((grad * d).sum())
        dQd = float((d * (AtA @ d)).sum())
        # f(Wn) - f(W) = gd + dQd/2 for the quadratic; Armijo with factor sigma
        if (1 - sigma) * gd + 0.5 * dQd <= 0:
            return Wn, step / beta
        step *= beta
    return W, step


def projected_gradient_nmf(M, r: int, max_iters: int = 2000, seed: int = 0, tol: float = 1e-10, return_history: bool = False):
    """Alternating projected gradient for ``min ||M - A W||_F^2`` with ``A, W >= 0``.

    Initial factors are seeded uniform draws, rescaled so that ``||A W||_F``
    matches ``||M||_F``.  Output rows of ``W`` are normalized to sum 1 with the
    scale moved into ``A``, whose rows are then normalized as well.
    """
    V = np.asarray(getattr(M, "entries", M), dtype=np.float64)
    n, m = V.shape
    if r > min(n, m):
        raise ValueError("r must not exceed min(n, m)")
    if max_iters < 1:
        raise ValueError("max_iters must be at least 1")
    rng = np.random.default_rng(seed)
    A = rng.random((n, r))
    W = rng.random((r, m))
    s = np.sqrt(np.linalg.norm(V) / max(np.linalg.norm(A @ W), 1e-300))
    A *= s
    W *= s
    step_w = step_a = 1.0
    hist = [float(np.linalg.norm(V - A @ W) ** 2)]
    for _ in range(max_iters):
        W, step_w = _pg_subproblem(V, A, W, step_w)
        At, step_a = _pg_subproblem(V.T, W.T, A.T, step_a)
        A = At.T
        f = float(np.linalg.norm(V - A @ W) ** 2)
        hist.append(f)
        if hist[-2] - f <= tol * max(hist[0], 1e-300):
            break
    scale = W.sum(axis=1)
    scale[scale <= 0] = 1.0
    fac = Factorization(A * scale, W / scale[:, None], ["unknown"] * r)
    return (fac, hist) if return_history else fac
