"""Permutation-matched error between vertex sets, plus reconstruction errors."""

from __future__ import annotations

import itertools

import numpy as np
from scipy.optimize import linear_sum_assignment

EXHAUSTIVE_MAX_R = 8


def best_permutation(W, W_hat) -> np.ndarray:
    """Row order of ``W_hat`` that best matches ``W``.

    Exhaustive over all permutations (spectral norm) for ``r <= 8``; above that
    a Hungarian assignment on squared row distances.
    """
    W = np.asarray(W, dtype=np.float64)
    Wh = np.asarray(W_hat, dtype=np.float64)
    if W.shape != Wh.shape:
        raise ValueError(f"shape mismatch {W.shape} vs {Wh.shape}")
    r = W.shape[0]
    if r <= EXHAUSTIVE_MAX_R:
        best, arg = np.inf, None
        for p in itertools.permutations(range(r)):
            e = np.linalg.norm(W - Wh[list(p)], 2)
            if e < best:
                best, arg = e, p
        return np.array(arg)
    C = ((W[:, None, :] - Wh[None, :, :]) ** 2).sum(axis=2)
    rows, cols = linear_sum_assignment(C)
    return cols[np.argsort(rows)]


def matched_w_error(W, W_hat) -> float:
    """``min_pi ||W - Pi W_hat||_2`` (spectral norm)."""
    p = best_permutation(W, W_hat)
    return float(np.linalg.norm(np.asarray(W) - np.asarray(W_hat)[p], 2))


def max_row_error(W, W_hat) -> float:
    """Largest row distance after the spectral-norm matching."""
    p = best_permutation(W, W_hat)
    return float(np.linalg.norm(np.asarray(W) - np.asarray(W_hat)[p], axis=1).max())


def reconstruction_errors(M_true, M_obs, A_hat, W_hat) -> dict[str, float]:
    """Spectral and Frobenius distances of ``A_hat W_hat`` to the true and observed data."""
    R = np.asarray(A_hat) @ np.asarray(W_hat)
    out = {}
    for name, M in (("m_tilde", M_obs), ("m", M_true)):
        D = np.asarray(M) - R
        out[f"{name}_error"] = float(np.linalg.norm(D, 2))
        out[f"{name}_error_fro"] = float(np.linalg.norm(D))
    return out
