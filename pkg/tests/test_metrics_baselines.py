import itertools

import numpy as np
import pytest

from faceintersect.baselines import anchor_words, projected_gradient_nmf
from faceintersect.metrics import best_permutation, matched_w_error, max_row_error, reconstruction_errors
from faceintersect.synthetic import draw_robust_W


def exhaustive(W, V):
    return min(np.linalg.norm(W - V[list(p)], 2) for p in itertools.permutations(range(len(W))))


def test_permuted_copy_is_zero(rng):
    W = rng.random((5, 7))
    assert matched_w_error(W, W[[3, 1, 4, 0, 2]]) == pytest.approx(0, abs=1e-15)


def test_single_entry_bump(rng):
    W = rng.random((4, 6))
    V = W.copy()
    V[0, 0] += 0.03
    assert matched_w_error(W, V) == pytest.approx(0.03, abs=1e-12)


def test_matches_exhaustive_oracle():
    rng = np.random.default_rng(0)
    for r in range(1, 7):
        for _ in range(10):
            W, V = rng.random((r, 5)), rng.random((r, 5))
            assert matched_w_error(W, V) == pytest.approx(exhaustive(W, V), abs=1e-12)


def test_triangle_bound():
    rng = np.random.default_rng(1)
    for _ in range(30):
        W, U, V = (rng.random((5, 5)) for _ in range(3))
        assert matched_w_error(W, V) <= matched_w_error(W, U) + matched_w_error(U, V) + 1e-12


def test_large_r_uses_assignment():
    rng = np.random.default_rng(2)
    W = rng.random((12, 20))
    p = rng.permutation(12)
    np.testing.assert_array_equal(W[p][best_permutation(W, W[p])], W)
    assert max_row_error(W, W[p] + 1e-3) == pytest.approx(1e-3 * np.sqrt(20))


def test_shape_mismatch():
    with pytest.raises(ValueError):
        matched_w_error(np.ones((3, 4)), np.ones((4, 4)))


def test_reconstruction_errors():
    A, W = np.eye(2), np.eye(2)
    e = reconstruction_errors(np.eye(2), 2 * np.eye(2), A, W)
    assert e["m_error"] == 0 and e["m_tilde_error"] == pytest.approx(1.0)
    assert e["m_tilde_error_fro"] == pytest.approx(np.sqrt(2))


def test_anchor_words_separable_exact():
    rng = np.random.default_rng(3)
    W = draw_robust_W(5, 10, rng)
    A = np.vstack([np.eye(5), rng.dirichlet(np.ones(5), 60)])
    f = anchor_words(A @ W, 5)
    assert matched_w_error(W, f.W) <= 1e-10


def test_anchor_words_r1():
    M = np.array([[0.5, 0.5], [0.9, 0.1], [0.6, 0.4]])
    np.testing.assert_array_equal(anchor_words(M, 1).W, M[[1]])


def test_pg_planted_low_rank():
    rng = np.random.default_rng(4)
    W = draw_robust_W(5, 10, rng)
    M = rng.dirichlet(np.ones(5), 200) @ W
    f, hist = projected_gradient_nmf(M, 5, max_iters=2000, seed=0, return_history=True)
    assert np.linalg.norm(M - f.A @ f.W) / np.linalg.norm(M) <= 0.05
    assert all(b <= a for a, b in zip(hist, hist[1:]))


def test_pg_identity():
    f = projected_gradient_nmf(np.eye(4), 4, max_iters=2000, seed=0)
    assert np.linalg.norm(np.eye(4) - f.A @ f.W) / 2.0 <= 1e-3


def test_pg_deterministic_and_monotone():
    rng = np.random.default_rng(5)
    M = rng.random((40, 8))
    a, ha = projected_gradient_nmf(M, 3, max_iters=300, seed=7, return_history=True)
    b, hb = projected_gradient_nmf(M, 3, max_iters=300, seed=7, return_history=True)
    np.testing.assert_array_equal(a.W, b.W)
    assert ha == hb
    assert np.all(np.diff(ha) <= 0)
    np.testing.assert_allclose(a.W.sum(1), 1.0)


def test_pg_bad_args():
    with pytest.raises(ValueError):
        projected_gradient_nmf(np.eye(3), 4)
    with pytest.raises(ValueError):
        projected_gradient_nmf(np.eye(3), 2, max_iters=0)
