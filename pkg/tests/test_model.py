import itertools

import numpy as np
import pytest

from faceintersect.model import (
    DataMatrix,
    Factorization,
    NotShrinkableError,
    alpha_robustness,
    facet_support,
    find_shrinkable_pair,
    is_subset_separable,
    row_normalize,
    volume_proxy,
    volume_shrink_step,
)
from faceintersect.synthetic import generate_experiment


def test_row_normalize_example():
    d = row_normalize([[2, 2], [1, 3]])
    np.testing.assert_allclose(d.entries, [[0.5, 0.5], [0.25, 0.75]])
    np.testing.assert_allclose(d.row_scales, [4, 4])
    assert d.normalized


def test_row_normalize_identity_case():
    X = np.array([[0.2, 0.8], [1.0, 0.0]])
    d = row_normalize(X)
    np.testing.assert_array_equal(d.entries, X)
    np.testing.assert_allclose(d.row_scales, 1.0)
    np.testing.assert_allclose(d.denormalized(), X)


def test_row_normalize_zero_row():
    with pytest.raises(ValueError, match="zero row 0"):
        row_normalize([[0, 0], [1, 1]])


def test_datamatrix_invariants():
    with pytest.raises(ValueError):
        DataMatrix(np.array([[-1.0, 2.0]]))
    with pytest.raises(ValueError):
        DataMatrix(np.array([[0.3, 0.3]]), normalized=True)


def test_factorization_clamps_and_normalizes():
    f = Factorization(np.array([[1.0, -1e-13]]), np.array([[2.0, 2.0]]), ["anchor"])
    assert f.A.min() >= 0
    np.testing.assert_allclose(f.W.sum(axis=1), 1.0, atol=1e-8)


def test_alpha_robustness():
    assert alpha_robustness(np.eye(3)) == pytest.approx(1.0)
    assert alpha_robustness(np.array([[0.5, 0.5, 0], [0.5, 0.5, 0], [0, 0, 1]])) == pytest.approx(0, abs=1e-10)
    rng = np.random.default_rng(0)
    W = rng.random((5, 10))
    W /= W.sum(1, keepdims=True)
    assert alpha_robustness(W) == pytest.approx(np.linalg.svd(W, compute_uv=False)[-1], abs=1e-10)


def _brute_separable(A, tol=0.0):
    """Oracle: every column j has some set of rows whose supports intersect to exactly {j}."""
    supports = {frozenset(np.flatnonzero(row > tol)) for row in A}
    supports = [s for s in supports if s]
    r = A.shape[1]
    found = set()
    for k in range(1, len(supports) + 1):
        for fam in itertools.combinations(supports, k):
            inter = frozenset.intersection(*fam)
            if len(inter) == 1:
                found |= inter
    return found == set(range(r))


def test_subset_separable_figure_configuration():
    # supports {1},{3},{1,2},{2,3} (1-based) over r = 3
    A = np.array([[1, 0, 0], [0, 0, 1], [0.5, 0.5, 0], [0, 0.5, 0.5]])
    ok, witness = is_subset_separable(A, 1e-12)
    assert ok
    assert {w.support for w in witness} >= {(0,), (2,), (0, 1), (1, 2)}


def test_all_positive_not_separable():
    ok, _ = is_subset_separable(np.full((10, 4), 0.25), 1e-12)
    assert not ok


def test_cyclic_supports_separable_matches_brute_force():
    rng = np.random.default_rng(1)
    r = 5
    A = np.zeros((50, r))
    for i in range(50):
        S = [(i + k) % r for k in range(3)]
        A[i, S] = rng.random(3)
    ok, _ = is_subset_separable(A, 1e-12)
    assert ok and _brute_separable(A)


def test_random_supports_match_brute_force():
    rng = np.random.default_rng(2)
    for _ in range(60):
        A = (rng.random((6, 4)) < 0.55) * rng.random((6, 4))
        A = A[A.sum(1) > 0]
        if len(A) == 0:
            continue
        assert is_subset_separable(A, 1e-12)[0] == _brute_separable(A)


def test_facet_support_cases():
    fs = facet_support(np.eye(3))
    assert [f.support for f in fs] == [(0,), (1,), (2,)]
    assert all(f.count == 1 for f in fs)
    fs = facet_support(np.full((4, 3), 1 / 3))
    assert len(fs) == 1 and fs[0].support == (0, 1, 2) and fs[0].count == 4


def test_facet_support_generated_instance():
    inst = generate_experiment(seed=0)
    counts = {f.support: f.count for f in facet_support(inst.A)}
    for S in inst.facets:
        assert counts[tuple(S)] == 100


def test_volume_shrink_example():
    A = np.array([[0.5, 0.5]])
    W = np.eye(2)
    # the largest step keeping A' non-negative is 0.5 here
    A2, W2, eps = volume_shrink_step(A, W, 0, 1, epsilon=0.5)
    assert eps == 0.5
    np.testing.assert_allclose(A2, [[1.0, 0.0]])
    np.testing.assert_allclose(W2[0], [0.5, 0.5])
    np.testing.assert_allclose(A2 @ W2, A @ W)
    _, _, eps_default = volume_shrink_step(A, W, 0, 1)
    assert eps_default == pytest.approx(0.25)


def test_volume_shrink_zero_eps_and_errors():
    A = np.array([[0.5, 0.5], [0.2, 0.8]])
    W = np.eye(2)
    A2, W2, eps = volume_shrink_step(A, W, 0, 1, epsilon=0.0)
    np.testing.assert_array_equal(A2, A)
    np.testing.assert_array_equal(W2, W)
    with pytest.raises(NotShrinkableError):
        volume_shrink_step(np.array([[1.0, 0.0], [0.5, 0.5]]), W, 0, 1)
    with pytest.raises(NotShrinkableError):
        volume_shrink_step(A, W, 0, 1, epsilon=0.99)


def test_volume_proxy_shrinks_by_factor():
    rng = np.random.default_rng(3)
    A = rng.random((30, 4)) + 0.05
    A /= A.sum(1, keepdims=True)
    W = rng.random((4, 6))
    W /= W.sum(1, keepdims=True)
    A2, W2, eps = volume_shrink_step(A, W, 2, 0)
    assert volume_proxy(W2) == pytest.approx((1 - eps) * volume_proxy(W), rel=1e-10)
    np.testing.assert_allclose(A2 @ W2, A @ W, atol=1e-12)
    np.testing.assert_allclose(A2.sum(1), 1.0, atol=1e-12)
    assert A2.min() >= 0


def test_find_shrinkable_pair():
    assert find_shrinkable_pair(np.eye(3)) is None
    assert find_shrinkable_pair(np.full((3, 2), 0.5)) == (0, 1)
