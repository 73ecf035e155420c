import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from faceintersect.subspace import (
    DimensionError,
    PsdAccumulator,
    Subspace,
    complement,
    distance,
    intersect,
    orthonormalize,
    project,
    small_singular_space,
    top_singular_space,
)


def e(i, m):
    v = np.zeros(m)
    v[i] = 1.0
    return v


def test_orthonormalize_collinear():
    s = orthonormalize([(1, 0), (2, 0)], 1e-8)
    assert s.dim == 1
    assert distance(s, Subspace(np.array([[1.0], [0.0]]))) < 1e-12


def test_orthonormalize_full_plane():
    assert orthonormalize([(1, 0), (0, 1)], 1e-8).dim == 2


def test_orthonormalize_random_gram_identity():
    rng = np.random.default_rng(1)
    s = orthonormalize(list(rng.standard_normal((5, 10))))
    assert s.dim == 5 and s.ambient_dim == 10
    np.testing.assert_allclose(s.basis.T @ s.basis, np.eye(5), atol=1e-10)


def test_basis_independence():
    rng = np.random.default_rng(2)
    V = rng.standard_normal((7, 3))
    s1 = orthonormalize(V)
    s2 = orthonormalize(V @ rng.standard_normal((3, 3)))
    assert distance(s1, s2) < 1e-8


def test_bad_basis_rejected():
    with pytest.raises(DimensionError):
        Subspace(np.ones(3))


def test_project():
    np.testing.assert_allclose(project(orthonormalize([(1, 0)]), [3, 4]), [3, 0])
    v = np.array([0.3, -2.0, 5.0])
    np.testing.assert_allclose(project(Subspace.full(3), v), v)
    u = np.array([1.0, 1.0]) / np.sqrt(2)
    s = orthonormalize([u])
    np.testing.assert_allclose(project(s, [1, 0]), np.outer(u, u) @ [1, 0], atol=1e-15)
    np.testing.assert_allclose(project(s, [1, 0]), [0.5, 0.5], atol=1e-15)


def test_complement_cases():
    c = complement(orthonormalize([e(0, 2)]))
    assert c.dim == 1 and distance(c, orthonormalize([e(1, 2)])) < 1e-12
    assert complement(Subspace.zero(4)).dim == 4
    rng = np.random.default_rng(3)
    s = orthonormalize(rng.standard_normal((7, 3)))
    cc = complement(s)
    assert cc.dim == 4
    assert distance(s, complement(cc)) < 1e-8


def test_distance_values():
    a, b = orthonormalize([e(0, 2)]), orthonormalize([e(1, 2)])
    assert distance(a, a) == pytest.approx(0, abs=1e-12)
    assert distance(a, b) == pytest.approx(1.0)
    d = distance(a, orthonormalize([(1, 1)]))
    # sine of the principal angle from the SVD of U^T V
    cos = np.linalg.svd(a.basis.T @ orthonormalize([(1, 1)]).basis, compute_uv=False).min()
    assert d == pytest.approx(np.sqrt(1 - cos**2), abs=1e-12)
    assert d == pytest.approx(np.sqrt(2) / 2, abs=1e-5)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(0, 6), st.integers(0, 10_000))
def test_distance_range_and_symmetry(m_extra, d, seed):
    rng = np.random.default_rng(seed)
    m = d + m_extra
    if d == 0:
        return
    u = orthonormalize(rng.standard_normal((m, d)))
    v = orthonormalize(rng.standard_normal((m, d)))
    a, b = distance(u, v), distance(v, u)
    assert -1e-12 <= a <= 1.0 + 1e-12
    assert a == pytest.approx(b, abs=1e-8)


def test_top_singular_space():
    s = top_singular_space(np.diag([1.0, 0.5, 0.01]), 0.1)
    assert s.dim == 2 and distance(s, orthonormalize([e(0, 3), e(1, 3)])) < 1e-12
    assert top_singular_space(np.zeros((4, 4)), 1e-3).dim == 0
    rng = np.random.default_rng(4)
    base = orthonormalize(rng.standard_normal((6, 2))).basis
    pts = (base @ rng.standard_normal((2, 9))).T
    f = PsdAccumulator.from_points(pts, rng.random(9))
    ev, vec = np.linalg.eigh(f.matrix)
    s = top_singular_space(f, 0.5 * ev[-2])
    assert s.dim == 2
    assert distance(s, Subspace(vec[:, -2:])) < 1e-8


def test_psd_accumulator_invariants():
    rng = np.random.default_rng(5)
    f = PsdAccumulator.from_points(rng.standard_normal((20, 5)), rng.random(20))
    np.testing.assert_allclose(f.matrix, f.matrix.T, atol=1e-10)
    assert np.linalg.eigvalsh(f.matrix).min() >= -1e-8
    with pytest.raises(DimensionError):
        PsdAccumulator(np.ones((2, 3)))


def test_small_singular_space():
    s = small_singular_space(np.column_stack([e(0, 3), e(1, 3)]), 1e-8)
    assert s.dim == 1 and distance(s, orthonormalize([e(2, 3)])) < 1e-12
    assert small_singular_space(np.eye(3), 1e-8).dim == 0


def test_small_singular_space_facet_complements():
    # two facets of a simplex sharing vertex 1: their complements' null space is that vertex
    rng = np.random.default_rng(6)
    W = rng.random((3, 3))
    f1 = orthonormalize(W[[0, 1]].T)
    f2 = orthonormalize(W[[1, 2]].T)
    stacked = np.hstack([complement(f1).basis, complement(f2).basis])
    s = small_singular_space(stacked, 1e-8)
    # oracle: exact null space of stacked^T from a rank-revealing SVD
    _, sv, vt = np.linalg.svd(stacked.T)
    null = vt[np.sum(sv > 1e-10):].T
    assert s.dim == null.shape[1] == 1
    assert distance(s, Subspace(null)) < 1e-10
    assert distance(s, orthonormalize([W[1]])) < 1e-10


def test_intersect_simple():
    a = orthonormalize([e(0, 3), e(1, 3)])
    b = orthonormalize([e(1, 3), e(2, 3)])
    s = intersect([a, b], 1e-8)
    assert s.dim == 1 and distance(s, orthonormalize([e(1, 3)])) < 1e-12
    assert distance(intersect([a, a], 1e-8), a) < 1e-12
    assert intersect([a, a], 1e-8).dim == 2


def test_intersect_planted_direction():
    rng = np.random.default_rng(7)
    for _ in range(20):
        shared = rng.standard_normal(5)
        a = orthonormalize(np.column_stack([shared, rng.standard_normal((5, 2))]))
        b = orthonormalize(np.column_stack([shared, rng.standard_normal((5, 2))]))
        s = intersect([a, b], 1e-8)
        assert s.dim == 1
        assert distance(s, orthonormalize([shared])) < 1e-8


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        project(Subspace.full(3), np.ones(2))
