import itertools
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import discovery, instance
from faceintersect.intersection import IntersectionState, intersect_sets, intersect_subspaces
from faceintersect.metrics import best_permutation
from faceintersect.model import alpha_robustness
from faceintersect.subspace import distance, orthonormalize


def brute_force_singletons(sets, r):
    """Oracle: every index that is the intersection of some non-empty subfamily."""
    fam = [frozenset(s) for s in sets]
    out = set()
    for k in range(1, len(fam) + 1):
        for sub in itertools.combinations(fam, k):
            inter = frozenset(range(r)).intersection(*sub)
            if len(inter) == 1:
                out |= inter
    return out


def random_family(rng, r):
    h = int(rng.integers(0, 9))
    return [set(np.flatnonzero(rng.random(r) < rng.uniform(0.2, 0.8)).tolist()) for _ in range(h)]


def test_figure_example():
    # {1,2}, {2,3} over r = 3 (1-based) gives {2}
    assert intersect_sets([{0, 1}, {1, 2}], 3) == {1}


def test_empty_input():
    assert intersect_sets([], 4) == set()


def test_cyclic_family_gives_everything():
    fam = [{i, (i + 1) % 5, (i + 2) % 5} for i in range(5)]
    assert intersect_sets(fam, 5) == set(range(5))


def test_matches_brute_force_r8():
    rng = np.random.default_rng(0)
    for _ in range(20):
        fam = random_family(rng, 8)
        assert intersect_sets(fam, 8) == brute_force_singletons(fam, 8)


@settings(max_examples=150, deadline=None)
@given(st.integers(2, 8), st.lists(st.sets(st.integers(0, 7)), max_size=8))
def test_matches_brute_force_property(r, fam):
    fam = [{x for x in s if x < r} for s in fam]
    assert intersect_sets(fam, r) == brute_force_singletons(fam, r)


def _cfg(W):
    return SimpleNamespace(r=W.shape[0], alpha=alpha_robustness(W))


def _matched_max_error(W, V):
    p = best_permutation(W, V)
    return float(np.abs(W - V[p]).max())


def test_exact_cyclic_spans():
    W = instance(0.0, 0).W
    facets = [orthonormalize(W[[i, (i + 1) % 5, (i + 2) % 5]].T) for i in range(5)]
    st_ = IntersectionState()
    verts = intersect_subspaces(facets, _cfg(W), 1e-9, state=st_)
    assert len(verts) == 5
    assert _matched_max_error(W, np.array(verts)) < 1e-6
    np.testing.assert_allclose(np.array(verts).sum(1), 1.0, atol=1e-8)
    assert st_.gamma_dims == sorted(st_.gamma_dims)


def test_figure_geometry_in_r3():
    W = np.array([[0.7, 0.2, 0.1], [0.2, 0.6, 0.2], [0.1, 0.1, 0.8]])
    facets = [orthonormalize(W[[0, 1]].T), orthonormalize(W[[1, 2]].T)]
    verts = intersect_subspaces(facets, _cfg(W), 1e-9)
    assert len(verts) == 1
    np.testing.assert_allclose(verts[0], W[1], atol=1e-10)


def test_needs_alpha():
    with pytest.raises(ValueError):
        intersect_subspaces([orthonormalize(np.eye(3)[:, :2])], SimpleNamespace(r=3, alpha=None), 1e-9)


def test_noisy_facets_within_bound():
    inst = instance(0.01, 0)
    X, red, res, cands = discovery(0.01, 0)
    spans = [orthonormalize(red.reduce(inst.W[list(S)]).T) for S in inst.facets]
    eps_S = max(min(max(distance(c.subspace, s), distance(s, c.subspace)) for s in spans) for c in cands)
    verts = intersect_subspaces([c.subspace for c in cands], res, res.eps_S, sum_functional=red.sum_functional)
    assert len(verts) == 5
    V = red.lift(np.array(verts))
    r, alpha = 5, alpha_robustness(inst.W)
    p = best_permutation(inst.W, V)
    err = np.linalg.norm(inst.W - V[p], axis=1).max()
    assert err <= 2 * 4 * r**1.5 * eps_S / alpha
