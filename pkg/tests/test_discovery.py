import numpy as np
import pytest

from conftest import discovery, instance
from faceintersect import AlgoConfig
from faceintersect.config import resolve
from faceintersect.discovery import (
    FacetCandidate,
    count_near_points,
    find_all_facets,
    find_one_facet,
    prune_and_merge,
    thread_count,
)
from faceintersect.model import alpha_robustness
from faceintersect.subspace import Subspace, distance, orthonormalize
from faceintersect.synthetic import GenerativeConfig, draw_robust_W, generate


def _facet_instance(seed=0):
    """Planted r=5, m=10 simplex with rows on facet {0, 1}, on the vertices, and inside."""
    rng = np.random.default_rng(seed)
    W = draw_robust_W(5, 10, rng)
    cfg = GenerativeConfig(W, ((0, 1), (0,), (1,), (2,), (3,), (4,)), (0.3, 0.4, 0.06, 0.06, 0.06, 0.06, 0.06), 200, seed)
    return W, generate(cfg)


def _exact_cfg(W, eps=1e-9):
    a = alpha_robustness(W)
    return AlgoConfig(r=5, eps=eps, alpha=a, gamma=a**2 / 32)


def test_exact_two_dim_facet():
    W, inst = _facet_instance()
    X = inst.M.entries
    on_facet = np.flatnonzero(inst.labels == 1)
    # most balanced facet row as the centre
    c = on_facet[np.argmin(np.abs(inst.A[on_facet, 0] - 0.5))]
    q = find_one_facet(X, int(c), _exact_cfg(W))
    assert q is not None and q.dim == 2
    assert distance(q, orthonormalize(W[[0, 1]].T)) < 1e-6


def test_anchor_center_gives_one_dim():
    W, inst = _facet_instance()
    X = np.vstack([np.repeat(W[:1], 10, axis=0), inst.M.entries])
    q = find_one_facet(X, 0, _exact_cfg(W))
    assert q.dim == 1


def test_interior_center_grows_to_r():
    W, inst = _facet_instance()
    X = inst.M.entries
    interior = np.flatnonzero(inst.labels == 0)
    c = interior[np.argmax(inst.A[interior].min(axis=1))]
    q, trace = find_one_facet(X, int(c), _exact_cfg(W), trace=True)
    assert q.dim == 5
    assert list(trace.dims) == sorted(trace.dims)


def test_find_one_facet_bad_center():
    W, inst = _facet_instance()
    with pytest.raises(IndexError):
        find_one_facet(inst.M.entries, 10_000, _exact_cfg(W))


def test_count_near_points_cases(rng):
    B = orthonormalize(rng.standard_normal((6, 2)))
    X = (B.basis @ rng.standard_normal((2, 30))).T
    assert count_near_points(X, B, 1e-9)[0] == 30
    P = np.eye(6)[:3]
    q = Subspace(np.eye(6)[:, 3:])
    assert count_near_points(P, q, 0.5)[0] == 0
    with pytest.raises(ValueError):
        count_near_points(P, q, -1.0)


def test_count_near_points_planted_facet():
    inst = instance(0.0, 0)
    X, red, res, _ = discovery(0.0, 0)
    for li, S in enumerate(inst.facets, start=1):
        span = orthonormalize(red.reduce(inst.W[list(S)]).T)
        cnt, idx = count_near_points(X, span, res.near_radius(span.dim))
        assert cnt >= 100
        assert np.all(inst.labels[idx] == li)


def test_count_near_points_noisy_facet_reaches_n_min():
    # the calibrated radius is one noise standard deviation, so it keeps a
    # majority of the facet rows rather than all of them
    inst = instance(0.01, 0)
    X, red, res, _ = discovery(0.01, 0)
    for li, S in enumerate(inst.facets, start=1):
        span = orthonormalize(red.reduce(inst.W[list(S)]).T)
        cnt, idx = count_near_points(X, span, res.near_radius(span.dim))
        assert cnt >= res.n_min
        assert np.mean(inst.labels[idx] == li) >= 0.9


def _planted_spans(inst, red):
    return [orthonormalize(red.reduce(inst.W[list(S)]).T) for S in inst.facets]


def _match_distances(cands, spans):
    return [min(max(distance(c.subspace, s), distance(s, c.subspace)) for s in spans) for c in cands]


def test_find_all_facets_noise_free():
    inst = instance(0.0, 0)
    X, red, res, cands = discovery(0.0, 0)
    spans = _planted_spans(inst, red)
    assert len(cands) == 5
    assert max(_match_distances(cands, spans)) < 1e-6
    # every planted facet is covered
    assert max(_match_distances([FacetCandidate(s, 0, np.arange(1)) for s in spans], [c.subspace for c in cands])) < 1e-6


def test_find_all_facets_two_percent():
    inst = instance(0.02, 0)
    X, red, res, cands = discovery(0.02, 0)
    assert len(cands) == 5
    bound = res.cfg.h_param * np.sqrt(res.r) * res.eps / (res.alpha * res.gamma)
    d = _match_distances(cands, _planted_spans(inst, red))
    assert max(d) <= bound
    assert max(d) < 0.05


def test_all_interior_gives_nothing():
    rng = np.random.default_rng(3)
    W = draw_robust_W(5, 10, rng)
    inst = generate(GenerativeConfig(W, (), (1.0,), 150, 3))
    X = inst.M.entries
    assert find_all_facets(X, resolve(AlgoConfig.calibrated(), X)) == []


def test_prune_and_merge():
    e = np.eye(4)
    a = FacetCandidate(Subspace(e[:, :2]), 5, np.arange(10))
    b = FacetCandidate(orthonormalize(e[:, :2] + 1e-3 * e[:, 2:4]), 1, np.arange(20))
    c = FacetCandidate(Subspace(e[:, :3]), 0, np.arange(30))
    d = FacetCandidate(Subspace(e[:, 1:4]), 2, np.arange(30))
    out = prune_and_merge([a, b, c, d], 0.1)
    # a and b merge (b has more near points); c contains them and is pruned, d does not
    assert [x.center_index for x in out] == [1, 2]


def test_thread_count(monkeypatch):
    monkeypatch.setenv("FI_THREADS", "3")
    assert thread_count() == 3
    assert thread_count(2) == 2
    monkeypatch.setenv("FI_THREADS", "junk")
    assert thread_count() >= 1


def test_threads_do_not_change_result():
    inst = instance(0.0, 1)
    X = inst.M.entries[::3]
    res = resolve(AlgoConfig.calibrated(), X)
    a = find_all_facets(X, res, threads=1)
    b = find_all_facets(X, res, threads=3)
    assert [c.center_index for c in a] == [c.center_index for c in b]
