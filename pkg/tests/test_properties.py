import dataclasses

import numpy as np
import pytest
from hypothesis import HealthCheck, assume, given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from localeig import (DegenerateSpectrum, Graph, SquareMatrix, analyze, build_adjacency, build_v,
                      decompose, eigengaps, eigenvector_centrality, induced_subgraph, laplacian,
                      mad_normalize, normalized_laplacian, pagerank, planted_partition, rescale)
from localeig.compare import distance

import oracles

PROFILE = settings(max_examples=150, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@st.composite
def graph_matrices(draw, max_n=12, directed=None):
    n = draw(st.integers(2, max_n))
    mask = draw(arrays(bool, (n, n)))
    weights = draw(st.one_of(st.just(np.ones((n, n))),
                             arrays(float, (n, n), elements=st.floats(0.1, 5.0))))
    a = np.where(mask, weights, 0.0)
    np.fill_diagonal(a, 0)
    if not (draw(st.booleans()) if directed is None else directed):
        a = np.triu(a) + np.triu(a).T
    return a


def run(a, **kw):
    try:
        return analyze(SquareMatrix(a), **kw).centrality
    except DegenerateSpectrum as exc:
        return exc.centrality


@PROFILE
@given(graph_matrices())
def test_gaps_nonnegative_and_residuals(a):
    s = decompose(a)
    assert np.all(eigengaps(s).gaps >= 0)
    assert s.residuals.max() <= 1e-8


@PROFILE
@given(graph_matrices(), st.integers(1, 12))
def test_squared_norms_count_live_columns(a, k):
    k = min(k, a.shape[0])
    r = analyze(SquareMatrix(a), k=k)
    live = int(np.sum(np.linalg.norm(r.v.columns, axis=0) > 0))
    assert np.sum(np.asarray(r.centrality.values) ** 2) == pytest.approx(live, abs=1e-10)


@PROFILE
@given(graph_matrices(), st.randoms(use_true_random=False))
def test_permutation_equivariance(a, rnd):
    perm = np.array(rnd.sample(range(a.shape[0]), a.shape[0]))
    c = run(a)
    cp = run(a[np.ix_(perm, perm)])
    assert cp.k_used == c.k_used
    np.testing.assert_allclose(cp.values, np.asarray(c.values)[perm], atol=1e-8)


@PROFILE
@given(graph_matrices(), st.data())
def test_sign_flip_invariance(a, data):
    s = decompose(a)
    signs = np.array(data.draw(st.lists(st.sampled_from([-1.0, 1.0]), min_size=s.size, max_size=s.size)))
    flipped = dataclasses.replace(s, eigenvectors=s.eigenvectors * signs)
    k = data.draw(st.integers(1, s.size))
    v1, v2 = build_v(s, k), build_v(flipped, k)
    np.testing.assert_allclose(np.linalg.norm(v1.columns, axis=1), np.linalg.norm(v2.columns, axis=1),
                               atol=1e-12)


@PROFILE
@given(graph_matrices(), st.floats(1e-3, 1e3))
def test_uniform_scaling_invariance(a, alpha):
    c, cs = run(a), run(alpha * a)
    assert cs.k_used == c.k_used
    np.testing.assert_allclose(cs.values, c.values, atol=1e-8)


@settings(max_examples=60, deadline=None)
@given(graph_matrices(max_n=6))
def test_characteristic_polynomial_oracle(a):
    s = decompose(a)
    assert oracles.match_error(oracles.charpoly_roots(a), s.eigenvalues) <= 1e-8


@PROFILE
@given(graph_matrices(), st.floats(0.0, 0.99))
def test_pagerank_distribution(a, damping):
    pr = np.asarray(pagerank(SquareMatrix(a), damping).values)
    assert abs(pr.sum() - 1) <= 1e-12
    assert pr.min() >= (1 - damping) / a.shape[0] - 1e-12


@PROFILE
@given(graph_matrices(directed=False))
def test_undamped_pagerank_degree_proportional(a):
    lap = np.diag(a.sum(axis=1)) - a
    connected = a.shape[0] - np.sum(np.linalg.eigvalsh(lap) < 1e-9) == a.shape[0] - 1
    assume(connected)
    pr = np.asarray(pagerank(SquareMatrix(a), 1.0).values)
    np.testing.assert_allclose(pr, a.sum(axis=1) / a.sum(), atol=1e-8)


vectors = arrays(float, st.integers(2, 30), elements=st.floats(1e-6, 1e3))


@PROFILE
@given(vectors, st.floats(0.01, 3.0))
def test_rescale_preserves_order(x, p):
    y = rescale(x, p)
    assert y.sum() == pytest.approx(1.0, abs=1e-12)
    order = np.argsort(x, kind="stable")
    assert np.all(np.diff(y[order]) >= 0)


pairs = st.integers(2, 30).flatmap(
    lambda n: st.tuples(*[arrays(float, n, elements=st.floats(1e-6, 1e3))] * 2))


@PROFILE
@given(pairs)
def test_distance_symmetric_and_shift_invariant(pair):
    x, y = pair
    assert distance(x, y) == pytest.approx(distance(y, x))
    # adding 7 rounds every entry at ulp(7); dividing by the MAD amplifies that
    nx = mad_normalize(x)
    bound = 64 * np.finfo(float).eps * (7.0 + np.abs(x).max()) / max(nx.scale, 1e-300)
    bound *= 1 + np.linalg.norm(nx.values)
    assert distance(x + 7.0, y) == pytest.approx(distance(x, y), rel=1e-9, abs=bound)


@PROFILE
@given(vectors, st.floats(0.1, 100))
def test_mad_scale_invariant(x, alpha):
    r, rs = mad_normalize(x), mad_normalize(alpha * x)
    np.testing.assert_allclose(rs.values, r.values, rtol=1e-9, atol=1e-9)


@PROFILE
@given(vectors, st.floats(0.05, 3.0), st.integers(-30, 30), st.floats(1e-3, 1e3))
def test_rescale_scale_invariant(x, p, exponent, alpha):
    np.testing.assert_array_equal(rescale(2.0 ** exponent * x, p), rescale(x, p))
    np.testing.assert_allclose(rescale(alpha * x, p), rescale(x, p), rtol=1e-12, atol=0)


@PROFILE
@given(graph_matrices(max_n=15))
def test_auto_k_one_reduces_to_eigenvector_centrality(a):
    m = SquareMatrix(a)
    try:
        c = analyze(m).centrality
    except DegenerateSpectrum:
        return
    assume(c.k_used == 1)
    np.testing.assert_allclose(c.values, eigenvector_centrality(m).values, atol=1e-10)


@PROFILE
@given(graph_matrices(directed=False))
def test_graph_matrices_invariants(a):
    n = a.shape[0]
    ids = [f"v{i:02d}" for i in range(n)]
    g = Graph.from_edges([(ids[i], ids[j], a[i, j]) for i in range(n) for j in range(i + 1, n) if a[i, j]],
                         node_ids=ids)
    adj = build_adjacency(g).entries
    np.testing.assert_array_equal(adj, adj.T)
    np.testing.assert_array_equal(adj, a)
    lap = laplacian(SquareMatrix(adj)).entries
    assert np.all(np.abs(lap.sum(axis=1)) <= 1e-10 * max(np.abs(lap).max(), 1e-300))
    w = np.linalg.eigvalsh(normalized_laplacian(SquareMatrix(adj)).entries)
    assert w.max() <= 2 + 1e-8
    lap_w = np.linalg.eigvalsh(lap)
    if np.sum(lap_w < 1e-9 * max(1.0, adj.sum())) == 1:
        assert abs(w.min()) <= 1e-8


@PROFILE
@given(st.integers(1, 4), st.integers(1, 6), st.floats(0, 1), st.data())
def test_induced_subgraph_exact(c, m, p_in, data):
    p_out = data.draw(st.floats(0, p_in))
    g = planted_partition(c, m, p_in, p_out, seed=data.draw(st.integers(0, 2 ** 32 - 1)))
    for label in sorted(set(g.communities.values())):
        sub = induced_subgraph(g, label)
        assert set(sub.node_ids) == {v for v, lab in g.communities.items() if lab == label}
        assert all(sub.communities[sub.node_ids[i]] == sub.communities[sub.node_ids[j]] == label
                   for i, j, _ in sub.edges)
