from collections import deque

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from relnet.graph import (Embedding, Graph, GraphBuilder, GraphError, bfs_distances,
                          components, distance_matrix, embedding_by_labels, graphical_distance,
                          h_fuzz, largest_component, verify_embedding, weakly_connected)

from conftest import random_connected_graph


def bfs_oracle(n, edges, s):
    adj = {u: [] for u in range(n)}
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    dist = [-1] * n
    dist[s] = 0
    q = deque([s])
    while q:
        u = q.popleft()
        for v in adj[u]:
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                q.append(v)
    return dist


def union_find_count(n, edges):
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        parent[find(a)] = find(b)
    return len({find(u) for u in range(n)})


def fuzz_oracle(g, h):
    d = np.array([bfs_oracle(g.n, g.edges, s) for s in range(g.n)])
    return {(u, v) for u in range(g.n) for v in range(u + 1, g.n) if 1 <= d[u, v] <= h}


edge_lists = st.integers(2, 12).flatmap(
    lambda n: st.tuples(st.just(n), st.lists(
        st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(lambda e: e[0] != e[1]),
        max_size=25)))


def test_path_distances():
    g = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    assert graphical_distance(g, 0, 3) == 3
    assert graphical_distance(g, 2, 2) == 0


def test_unreachable_distance_is_none():
    g = Graph.from_edges(4, [(0, 1), (2, 3)])
    assert graphical_distance(g, 0, 3) is None
    assert bfs_distances(g, 0)[3] == -1
    assert not weakly_connected(g)


def test_direction_ignored_for_connectivity():
    g = Graph.from_edges(3, [(1, 0), (1, 2)])
    assert weakly_connected(g)
    assert graphical_distance(g, 0, 2) == 2


def test_rejects_self_loop_and_range():
    with pytest.raises(GraphError, match="self-loop"):
        Graph.from_edges(3, [(1, 1)])
    with pytest.raises(GraphError, match="out of range"):
        Graph.from_edges(3, [(0, 3)])


def test_degree_bound():
    star = [(0, i) for i in range(1, 6)]
    with pytest.raises(GraphError, match="degree"):
        Graph.from_edges(6, star, max_degree=4)
    assert Graph.from_edges(6, star, max_degree=None).degrees[0] == 5


def test_builder_round_trip():
    b = GraphBuilder()
    a, c = b.add_node("a"), b.add_node("c")
    b.add_edge(a, c)
    g = b.build()
    assert g.n == 2 and g.label_of(1) == "c" and g.node_of("a") == 0


def test_subgraph_keeps_labels():
    g = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)], labels="abcd")
    sub = g.subgraph([1, 2, 3])
    assert sub.labels == ("b", "c", "d")
    assert sub.num_edges == 2


@given(edge_lists)
@settings(max_examples=60, deadline=None)
def test_bfs_matches_oracle(data):
    n, edges = data
    g = Graph.from_edges(n, edges, max_degree=None)
    dm = distance_matrix(g)
    for s in range(n):
        assert bfs_distances(g, s).tolist() == bfs_oracle(n, edges, s)
        assert dm[s].tolist() == bfs_oracle(n, edges, s)


@given(edge_lists)
@settings(max_examples=60, deadline=None)
def test_components_match_union_find(data):
    n, edges = data
    g = Graph.from_edges(n, edges, max_degree=None)
    assert len(np.unique(components(g))) == union_find_count(n, edges)
    assert weakly_connected(g) == (union_find_count(n, edges) == 1)


def test_largest_component():
    g = Graph.from_edges(6, [(0, 1), (2, 3), (3, 4)])
    assert largest_component(g).tolist() == [2, 3, 4]


def test_fuzz_examples():
    path = Graph.from_edges(5, [(i, i + 1) for i in range(4)])
    f = h_fuzz(path, 2)
    assert f.undirected_edge_set() == fuzz_oracle(path, 2)
    assert h_fuzz(path, 1).undirected_edge_set() == path.undirected_edge_set()
    with pytest.raises(GraphError):
        h_fuzz(path, 0)


def test_fuzz_rejects_parallel_edges():
    g = Graph.from_edges(2, [(0, 1), (1, 0)])
    with pytest.raises(GraphError, match="parallel"):
        h_fuzz(g, 2)


def _simple(g):
    edges = sorted(g.undirected_edge_set())
    return Graph.from_edges(g.n, edges, max_degree=None)


@given(st.integers(0, 10_000), st.integers(1, 3), st.integers(1, 3))
@settings(max_examples=30, deadline=None)
def test_fuzz_composition(seed, p, l):
    rng = np.random.default_rng(seed)
    g = _simple(random_connected_graph(rng, 9, 3))
    assert h_fuzz(g, p).undirected_edge_set() == fuzz_oracle(g, p)
    assert h_fuzz(h_fuzz(g, p), l).undirected_edge_set() == h_fuzz(g, p * l).undirected_edge_set()


def test_embedding_verification():
    path = Graph.from_edges(3, [(0, 1), (1, 2)])
    cycle = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
    assert verify_embedding(Embedding(path, cycle, [0, 1, 2]), path, cycle)
    bad = verify_embedding(Embedding(path, cycle, [0, 2, 1]), path, cycle)
    assert not bad and bad.missing_edges == [(0, 1)]
    clash = verify_embedding(Embedding(path, cycle, [0, 1, 0]), path, cycle)
    assert clash.collisions == [[0, 2]]
    assert not verify_embedding(Embedding(path, cycle, [0, 1, 9]), path, cycle)


def test_embedding_compose_and_labels():
    a = Graph.from_edges(2, [(0, 1)], labels=["x", "y"])
    b = Graph.from_edges(3, [(0, 1), (1, 2)], labels=["w", "x", "y"])
    c = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)], labels=["v", "w", "x", "y"])
    ab, bc = embedding_by_labels(a, b), embedding_by_labels(b, c)
    assert ab.compose(bc).mapping.tolist() == [2, 3]
    assert ab.compose(bc).verify()
    with pytest.raises(GraphError, match="missing"):
        embedding_by_labels(c, a)
