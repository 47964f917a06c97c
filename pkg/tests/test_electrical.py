import itertools

import numpy as np
import pytest

from relnet.electrical import (check_kcl, check_ohm, check_rayleigh, check_triangle,
                               current_flow, effective_resistance, effective_resistances,
                               fuzz_sandwich, path_upper_bound)
from relnet.estimator import blue_covariance
from relnet.graph import Embedding, Graph
from relnet.netgen import LatticeSpec, gen_lattice, gen_triangular
from relnet.network import Network

from conftest import random_network, random_spd


def test_single_edge_and_series():
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    net = Network.constant(g, 2.0)
    assert effective_resistance(net, 0, 1)[0, 0] == pytest.approx(2.0)
    assert effective_resistance(net, 0, 2)[0, 0] == pytest.approx(4.0)


def test_matrix_parallel_edges(rng):
    a, b = random_spd(rng, 2), random_spd(rng, 2)
    net = Network(Graph.from_edges(2, [(0, 1), (1, 0)]), np.array([a, b]))
    want = np.linalg.inv(np.linalg.inv(a) + np.linalg.inv(b))
    np.testing.assert_allclose(effective_resistance(net, 0, 1), want, atol=1e-12)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_analogy_with_blue(rng, k):
    net = random_network(rng, 12, k)
    for u, v in [(3, 7), (0, 11), (5, 2)]:
        sigma = blue_covariance(net.with_reference(v), [u])[u]
        np.testing.assert_allclose(effective_resistance(net, u, v), sigma, atol=1e-10)


def test_batch_matches_single(rng):
    net = random_network(rng, 10, 2)
    pairs = [(1, 2), (0, 5), (9, 0), (3, 8)]
    for (u, v), r in zip(pairs, effective_resistances(net, pairs)):
        np.testing.assert_allclose(r, effective_resistance(net, u, v), atol=1e-10)


def test_flow_satisfies_kirchhoff_and_ohm(rng):
    net = random_network(rng, 10, 2)
    flow, pot = current_flow(net, 2, 7)
    ok, worst, _ = check_kcl(flow, net.graph)
    assert ok and worst < 1e-10
    assert check_ohm(net, flow, pot)
    reff = pot.potentials[2] - pot.potentials[7]
    np.testing.assert_allclose(reff, effective_resistance(net, 2, 7), atol=1e-10)


def test_kcl_detects_tampering(rng):
    net = random_network(rng, 6, 1)
    flow, _ = current_flow(net, 1, 4)
    flow.currents[0] += 0.1
    assert not check_kcl(flow, net.graph)[0]


def test_direction_flip_invariance(rng):
    net = random_network(rng, 9, 2)
    g = net.graph
    flipped = Graph(g.n, np.where(np.arange(g.num_edges) % 2, g.heads, g.tails),
                    np.where(np.arange(g.num_edges) % 2, g.tails, g.heads), None, None)
    other = Network(flipped, net.blocks)
    pairs = list(itertools.combinations(range(9), 2))
    for a, b in zip(effective_resistances(net, pairs), effective_resistances(other, pairs)):
        np.testing.assert_allclose(a, b, atol=1e-12)


def test_scalar_resistance_is_a_metric():
    g, _ = gen_triangular(4, 4)
    net = Network.constant(g, 1.0)
    pairs = list(itertools.permutations(range(g.n), 2))
    r = {p: x[0, 0] for p, x in zip(pairs, effective_resistances(net, pairs))}
    for u, v in pairs:
        assert r[u, v] > 0 and r[u, v] == pytest.approx(r[v, u])
    for u, v, w in itertools.permutations(range(g.n), 3):
        assert r[u, w] <= r[u, v] + r[v, w] + 1e-12


def test_triangle_requires_constant(rng):
    with pytest.raises(ValueError, match="same resistance"):
        check_triangle(random_network(rng, 5, 1), [(0, 1, 2)])


def test_rayleigh_subgraph():
    big, _ = gen_lattice(LatticeSpec(2, 3))
    keep = [u for u in range(big.n) if big.labels[u] != (1, 1)]
    small = big.subgraph(keep)
    emb = Embedding(small, big, np.array(keep))
    pairs = [(0, small.n - 1), (3, 20)]
    rep = check_rayleigh(Network.constant(small, 1.0), Network.constant(big, 1.0), emb, pairs)
    assert rep.ok and rep.worst_slack >= -1e-10


def test_rayleigh_precondition_failures(rng):
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    big = Network.constant(Graph.from_edges(4, [(0, 1), (1, 2), (0, 2), (2, 3)]), 1.0)
    rep = check_rayleigh(Network.constant(g, 1.0), big, Embedding(g, big.graph, [0, 1, 3]),
                         [(0, 2)])
    assert not rep.ok and rep.extra["precondition"] == "embedding"
    rep = check_rayleigh(Network.constant(g, 0.5), big, Embedding(g, big.graph, [0, 1, 2]),
                         [(0, 2)])
    assert not rep.ok and rep.extra["precondition"] == "dominance"


def test_fuzz_sandwich_h1_exact():
    g, _ = gen_lattice(LatticeSpec(2, 3))
    alpha, rep = fuzz_sandwich(Network.constant(g, np.eye(2)), 1, [(0, 10), (5, 40)])
    assert alpha == 1.0 and rep.ok


def test_fuzz_sandwich_lower_bound():
    g, _ = gen_lattice(LatticeSpec(2, 4))
    alpha, rep = fuzz_sandwich(Network.constant(g, 1.0), 3, [(0, 80), (10, 40), (7, 8)])
    assert rep.ok and 0 < alpha < 1


def test_path_upper_bound():
    one = Network.constant(Graph.from_edges(2, [(0, 1)]), 1.0)
    assert path_upper_bound(one, 0, 1)[0, 0] == 1.0
    assert effective_resistance(one, 0, 1)[0, 0] == pytest.approx(1.0)
    tri = Network.constant(Graph.from_edges(3, [(0, 1), (1, 2), (2, 0)]), 1.0)
    assert path_upper_bound(tri, 0, 1)[0, 0] == 1.0
    assert effective_resistance(tri, 0, 1)[0, 0] == pytest.approx(2 / 3)
    g, _ = gen_lattice(LatticeSpec(2, 8))
    net = Network.constant(g, 1.0)
    far = path_upper_bound(net, 0, g.n - 1)[0, 0]
    assert effective_resistance(net, 0, g.n - 1)[0, 0] < far / 5
