import math

import numpy as np
import pytest

from relnet.drawing import Drawing
from relnet.geometry import (NotDenseError, Region, classify, dense_embed, distance_ratio,
                             drawing_params, worked_example, incompatibility_demo, affine_distance_constants,
                             max_uncovered_diameter, r_lower_bound, sparse_embed)
from relnet.graph import distance_matrix, h_fuzz, verify_embedding
from relnet.netgen import (FailureSpec, LatticeSpec, gen_failed_lattice, gen_geometric,
                           gen_lattice, gen_regular_tree, gen_triangular, jittered_points,
                           tree_drawing)


def test_worked_example_parameters():
    g, f, region = worked_example()
    p = drawing_params(g, f, cutoffs=(1,), region=region)
    assert p.s == 1.0
    assert p.r == pytest.approx(math.sqrt(10), abs=1e-12)
    assert p.gamma == pytest.approx(2.0, abs=1e-12)
    assert p.rho[1] == pytest.approx(0.2, abs=1e-12)


def test_lattice_parameters():
    g, f = gen_lattice(LatticeSpec(2, 6))
    p = drawing_params(g, f, cutoffs=(1, 4))
    assert p.s == 1 and p.r == 1
    assert p.gamma == pytest.approx(math.sqrt(2))
    assert p.rho[4] == pytest.approx(1 / math.sqrt(2))


def test_gamma_1d_exact():
    f = Drawing(np.array([0.0, 1.0, 4.0, 5.0]))
    gamma, _ = max_uncovered_diameter(f)
    assert gamma == pytest.approx(3.0)


def test_gamma_2d_against_grid_oracle():
    rng = np.random.default_rng(8)
    pts = rng.uniform(0, 5, size=(25, 2))
    region = Region(np.zeros(2), np.full(2, 5.0))
    gamma, _ = max_uncovered_diameter(Drawing(pts), region)
    xs = np.linspace(0, 5, 801)
    grid = np.stack(np.meshgrid(xs, xs), -1).reshape(-1, 2)
    brute = 2 * np.min(np.linalg.norm(grid[:, None] - pts[None], axis=-1), axis=1).max()
    step = 5 / 800
    assert brute - 1e-12 <= gamma <= brute + 2 * step * math.sqrt(2)


def test_gamma_3d_bracket_contains_cube_centre():
    g, f = gen_lattice(LatticeSpec(3, 3))
    _, (lo, hi) = max_uncovered_diameter(f, Region(np.full(3, -2.0), np.full(3, 2.0)))
    assert lo <= math.sqrt(3) + 1e-12 <= hi


def test_distance_ratio_monotone_and_oracle():
    g, f = gen_geometric(jittered_points(6, 2, 0.3, seed=2), 1.6)
    dg = distance_matrix(g)
    rho = distance_ratio(g, f, [1, 2, 3, 5, 7])
    vals = [rho[n] for n in sorted(rho)]
    assert all(a <= b + 1e-15 for a, b in zip(vals, vals[1:]))
    d = np.linalg.norm(f.coords[:, None] - f.coords[None], axis=-1)
    mask = dg >= 3
    np.fill_diagonal(mask, False)
    assert rho[3] == pytest.approx((d[mask] / dg[mask]).min())


def test_affine_distance_constants_cover_all_pairs():
    g, f = gen_triangular(5, 5)
    dg = distance_matrix(g)
    d = np.linalg.norm(f.coords[:, None] - f.coords[None], axis=-1)
    a, b = affine_distance_constants(g, f, "graphical")
    assert np.all(dg <= a * d + b + 1e-9)
    a2, _ = affine_distance_constants(g, f, "euclidean")
    assert np.all(d <= a2 * dg + 1e-9) and a2 == pytest.approx(1.0)
    with pytest.raises(ValueError):
        affine_distance_constants(g, f, "sideways")


def test_classify_lattice_and_tree():
    g, f = gen_lattice(LatticeSpec(2, 6))
    c = classify(g, f, cutoffs=(1, 4))
    assert c.dense_evidence and c.sparse_evidence
    t, tf = gen_regular_tree(2, 6), tree_drawing(2, 6)
    ct = classify(t, tf, cutoffs=(1, 6))
    assert not ct.dense_evidence


def _eq4_pairs(g, f, emb):
    # d_Z(eta u, eta v) >= sqrt(d)(d_f/s - 2) for every pair
    cells = emb.cells
    dz = np.abs(cells[:, None] - cells[None]).sum(-1)
    df = np.linalg.norm(f.coords[:, None] - f.coords[None], axis=-1)
    return np.all(dz >= math.sqrt(f.dim) * (df / emb.s - 2) - 1e-9)


@pytest.mark.parametrize("family", ["lattice", "tri", "failed"])
def test_sparse_embedding(family):
    if family == "lattice":
        g, f = gen_lattice(LatticeSpec(2, 6))
    elif family == "tri":
        g, f = gen_triangular(9, 9)
    else:
        out = gen_failed_lattice(8, FailureSpec(0.04, 5), seed=3)
        g, f = out.graph, out.drawing
    se = sparse_embed(g, f)
    assert se.embedding.verify()
    assert se.distance_check and _eq4_pairs(g, f, se)


@pytest.mark.parametrize("family", ["lattice", "tri", "failed"])
def test_dense_embedding(family):
    if family == "lattice":
        g, f = gen_lattice(LatticeSpec(2, 6))
    elif family == "tri":
        g, f = gen_triangular(11, 11)
    else:
        out = gen_failed_lattice(8, FailureSpec(0.04, 5), seed=3)
        g, f = out.graph, out.drawing
    cert = dense_embed(g, f)
    assert cert.ok, cert.notes
    fuzz = h_fuzz(g, cert.h)
    from relnet.graph import Embedding
    assert verify_embedding(Embedding(cert.lattice, fuzz, cert.eta), cert.lattice, fuzz)
    dg = distance_matrix(g)
    assert dg[np.arange(g.n), cert.eta[cert.xi]].max() <= cert.c


def test_dense_embedding_detects_hole():
    g, f = gen_lattice(LatticeSpec(2, 4))
    keep = [u for u in range(g.n) if max(abs(x) for x in g.labels[u]) > 1]
    sub, sf = g.subgraph(keep), f.subset(keep)
    with pytest.raises(NotDenseError):
        dense_embed(sub, sf, gamma=1.0)


def test_incompatibility_demo():
    rep = incompatibility_demo(2, 1)
    bounds = [row[3] for row in rep.rows]
    assert rep.obstruction and bounds == sorted(bounds) and bounds[-1] > bounds[0] * 5
    flat = [row[3] for row in incompatibility_demo(2, 2).rows]
    assert max(flat) < 2
    assert r_lower_bound(2, 1, 10) == pytest.approx(11.0)


from hypothesis import given, settings, strategies as st  # noqa: E402


@given(st.integers(0, 10_000), st.floats(1.2, 2.5))
@settings(max_examples=25, deadline=None)
def test_sparse_embed_always_verifies(seed, radius):
    g, f = gen_geometric(jittered_points(6, 2, 0.35, seed=seed), radius)
    se = sparse_embed(g, f)
    assert se.embedding.verify() and se.distance_check


def test_sparse_embed_simple_cases():
    g, f = gen_lattice(LatticeSpec(1, 6))
    assert sparse_embed(g, f).h == 1
    g4, f4, _ = worked_example()
    se = sparse_embed(g4, f4)
    assert se.embedding.verify() and _eq4_pairs(g4, f4, se)
    with pytest.raises(ValueError, match="civilized"):
        sparse_embed(g4, Drawing(np.zeros((g4.n, 2))))


def test_geometric_graph_dense_evidence():
    g, f = gen_geometric(jittered_points(12, 2, 0.3, seed=1), 1.8)
    assert classify(g, f, cutoffs=(1, 5, 10)).dense_evidence


def test_tree_distance_ratio_decays_with_depth():
    # neighbouring leaves are one unit apart but 2 * depth hops apart
    rho = [distance_ratio(gen_regular_tree(2, depth), tree_drawing(2, depth), [1])[1]
           for depth in (4, 6, 8, 10)]
    np.testing.assert_allclose(rho, [1 / 8, 1 / 12, 1 / 16, 1 / 20])


def test_dense_certificate_resistance_chain():
    # R(u, o) in the h-fuzz is at most the two closeness legs plus the lattice term
    from relnet.electrical import effective_resistances
    from relnet.network import Network
    out = gen_failed_lattice(6, FailureSpec(0.04, 5), seed=4)
    g, f = out.graph, out.drawing
    cert = dense_embed(g, f)
    fuzz = Network.constant(h_fuzz(g, cert.h), 1.0)
    lat = Network.constant(cert.lattice, 1.0)
    legs = 2 * math.ceil(cert.c / cert.h)
    rng = np.random.default_rng(0)
    pairs = [tuple(int(x) for x in rng.choice(g.n, 2, replace=False)) for _ in range(30)]
    r_fuzz = effective_resistances(fuzz, pairs)
    lat_pairs = [(int(cert.xi[u]), int(cert.xi[o])) for u, o in pairs]
    r_lat = [0.0 if a == b else r[0, 0]
             for (a, b), r in zip(lat_pairs, effective_resistances(
                 lat, [(a, b) if a != b else (0, 1) for a, b in lat_pairs]))]
    for rf, rl in zip(r_fuzz, r_lat):
        assert rf[0, 0] <= legs + rl + 1e-10


def test_dense_embed_refuses_marginal_ratio():
    t, tf = gen_regular_tree(2, 6), tree_drawing(2, 6)
    with pytest.raises(ValueError, match="distance ratio"):
        dense_embed(t, tf, gamma=1.0)
