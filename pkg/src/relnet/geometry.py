"""Drawing parameters, denseness/sparseness evidence and lattice embeddings.

All quantities are evaluated on finite graphs. The asymptotic distance ratio
is a limit over ever larger graphical distances, so it is only reported at
user-chosen cutoffs; classification results are evidence about a family of
growing boxes, never a proof about an infinite graph.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.spatial import QhullError, Voronoi, cKDTree

from .drawing import Drawing
from .graph import Embedding, Graph, distance_matrix, h_fuzz, verify_embedding
from .netgen import lattice_box


@dataclass(frozen=True)
class Region:
    """Axis-aligned box of admissible centres for empty balls."""

    lo: np.ndarray
    hi: np.ndarray

    def contains(self, pts, tol=1e-9) -> np.ndarray:
        pts = np.atleast_2d(pts)
        return np.all((pts >= self.lo - tol) & (pts <= self.hi + tol), axis=1)


def default_region(f: Drawing, shrink: float = 0.0) -> Region:
    lo, hi = f.bounding_box
    lo, hi = lo + shrink, hi - shrink
    if np.any(hi < lo):
        mid = 0.5 * (lo + hi)
        lo = hi = mid
    return Region(lo, hi)


@dataclass
class DrawingParams:
    s: float
    r: float
    gamma: float
    gamma_bracket: tuple[float, float]
    rho: dict[int, float]
    alpha: float | None = None
    beta: float | None = None
    region: Region | None = None

    def to_dict(self) -> dict:
        return {"s": self.s, "r": self.r, "gamma": self.gamma,
                "gamma_bracket": list(self.gamma_bracket),
                "rho": {str(k): v for k, v in self.rho.items()},
                "alpha": self.alpha, "beta": self.beta}


def min_node_distance(f: Drawing) -> float:
    if f.n < 2:
        return math.inf
    d, _ = cKDTree(f.coords).query(f.coords, k=2)
    return float(d[:, 1].min())


def max_connected_range(g: Graph, f: Drawing) -> float:
    if not g.num_edges:
        return 0.0
    return float(np.linalg.norm(f.coords[g.tails] - f.coords[g.heads], axis=1).max())


def _nearest(tree: cKDTree, pts) -> np.ndarray:
    return tree.query(np.atleast_2d(pts))[0]


def _largest_empty_1d(x: np.ndarray, region: Region) -> float:
    lo, hi = float(region.lo[0]), float(region.hi[0])
    pts = np.sort(x)
    cands = [lo, hi]
    mids = 0.5 * (pts[1:] + pts[:-1])
    cands += mids[(mids >= lo) & (mids <= hi)].tolist()
    tree = cKDTree(pts[:, None])
    return float(_nearest(tree, np.array(cands)[:, None]).max())


def _largest_empty_2d(pts: np.ndarray, region: Region) -> float:
    """Exact largest empty circle with centre in a box.

    The optimum sits at a Voronoi vertex inside the box, at a crossing of a
    Voronoi edge (a bisector of two neighbouring sites) with the box boundary,
    or at a box corner. Every candidate is scored exactly by its nearest site.
    """
    tree = cKDTree(pts)
    lo, hi = region.lo, region.hi
    cands = [np.array(c, dtype=float) for c in itertools.product(*zip(lo, hi))]
    ridge_pairs = np.zeros((0, 2), dtype=int)
    if len(pts) >= 3:
        try:
            vor = Voronoi(pts)
            verts = vor.vertices[region.contains(vor.vertices)]
            cands += list(verts)
            ridge_pairs = vor.ridge_points
        except QhullError:
            ridge_pairs = np.array(list(itertools.combinations(range(len(pts)), 2)))
    elif len(pts) == 2:
        ridge_pairs = np.array([[0, 1]])
    for axis in (0, 1):
        other = 1 - axis
        for value in (lo[axis], hi[axis]):
            # bisector of p, q meets the line x[axis] = value where
            # (q - p) . x = (|q|^2 - |p|^2) / 2
            p, q = pts[ridge_pairs[:, 0]], pts[ridge_pairs[:, 1]]
            n = q - p
            c = 0.5 * (np.sum(q * q, axis=1) - np.sum(p * p, axis=1))
            ok = np.abs(n[:, other]) > 1e-15
            t = (c[ok] - n[ok, axis] * value) / n[ok, other]
            t = t[(t >= lo[other]) & (t <= hi[other])]
            line = np.empty((t.size, 2))
            line[:, axis] = value
            line[:, other] = t
            cands += list(line)
    cands = np.array(cands)
    return float(_nearest(tree, cands).max())


def _largest_empty_grid(pts: np.ndarray, region: Region, resolution: float) -> tuple[float, float]:
    """Grid scan of centres; returns a bracket on the largest empty radius."""
    tree = cKDTree(pts)
    axes = [np.arange(a, b + resolution * 0.5, resolution) if b > a else np.array([a])
            for a, b in zip(region.lo, region.hi)]
    axes = [np.clip(ax, a, b) for ax, a, b in zip(axes, region.lo, region.hi)]
    best = 0.0
    for chunk in _grid_chunks(axes):
        best = max(best, float(_nearest(tree, chunk).max()))
    # any centre lies within half a cell diagonal of a grid point
    pad = 0.5 * resolution * math.sqrt(len(axes))
    return best, best + pad


def _grid_chunks(axes, size=200_000):
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(axes))
    for i in range(0, len(mesh), size):
        yield mesh[i:i + size]


def max_uncovered_diameter(f: Drawing, region: Region | None = None,
                           resolution: float | None = None) -> tuple[float, tuple[float, float]]:
    """Diameter of the largest ball centred in ``region`` containing no node.

    Exact in 1D and 2D; in 3D a grid scan returns the value at the grid and a
    bracket [low, high]. The default region is the bounding box.
    """
    region = region or default_region(f)
    pts = f.coords
    if f.dim == 1:
        g = 2 * _largest_empty_1d(pts[:, 0], region)
        return g, (g, g)
    if f.dim == 2:
        g = 2 * _largest_empty_2d(pts, region)
        return g, (g, g)
    res = resolution or min_node_distance(f) / 4
    lo, hi = _largest_empty_grid(pts, region, res)
    return 2 * lo, (2 * lo, 2 * hi)


def distance_ratio(g: Graph, f: Drawing, cutoffs: Sequence[int], dg=None) -> dict[int, float]:
    """rho_hat(n) = min of d_f / d_G over pairs with d_G >= n (inf if no such pair)."""
    dg = distance_matrix(g) if dg is None else dg
    iu = np.triu_indices(g.n, k=1)
    hops = dg[iu]
    ok = hops > 0
    hops = hops[ok]
    c = f.coords
    eu = np.linalg.norm(c[iu[0][ok]] - c[iu[1][ok]], axis=1)
    ratio = eu / hops
    order = np.argsort(hops)
    hops, ratio = hops[order], ratio[order]
    # suffix minimum over pairs sorted by hop count
    suffix = np.minimum.accumulate(ratio[::-1])[::-1]
    out = {}
    for n in cutoffs:
        i = np.searchsorted(hops, n)
        out[int(n)] = float(suffix[i]) if i < len(hops) else math.inf
    return out


def drawing_params(g: Graph, f: Drawing, cutoffs: Sequence[int] = (1,),
                   region: Region | None = None, resolution=None) -> DrawingParams:
    """Minimum node distance, maximum connected range, uncovered diameter and rho_hat.

    The default region for the uncovered diameter is the bounding box shrunk
    by the maximum connected range, which keeps boundary gaps of a finite box
    from dominating.
    """
    if g.n == 0:
        raise ValueError("empty graph")
    s = min_node_distance(f)
    r = max_connected_range(g, f)
    region = region or default_region(f, shrink=r)
    gamma, bracket = max_uncovered_diameter(f, region, resolution)
    dg = distance_matrix(g)
    rho = distance_ratio(g, f, cutoffs, dg)
    alpha, beta = affine_distance_constants(g, f, "graphical", dg=dg)
    return DrawingParams(s, r, gamma, bracket, rho, alpha, beta, region)


def affine_distance_constants(g: Graph, f: Drawing, direction: str = "graphical",
                     beta: float = 0.0, dg=None) -> tuple[float, float]:
    """Smallest slope alpha for a fixed intercept beta over all connected pairs.

    ``direction="graphical"``: d_G <= alpha d_f + beta.
    ``direction="euclidean"``: d_f <= alpha d_G + beta.
    Returns (inf, beta) if no finite slope works (coincident nodes).
    """
    dg = distance_matrix(g) if dg is None else dg
    iu = np.triu_indices(g.n, k=1)
    hops = dg[iu].astype(float)
    ok = hops > 0
    eu = np.linalg.norm(f.coords[iu[0][ok]] - f.coords[iu[1][ok]], axis=1)
    hops = hops[ok]
    if direction == "graphical":
        x, y = eu, hops
    elif direction == "euclidean":
        x, y = hops, eu
    else:
        raise ValueError("direction must be 'graphical' or 'euclidean'")
    need = y - beta
    if np.any((x == 0) & (need > 0)):
        return math.inf, beta
    pos = x > 0
    alpha = float(np.max(need[pos] / x[pos], initial=0.0))
    return alpha, beta


@dataclass(frozen=True)
class Thresholds:
    gamma_max: float = 10.0
    rho_min: float = 0.1
    s_min: float = 1e-9
    r_max: float = 10.0


@dataclass
class Classification:
    dense_evidence: bool
    sparse_evidence: bool
    params: DrawingParams
    note: str = "finite-sample evidence about the drawn box, not a proof"

    def to_dict(self) -> dict:
        return {"dense_evidence": self.dense_evidence,
                "sparse_evidence": self.sparse_evidence,
                "params": self.params.to_dict(), "note": self.note}


def classify(g: Graph, f: Drawing, cutoffs: Sequence[int] = (1,),
             thresholds: Thresholds = Thresholds(), region=None) -> Classification:
    """Dense evidence: small uncovered diameter and rho_hat at the largest cutoff
    above threshold. Sparse evidence: positive spacing and bounded edge length."""
    p = drawing_params(g, f, cutoffs, region)
    rho_last = p.rho[max(p.rho)]
    dense = p.gamma <= thresholds.gamma_max and rho_last >= thresholds.rho_min
    sparse = p.s >= thresholds.s_min and p.r <= thresholds.r_max
    return Classification(bool(dense), bool(sparse), p)


# -- sparse embedding -------------------------------------------------------

@dataclass
class SparseEmbedding:
    h: int
    embedding: Embedding          # G -> h-fuzz of a lattice box
    cells: np.ndarray             # lattice coordinates of each node
    s: float
    distance_check: bool          # d_Z(eta u, eta v) >= sqrt(d) (d_f/s - 2) on all pairs
    worst_margin: float


def sparse_embed(g: Graph, f: Drawing, check_pairs: bool = True) -> SparseEmbedding:
    """Map each node to the half-open lattice cell of side s/sqrt(d) holding it.

    Cells of that side have diameter s, so distinct nodes land in distinct
    cells. The fuzz h is the largest l1 cell offset across an edge.
    """
    d = f.dim
    s = min_node_distance(f)
    if not s > 0:
        raise ValueError("drawing is not civilized: minimum node distance is 0")
    side = s / math.sqrt(d)
    cells = np.floor(f.coords / side).astype(np.int64)
    if len(np.unique(cells, axis=0)) != g.n:
        raise AssertionError("two nodes share a lattice cell")
    if g.num_edges:
        h = int(np.abs(cells[g.tails] - cells[g.heads]).sum(axis=1).max())
    else:
        h = 1
    h = max(h, 1)
    lo, hi = cells.min(axis=0), cells.max(axis=0)
    box, _ = lattice_box(lo, hi, fuzz=h)
    index = box.label_index
    emb = Embedding(g, box, np.array([index[tuple(c)] for c in cells.tolist()]))
    ok, margin = True, math.inf
    if check_pairs and g.n > 1:
        iu = np.triu_indices(g.n, k=1)
        dz = np.abs(cells[iu[0]] - cells[iu[1]]).sum(axis=1)
        df = np.linalg.norm(f.coords[iu[0]] - f.coords[iu[1]], axis=1)
        rhs = math.sqrt(d) * (df / s - 2)
        margin = float((dz - rhs).min())
        ok = bool(np.all(dz >= rhs))
    return SparseEmbedding(h, emb, cells, s, ok, margin)


# -- dense embedding --------------------------------------------------------

class NotDenseError(ValueError):
    def __init__(self, lattice_point, centre):
        self.lattice_point, self.centre = lattice_point, centre
        super().__init__(f"no node inside the ball around lattice point {lattice_point} "
                         f"(centre {centre})")


@dataclass
class DenseEmbeddingCertificate:
    h: int
    c: int
    gamma: float
    alpha: float
    beta: float
    lattice: Graph                      # lattice box, labelled by integer coordinates
    eta: np.ndarray                     # lattice node -> graph node
    xi: np.ndarray                      # graph node -> lattice node
    measured_c: int                     # max_u d_G(u, eta(xi(u)))
    embedding_ok: bool
    closeness_ok: bool
    distance_check: bool                # d_Z(xi u, xi v) <= 4d + sqrt(d)/gamma d_f(u, v)
    worst_margin: float
    notes: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.embedding_ok and self.closeness_ok and self.distance_check


def dense_embed(g: Graph, f: Drawing, gamma: float | None = None,
                region: Region | None = None, dg=None,
                rho_min: float = 0.1) -> DenseEmbeddingCertificate:
    """Embed a lattice box into a fuzz of ``g`` following the ball construction.

    The drawing is scaled by 1/gamma so that every ball of unit diameter
    centred in the region holds a node. Each lattice point whose scaled
    centre lies in the region is assigned a node from its ball (closest to
    the centre, then smallest id); every node is assigned its nearest lattice
    point. Balls are treated as closed, and a node equidistant from two
    centres goes to the first lattice point in lexicographic order.

    Certification is refused (ValueError) when the distance ratio over all
    pairs, 1/alpha, is below ``rho_min``.
    """
    d = f.dim
    region = region or default_region(f)
    if gamma is None:
        gamma, _ = max_uncovered_diameter(f, region)
    if not (gamma > 0 and math.isfinite(gamma)):
        raise ValueError(f"uncovered diameter must be positive and finite, got {gamma}")
    dg = distance_matrix(g) if dg is None else dg
    if np.any(dg < 0):
        raise ValueError("graph must be connected")
    alpha, beta = affine_distance_constants(g, f, "graphical", dg=dg)
    if not alpha * rho_min <= 1:
        raise ValueError(f"distance ratio 1/alpha = {1 / alpha:.3g} is below {rho_min:g}; "
                         "not certifying a dense embedding")
    scaled = f.coords / gamma
    lo = np.ceil(region.lo / gamma - 1e-9).astype(np.int64)
    hi = np.floor(region.hi / gamma + 1e-9).astype(np.int64)
    lattice, lat_draw = lattice_box(lo, hi)
    centres = lat_draw.coords
    tree = cKDTree(scaled)
    eta = np.full(lattice.n, -1, dtype=np.int64)
    used: set[int] = set()
    for z, centre in enumerate(centres):
        cand = tree.query_ball_point(centre, 0.5 + 1e-12)
        cand = [u for u in cand if u not in used]
        if not cand:
            raise NotDenseError(lattice.labels[z], (centre * gamma).tolist())
        dist = np.linalg.norm(scaled[cand] - centre, axis=1)
        pick = min(zip(dist.tolist(), cand))[1]
        eta[z] = pick
        used.add(pick)
    ltree = cKDTree(centres)
    # nearest lattice point, lexicographic tie-break via index order
    dist, idx = ltree.query(scaled, k=min(2 ** d + 1, lattice.n))
    dist, idx = np.atleast_2d(dist), np.atleast_2d(idx)
    xi = np.empty(g.n, dtype=np.int64)
    for u in range(g.n):
        best = dist[u, 0]
        ties = idx[u][np.abs(dist[u] - best) <= 1e-12]
        xi[u] = ties.min()
    closeness = dg[np.arange(g.n), eta[xi]]
    measured_c = int(closeness.max())
    lat_edges = np.stack([lattice.tails, lattice.heads], axis=1)
    h = int(max(1, dg[eta[lat_edges[:, 0]], eta[lat_edges[:, 1]]].max(initial=1)))
    c = math.ceil(1.5 * alpha * gamma * math.sqrt(d) + beta)
    fuzz = h_fuzz(g, h)
    emb_ok = bool(verify_embedding(Embedding(lattice, fuzz, eta), lattice, fuzz))
    close_ok = bool(measured_c <= c)
    zc = np.array(lattice.labels)[xi]
    iu = np.triu_indices(g.n, k=1)
    dz = np.abs(zc[iu[0]] - zc[iu[1]]).sum(axis=1)
    df = np.linalg.norm(f.coords[iu[0]] - f.coords[iu[1]], axis=1)
    bound = 4 * d + math.sqrt(d) / gamma * df
    margin = float((bound - dz).min()) if dz.size else math.inf
    notes = []
    if not close_ok:
        notes.append(f"measured closeness {measured_c} exceeds c = {c}")
    return DenseEmbeddingCertificate(h, c, gamma, alpha, beta, lattice, eta, xi, measured_c,
                                     emb_ok, close_ok, bool(np.all(dz <= bound)), margin,
                                     notes)


# -- dimension obstruction --------------------------------------------------

@dataclass
class IncompatibilityReport:
    dim: int
    target_dim: int
    spacing: float
    rows: list = field(default_factory=list)  # (m, nodes, diameter, r lower bound)
    obstruction: bool = False

    def to_dict(self) -> dict:
        return {"dim": self.dim, "target_dim": self.target_dim, "spacing": self.spacing,
                "obstruction": self.obstruction,
                "rows": [dict(zip(("m", "nodes", "graph_diameter", "r_lower_bound"), r))
                         for r in self.rows]}


def r_lower_bound(dim: int, target_dim: int, m: int, spacing: float = 1.0) -> float:
    """Edge-length lower bound for any drawing of the box [-m, m]^dim in R^target_dim
    with minimum node spacing ``spacing``.

    N points pairwise ``spacing`` apart span a Euclidean diameter of at least
    spacing * (N^(1/target_dim) - 1) (disjoint balls of radius spacing/2
    packed in a ball), while any two nodes are joined by a path of at most
    2 * dim * m edges, so some edge is at least diameter / (2 dim m) long.
    """
    nodes = (2 * m + 1) ** dim
    span = spacing * (nodes ** (1.0 / target_dim) - 1)
    return span / (2 * dim * m)


def incompatibility_demo(dim: int, target_dim: int, sizes: Sequence[int] = (5, 10, 20, 40),
                         spacing: float = 1.0) -> IncompatibilityReport:
    """Counting demonstration that a dim-lattice has no civilized drawing in fewer dimensions.

    The lower bound on the maximum connected range grows without bound in m
    when target_dim < dim, and stays bounded when target_dim == dim.
    """
    rep = IncompatibilityReport(dim, target_dim, spacing)
    for m in sizes:
        rep.rows.append((m, (2 * m + 1) ** dim, 2 * dim * m,
                         r_lower_bound(dim, target_dim, m, spacing)))
    rep.obstruction = target_dim < dim
    return rep


# -- worked example ---------------------------------------------------------

def worked_example() -> tuple[Graph, Drawing, Region]:
    """Small drawn graph with s = 1, r = sqrt(10), gamma = 2 and rho = 1/5.

    Eleven nodes on the 4 x 3 integer grid with (1, 1) left empty. They are
    joined along the outer ring except between (1, 0) and (2, 0), plus a long
    edge (0, 0) -- (3, 1) and a spur (2, 2) -- (2, 1). The empty grid point
    is the largest hole (diameter 2); p = (2, 0) and q = (2, 1) are one unit
    apart but five hops apart. Returns the graph, its drawing and the
    bounding-box region used for the uncovered diameter.
    """
    pts = [(0, 0), (1, 0), (2, 0), (3, 0),
           (0, 1), (2, 1), (3, 1),
           (0, 2), (1, 2), (2, 2), (3, 2)]
    idx = {p: i for i, p in enumerate(pts)}
    ring = [(2, 0), (3, 0), (3, 1), (3, 2), (2, 2), (1, 2), (0, 2), (0, 1), (0, 0), (1, 0)]
    edges = [(idx[a], idx[b]) for a, b in zip(ring, ring[1:])]
    edges.append((idx[(0, 0)], idx[(3, 1)]))
    edges.append((idx[(2, 2)], idx[(2, 1)]))
    g = Graph.from_edges(len(pts), edges, labels=pts)
    f = Drawing(np.array(pts, dtype=float))
    return g, f, default_region(f)
