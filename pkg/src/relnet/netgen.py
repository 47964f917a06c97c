"""Seeded generators for the graph families used in the experiments."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .drawing import Drawing
from .graph import Graph, distance_matrix, largest_component


@dataclass(frozen=True)
class LatticeSpec:
    dim: int
    half_width: int
    fuzz: int = 1


@dataclass(frozen=True)
class FailureSpec:
    """At most alpha * A + beta failures in any square of area A.

    ``sites`` lists failed lattice points explicitly; when it is None a random
    thinning with per-node failure probability ``rate`` (default ``alpha``) is
    proposed and then repaired until the window bound holds.
    """

    alpha: float
    beta: float
    sites: tuple | None = None
    rate: float | None = None


class FailureBoundError(ValueError):
    def __init__(self, corner, side, count, allowed):
        self.corner, self.side, self.count, self.allowed = corner, side, count, allowed
        super().__init__(
            f"{count} failures in the {side}x{side} square at {corner}; "
            f"at most {allowed:g} allowed")


def _offsets(dim: int, h: int) -> np.ndarray:
    """Lattice offsets with 1 <= l1 norm <= h and positive leading nonzero entry."""
    out = []
    for off in itertools.product(range(-h, h + 1), repeat=dim):
        norm = sum(abs(o) for o in off)
        if 1 <= norm <= h and next(o for o in off if o) > 0:
            out.append(off)
    return np.array(out, dtype=np.int64)


def lattice_box(lo, hi, fuzz: int = 1) -> tuple[Graph, Drawing]:
    """h-fuzz of the square lattice on integer points lo <= x <= hi (per axis).

    Graphical distance in a box equals the l1 distance, so the fuzz joins
    every pair at l1 distance <= ``fuzz``. Nodes are ordered lexicographically
    and labelled by their coordinate tuples.
    """
    lo = np.atleast_1d(np.asarray(lo, dtype=np.int64))
    hi = np.atleast_1d(np.asarray(hi, dtype=np.int64))
    dim = lo.size
    if np.any(hi < lo):
        raise ValueError("empty lattice box")
    shape = tuple((hi - lo + 1).tolist())
    grid = np.indices(shape).reshape(dim, -1).T
    coords = grid + lo
    index = np.arange(len(grid)).reshape(shape)
    tails, heads = [], []
    for off in _offsets(dim, fuzz):
        if any(abs(o) >= s for o, s in zip(off, shape)):
            continue
        src = tuple(slice(max(0, -o), s - max(0, o)) for o, s in zip(off, shape))
        dst = tuple(slice(max(0, o), s - max(0, -o)) for o, s in zip(off, shape))
        tails.append(index[src].ravel())
        heads.append(index[dst].ravel())
    t = np.concatenate(tails) if tails else np.zeros(0, np.int64)
    h = np.concatenate(heads) if heads else np.zeros(0, np.int64)
    order = np.lexsort((h, t))
    labels = tuple(map(tuple, coords.tolist()))
    return Graph(len(coords), t[order], h[order], labels, None), Drawing(coords.astype(float))


def gen_lattice(spec: LatticeSpec) -> tuple[Graph, Drawing]:
    """Box [-m, m]^d of the d-dimensional lattice (or its fuzz) with its natural drawing."""
    if spec.dim not in (1, 2, 3):
        raise ValueError(f"lattice dimension must be 1, 2 or 3, got {spec.dim}")
    if spec.half_width < 1:
        raise ValueError("half-width must be >= 1")
    if spec.fuzz < 1:
        raise ValueError("fuzz must be >= 1")
    m = spec.half_width
    return lattice_box([-m] * spec.dim, [m] * spec.dim, spec.fuzz)


def gen_triangular(rows: int, cols: int) -> tuple[Graph, Drawing]:
    """Triangular lattice patch in axial coordinates (col, row).

    Node (c, r) is drawn at (c + r/2, r * sqrt(3)/2); neighbours are
    (c+1, r), (c, r+1) and (c-1, r+1), all at unit distance.
    """
    if rows < 2 or cols < 2:
        raise ValueError("triangular patch needs at least 2 rows and 2 columns")
    r, c = np.divmod(np.arange(rows * cols), cols)
    index = lambda cc, rr: rr * cols + cc  # noqa: E731
    tails, heads = [], []
    for dc, dr in ((1, 0), (0, 1), (-1, 1)):
        ok = (c + dc >= 0) & (c + dc < cols) & (r + dr < rows)
        tails.append(index(c[ok], r[ok]))
        heads.append(index(c[ok] + dc, r[ok] + dr))
    t, h = np.concatenate(tails), np.concatenate(heads)
    order = np.lexsort((h, t))
    xy = np.column_stack([c + 0.5 * r, r * math.sqrt(3) / 2])
    labels = tuple(zip(c.tolist(), r.tolist()))
    return Graph(rows * cols, t[order], h[order], labels), Drawing(xy)


def gen_geometric(points, radius: float) -> tuple[Graph, Drawing]:
    """Edge between every pair of points at Euclidean distance in (0, radius]."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if radius <= 0:
        raise ValueError("range must be positive")
    tree = cKDTree(pts)
    if tree.query_pairs(0.0):
        raise ValueError("duplicate points")
    pairs = tree.query_pairs(radius, output_type="ndarray")
    if len(pairs):
        # query_pairs is inclusive up to floating error; enforce <= radius exactly
        d = np.linalg.norm(pts[pairs[:, 0]] - pts[pairs[:, 1]], axis=1)
        pairs = pairs[d <= radius]
        pairs = pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]
    return Graph(len(pts), pairs[:, 0], pairs[:, 1], None, None), Drawing(pts)


def jittered_points(box_side: int, dim: int = 2, jitter: float = 0.4, seed=0) -> np.ndarray:
    """One uniformly jittered point per unit cell of [0, box_side)^dim."""
    rng = np.random.default_rng(seed)
    grid = np.indices((box_side,) * dim).reshape(dim, -1).T.astype(float)
    return grid + 0.5 + rng.uniform(-jitter, jitter, size=grid.shape)


def find_min_L(alpha: float, beta: float, limit: int = 1000) -> int | None:
    """Smallest positive integer L with alpha L^2 + beta <= L - 1 (None if none up to limit)."""
    for L in range(1, limit + 1):
        if alpha * L * L + beta <= L - 1:
            return L
    return None


def window_violation(failed: np.ndarray, alpha: float, beta: float):
    """First integer-anchored square breaking the failure bound, or None.

    ``failed`` is a 2D boolean mask over the box; a square holding s x s
    lattice points has area s^2. Returns (row, col, side, count, allowed).
    """
    nr, nc = failed.shape
    pre = np.zeros((nr + 1, nc + 1), dtype=np.int64)
    pre[1:, 1:] = failed.astype(np.int64).cumsum(0).cumsum(1)
    for side in range(1, min(nr, nc) + 1):
        counts = (pre[side:, side:] - pre[:-side, side:]
                  - pre[side:, :-side] + pre[:-side, :-side])
        allowed = alpha * side * side + beta
        bad = np.argwhere(counts > allowed + 1e-12)
        if len(bad):
            i, j = bad[0]
            return int(i), int(j), side, int(counts[i, j]), allowed
    return None


@dataclass
class FailedLattice:
    graph: Graph          # giant component, labelled by lattice coordinates
    drawing: Drawing
    giant: np.ndarray     # node ids of the giant component in the survivor graph
    survivors: Graph
    failed: list = field(default_factory=list)
    L: int | None = None
    slack: int | None = None  # max over giant pairs of d_G - 20 d_f


def gen_failed_lattice(m: int, fail: FailureSpec, seed=0, check_distances=True) -> FailedLattice:
    """2D box [-m, m]^2 with failed nodes removed; returns the giant component.

    The failure set must put at most alpha*A + beta failures in every square
    of area A. Explicit failure lists violating this are rejected with the
    offending square; random proposals are repaired by restoring nodes in
    violating squares until the bound holds.
    """
    side = 2 * m + 1
    if not fail.alpha < 1.0 / (4 * (fail.beta + 1)):
        raise ValueError("need alpha < 1 / (4 (beta + 1))")
    failed = np.zeros((side, side), dtype=bool)
    if fail.sites is not None:
        for x, y in fail.sites:
            failed[x + m, y + m] = True
        bad = window_violation(failed, fail.alpha, fail.beta)
        if bad:
            i, j, s, count, allowed = bad
            raise FailureBoundError((i - m, j - m), s, count, allowed)
    else:
        rng = np.random.default_rng(seed)
        rate = fail.alpha if fail.rate is None else fail.rate
        failed = rng.random((side, side)) < rate
        while (bad := window_violation(failed, fail.alpha, fail.beta)) is not None:
            i, j, s, _, _ = bad
            cells = np.argwhere(failed[i:i + s, j:j + s])
            ci, cj = cells[rng.integers(len(cells))]
            failed[i + ci, j + cj] = False
    box, drawing = lattice_box([-m, -m], [m, m])
    alive = np.flatnonzero(~failed.reshape(-1))
    survivors = box.subgraph(alive)
    giant = largest_component(survivors)
    graph = survivors.subgraph(giant)
    coords = drawing.coords[alive][giant]
    out = FailedLattice(graph, Drawing(coords), giant, survivors,
                        [tuple(int(v) - m for v in p) for p in np.argwhere(failed)],
                        find_min_L(fail.alpha, fail.beta))
    if check_distances and graph.n > 1:
        dg = distance_matrix(graph)
        iu = np.triu_indices(graph.n, k=1)
        df = np.linalg.norm(coords[iu[0]] - coords[iu[1]], axis=1)
        out.slack = int(np.ceil((dg[iu] - 20 * df).max()))
    return out


def gen_regular_tree(branching: int, depth: int) -> Graph:
    """Complete ``branching``-ary tree of the given depth, edges parent -> child, BFS order."""
    if branching < 2 or depth < 1:
        raise ValueError("need branching >= 2 and depth >= 1")
    n = (branching ** (depth + 1) - 1) // (branching - 1)
    child = np.arange(1, n)
    return Graph(n, (child - 1) // branching, child, None, None)


def tree_drawing(branching: int, depth: int) -> Drawing:
    """Layered drawing: leaves at unit spacing on y = -depth, parents centred above."""
    n = (branching ** (depth + 1) - 1) // (branching - 1)
    xy = np.zeros((n, 2))
    first_leaf = n - branching ** depth
    xy[first_leaf:, 0] = np.arange(branching ** depth)
    xy[first_leaf:, 1] = -depth
    for u in range(first_leaf - 1, -1, -1):
        kids = np.arange(branching * u + 1, branching * u + branching + 1)
        xy[u, 0] = xy[kids, 0].mean()
        xy[u, 1] = xy[kids[0], 1] + 1
    return Drawing(xy)
