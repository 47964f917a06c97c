"""Directed multigraphs with undirected distance semantics.

Edges keep their orientation because the sign of a relative measurement
depends on it, but every distance, connectivity and fuzz computation below
treats the graph as undirected.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Hashable, Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

DEFAULT_MAX_DEGREE = 64


class GraphError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable directed multigraph on nodes ``0..n-1``.

    ``labels`` optionally stores an original identifier per node (lattice
    coordinates, ids before subgraph extraction, ...) so that nested or
    extracted graphs can be related to each other.
    """

    n: int
    tails: np.ndarray
    heads: np.ndarray
    labels: tuple | None = None
    max_degree: int | None = DEFAULT_MAX_DEGREE

    def __post_init__(self):
        tails = np.asarray(self.tails, dtype=np.int64).reshape(-1)
        heads = np.asarray(self.heads, dtype=np.int64).reshape(-1)
        if tails.shape != heads.shape:
            raise GraphError("tails and heads differ in length")
        if self.n < 0:
            raise GraphError("negative node count")
        if tails.size and (min(tails.min(), heads.min()) < 0
                           or max(tails.max(), heads.max()) >= self.n):
            raise GraphError("edge endpoint out of range")
        loops = np.flatnonzero(tails == heads)
        if loops.size:
            raise GraphError(f"self-loop on node {tails[loops[0]]}")
        if self.labels is not None and len(self.labels) != self.n:
            raise GraphError("labels must have one entry per node")
        tails.setflags(write=False)
        heads.setflags(write=False)
        object.__setattr__(self, "tails", tails)
        object.__setattr__(self, "heads", heads)
        if self.max_degree is not None and self.n:
            worst = int(self.degrees.max())
            if worst > self.max_degree:
                node = int(self.degrees.argmax())
                raise GraphError(
                    f"node {node} has degree {worst} > max degree {self.max_degree}")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], labels=None,
                   max_degree: int | None = DEFAULT_MAX_DEGREE) -> "Graph":
        arr = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        return cls(n, arr[:, 0], arr[:, 1],
                   tuple(labels) if labels is not None else None, max_degree)

    @property
    def num_edges(self) -> int:
        return int(self.tails.size)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return list(zip(self.tails.tolist(), self.heads.tolist()))

    @cached_property
    def degrees(self) -> np.ndarray:
        return (np.bincount(self.tails, minlength=self.n)
                + np.bincount(self.heads, minlength=self.n))

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        """Symmetric 0/1 adjacency (parallel edges collapsed)."""
        data = np.ones(2 * self.num_edges)
        rows = np.concatenate([self.tails, self.heads])
        cols = np.concatenate([self.heads, self.tails])
        a = sp.csr_matrix((data, (rows, cols)), shape=(self.n, self.n))
        a.data[:] = 1.0
        return a

    @cached_property
    def incident(self) -> list[np.ndarray]:
        """Per-node array of incident edge indices."""
        ends = np.concatenate([self.tails, self.heads])
        ids = np.concatenate([np.arange(self.num_edges)] * 2)
        order = np.argsort(ends, kind="stable")
        bounds = np.searchsorted(ends[order], np.arange(self.n + 1))
        return [ids[order[bounds[i]:bounds[i + 1]]] for i in range(self.n)]

    @cached_property
    def label_index(self) -> dict:
        if self.labels is None:
            return {i: i for i in range(self.n)}
        return {lab: i for i, lab in enumerate(self.labels)}

    def node_of(self, label: Hashable) -> int:
        return self.label_index[label]

    def label_of(self, node: int):
        return node if self.labels is None else self.labels[node]

    def edge_keys(self) -> np.ndarray:
        """Unordered (min, max) endpoint pairs, one row per edge."""
        return np.sort(np.stack([self.tails, self.heads], axis=1), axis=1)

    def has_parallel_edges(self) -> bool:
        keys = self.edge_keys()
        return len(np.unique(keys, axis=0)) != len(keys)

    def undirected_edge_set(self) -> set[tuple[int, int]]:
        return set(map(tuple, self.edge_keys().tolist()))

    def has_edge(self, u: int, v: int) -> bool:
        """True if u and v are joined by an edge in either direction."""
        return bool(self.adjacency[u, v])

    def subgraph(self, nodes: Sequence[int]) -> "Graph":
        """Induced subgraph, renumbered; labels carry the original ids."""
        nodes = np.asarray(nodes, dtype=np.int64)
        remap = np.full(self.n, -1, dtype=np.int64)
        remap[nodes] = np.arange(nodes.size)
        keep = (remap[self.tails] >= 0) & (remap[self.heads] >= 0)
        labels = tuple(self.label_of(int(u)) for u in nodes)
        return Graph(int(nodes.size), remap[self.tails[keep]],
                     remap[self.heads[keep]], labels, self.max_degree)

    def __repr__(self):
        return f"Graph(n={self.n}, edges={self.num_edges})"


class GraphBuilder:
    """Single-owner accumulator for nodes and edges.

    >>> b = GraphBuilder()
    >>> a, c = b.add_node("a"), b.add_node("c")
    >>> b.add_edge(a, c)
    >>> b.build()
    Graph(n=2, edges=1)
    """

    def __init__(self, max_degree: int | None = DEFAULT_MAX_DEGREE):
        self.max_degree = max_degree
        self._labels: list = []
        self._edges: list[tuple[int, int]] = []

    def add_node(self, label=None) -> int:
        self._labels.append(len(self._labels) if label is None else label)
        return len(self._labels) - 1

    def add_nodes(self, count: int) -> range:
        start = len(self._labels)
        for _ in range(count):
            self.add_node()
        return range(start, start + count)

    def add_edge(self, tail: int, head: int) -> None:
        if tail == head:
            raise GraphError(f"self-loop on node {tail}")
        self._edges.append((tail, head))

    def build(self) -> Graph:
        labels = self._labels
        plain = all(lab == i for i, lab in enumerate(labels))
        return Graph.from_edges(len(labels), self._edges,
                                None if plain else labels, self.max_degree)


def bfs_distances(g: Graph, source: int) -> np.ndarray:
    """Hop distances from ``source``; unreachable nodes get -1."""
    dist = csgraph.shortest_path(g.adjacency, directed=False, unweighted=True,
                                 indices=source)
    out = np.full(g.n, -1, dtype=np.int64)
    ok = np.isfinite(dist)
    out[ok] = dist[ok].astype(np.int64)
    return out


def distance_matrix(g: Graph) -> np.ndarray:
    """All-pairs hop distances (-1 where unreachable). Dense, O(n^2) memory."""
    dist = csgraph.shortest_path(g.adjacency, directed=False, unweighted=True)
    out = np.full(dist.shape, -1, dtype=np.int64)
    ok = np.isfinite(dist)
    out[ok] = dist[ok].astype(np.int64)
    return out


def graphical_distance(g: Graph, u: int, v: int) -> int | None:
    """Length of the shortest undirected path from u to v, or None."""
    for node in (u, v):
        if not 0 <= node < g.n:
            raise GraphError(f"invalid node {node}")
    if u == v:
        return 0
    d = int(bfs_distances(g, u)[v])
    return None if d < 0 else d


def components(g: Graph) -> np.ndarray:
    """Weak-component label per node."""
    _, labels = csgraph.connected_components(g.adjacency, directed=False)
    return labels


def weakly_connected(g: Graph) -> bool:
    if g.n <= 1:
        return True
    return csgraph.connected_components(g.adjacency, directed=False)[0] == 1


def largest_component(g: Graph) -> np.ndarray:
    """Sorted node ids of the largest weak component (smallest label on ties)."""
    labels = components(g)
    counts = np.bincount(labels)
    return np.flatnonzero(labels == counts.argmax())


def h_fuzz(g: Graph, h: int) -> Graph:
    """Graph on the same nodes with an edge wherever 1 <= d_G(u, v) <= h.

    Edges of the result are oriented from the smaller to the larger id.
    """
    if h < 1:
        raise GraphError("fuzz parameter h must be >= 1")
    if g.has_parallel_edges():
        raise GraphError("h_fuzz expects a graph without parallel edges")
    step = (g.adjacency + sp.identity(g.n, format="csr")).astype(bool)
    reach = step.copy()
    for _ in range(h - 1):
        reach = (reach @ step).astype(bool)
    upper = sp.triu(reach, k=1).tocoo()
    order = np.lexsort((upper.col, upper.row))
    return Graph(g.n, upper.row[order], upper.col[order], g.labels, None)


@dataclass(frozen=True)
class EmbeddingCheck:
    ok: bool
    missing_edges: list = field(default_factory=list)
    collisions: list = field(default_factory=list)
    unmapped: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


@dataclass(frozen=True)
class Embedding:
    """Node map certifying ``source`` can be embedded in ``target``."""

    source: Graph
    target: Graph
    mapping: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mapping",
                           np.asarray(self.mapping, dtype=np.int64))

    def __call__(self, u: int) -> int:
        return int(self.mapping[u])

    def compose(self, other: "Embedding") -> "Embedding":
        """``other`` after ``self``: source of self into target of other."""
        return Embedding(self.source, other.target, other.mapping[self.mapping])

    def verify(self) -> EmbeddingCheck:
        return verify_embedding(self, self.source, self.target)


def verify_embedding(e: Embedding, src: Graph, dst: Graph) -> EmbeddingCheck:
    """Check injectivity and edge preservation (up to direction)."""
    mp = np.asarray(e.mapping, dtype=np.int64)
    if mp.shape != (src.n,):
        return EmbeddingCheck(False, unmapped=list(range(mp.size, src.n)))
    unmapped = np.flatnonzero((mp < 0) | (mp >= dst.n)).tolist()
    if unmapped:
        return EmbeddingCheck(False, unmapped=unmapped)
    vals, counts = np.unique(mp, return_counts=True)
    collisions = [np.flatnonzero(mp == v).tolist() for v in vals[counts > 1]]
    a = dst.adjacency
    mt, mh = mp[src.tails], mp[src.heads]
    present = np.asarray(a[mt, mh]).reshape(-1) > 0
    missing = [(int(src.tails[i]), int(src.heads[i]))
               for i in np.flatnonzero(~present)]
    return EmbeddingCheck(not collisions and not missing, missing, collisions)


def embedding_by_labels(src: Graph, dst: Graph) -> Embedding:
    """Map each source node to the target node carrying the same label."""
    index = dst.label_index
    try:
        mapping = [index[src.label_of(u)] for u in range(src.n)]
    except KeyError as exc:
        raise GraphError(f"label {exc.args[0]!r} missing from target") from None
    return Embedding(src, dst, np.asarray(mapping, dtype=np.int64))
