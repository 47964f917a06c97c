"""Graphs carrying a k x k SPD block per edge.

The same container serves as a measurement network (blocks are measurement
error covariances) and as a generalized electrical network (blocks are
resistances); the two views share every numerical code path.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .graph import Graph, components, weakly_connected
from .linalg import (SPD_RTOL, GroundedSolver, SingularSystemError, SpdError, block_laplacian,
                     parallel_combine)


@dataclass(frozen=True, eq=False)
class Network:
    """A graph with SPD edge blocks, a reference node and optional measurements.

    ``blocks[e]`` is the covariance P_e of edge ``e`` (or its resistance R_e);
    ``measurements[e]`` is the relative measurement of x_tail - x_head.
    Parallel edges are allowed; see :func:`merge_parallel`.
    """

    graph: Graph
    blocks: np.ndarray
    reference: int = 0
    measurements: np.ndarray | None = None

    def __post_init__(self):
        blocks = np.asarray(self.blocks, dtype=float)
        if blocks.ndim == 1:
            blocks = blocks[:, None, None]
        if blocks.ndim != 3 or blocks.shape[0] != self.graph.num_edges:
            raise ValueError("need one k x k block per edge")
        blocks = _validated(blocks)
        object.__setattr__(self, "blocks", blocks)
        if not 0 <= self.reference < self.graph.n:
            raise ValueError(f"reference {self.reference} is not a node")
        if self.measurements is not None:
            z = np.asarray(self.measurements, dtype=float).reshape(self.graph.num_edges, -1)
            if z.shape[1] != self.k:
                raise ValueError("measurements must have k entries per edge")
            object.__setattr__(self, "measurements", z)

    @classmethod
    def constant(cls, graph: Graph, block, reference=0) -> "Network":
        """Every edge carries the same block (scalar allowed)."""
        b = np.atleast_2d(np.asarray(block, dtype=float))
        return cls(graph, np.broadcast_to(b, (graph.num_edges,) + b.shape).copy(), reference)

    @property
    def k(self) -> int:
        return int(self.blocks.shape[1]) if self.blocks.size else 1

    @property
    def cov(self) -> np.ndarray:
        return self.blocks

    res = cov

    @cached_property
    def bounds(self) -> tuple[float, float]:
        """Scalars (p_min, p_max) with p_min I <= P_e <= p_max I for every edge."""
        if not self.graph.num_edges:
            return (np.nan, np.nan)
        eig = np.linalg.eigvalsh(self.blocks)
        return float(eig[:, 0].min()), float(eig[:, -1].max())

    def is_constant(self) -> bool:
        return bool(np.all(self.blocks == self.blocks[:1]))

    def with_reference(self, reference: int) -> "Network":
        return Network(self.graph, self.blocks, reference, self.measurements)

    def with_measurements(self, z) -> "Network":
        return Network(self.graph, self.blocks, self.reference, z)

    def with_blocks(self, blocks) -> "Network":
        return Network(self.graph, blocks, self.reference, self.measurements)

    @cached_property
    def weights(self) -> np.ndarray:
        """Edge information matrices P_e^-1."""
        w = np.linalg.inv(self.blocks)
        return 0.5 * (w + np.swapaxes(w, 1, 2))

    @cached_property
    def laplacian(self):
        g = self.graph
        return block_laplacian(g.n, g.tails, g.heads, self.weights)

    def check_connected(self) -> None:
        g = self.graph
        if weakly_connected(g):
            return
        labels = components(g)
        stray = np.flatnonzero(labels != labels[self.reference])
        raise SingularSystemError(
            f"graph is not weakly connected: {stray.size} node(s) are cut off from "
            f"reference {self.reference}, e.g. nodes {stray[:10].tolist()}")

    def solver(self, ground: int | None = None, method="auto") -> GroundedSolver:
        self.check_connected()
        ground = self.reference if ground is None else ground
        return GroundedSolver(self.laplacian, self.k, ground, method)


def _validated(blocks: np.ndarray) -> np.ndarray:
    if not len(blocks):
        return blocks
    finite = np.isfinite(blocks).all(axis=(1, 2))
    if not finite.all():
        e = int(np.flatnonzero(~finite)[0])
        raise SpdError(f"block of edge {e} has non-finite entries")
    sym = 0.5 * (blocks + np.swapaxes(blocks, 1, 2))
    scale = np.maximum(np.abs(blocks).max(axis=(1, 2)), 1.0)
    asym = np.abs(blocks - sym).max(axis=(1, 2)) > 1e-10 * scale
    eig = np.linalg.eigvalsh(sym)
    bad = asym | (eig[:, -1] <= 0) | (eig[:, 0] < SPD_RTOL * eig[:, -1])
    if bad.any():
        e = int(np.flatnonzero(bad)[0])
        what = "not symmetric" if asym[e] else "not positive definite"
        raise SpdError(f"block of edge {e} is {what}")
    return sym


MeasurementNetwork = Network
GeneralizedNetwork = Network


def merge_parallel(net: Network) -> Network:
    """Replace every bundle of parallel edges by one edge with block (sum B_i^-1)^-1.

    The surviving edge keeps the orientation of the bundle's first edge;
    measurements of a bundle are fused with their information weights after
    aligning orientations.
    """
    g = net.graph
    keys = g.edge_keys()
    uniq, first, inverse = np.unique(keys, axis=0, return_index=True, return_inverse=True)
    inverse = inverse.reshape(-1)
    if len(uniq) == g.num_edges:
        return net
    order = np.argsort(first)
    blocks, tails, heads, zs = [], [], [], []
    for bundle in order:
        members = np.flatnonzero(inverse == bundle)
        lead = members[0]
        tails.append(g.tails[lead])
        heads.append(g.heads[lead])
        merged = parallel_combine(net.blocks[members])
        blocks.append(merged)
        if net.measurements is not None:
            info = np.zeros(net.k)
            for e in members:
                sign = 1.0 if g.tails[e] == g.tails[lead] else -1.0
                info += net.weights[e] @ (sign * net.measurements[e])
            zs.append(merged @ info)
    graph = Graph(g.n, np.array(tails), np.array(heads), g.labels, g.max_degree)
    return Network(graph, np.array(blocks), net.reference,
                   np.array(zs) if zs else None)
