"""Best linear unbiased estimation from relative measurements.

Given measurements z_e = x_tail - x_head + noise with covariance P_e and a
reference node pinned to zero, the estimate minimizes

    sum_e (z_e - (x_tail - x_head))^T P_e^-1 (z_e - (x_tail - x_head)),

whose normal equations are the block Laplacian with weights P_e^-1 and the
reference block removed. The error covariance of node u is the (u, u) block
of the inverse of that grounded Laplacian.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .graph import embedding_by_labels, verify_embedding
from .linalg import PSD_SLACK, min_eig
from .network import Network


@dataclass(frozen=True)
class BlueResult:
    estimates: np.ndarray    # (n, k); row of the reference is zero
    covariances: np.ndarray  # (n, k, k); block of the reference is zero
    reference: int

    def covariance(self, u: int) -> np.ndarray:
        return self.covariances[u]


def _rhs(net: Network) -> np.ndarray:
    g, k = net.graph, net.k
    info = np.einsum("eij,ej->ei", net.weights, net.measurements)
    b = np.zeros((g.n, k))
    np.add.at(b, g.tails, info)
    np.add.at(b, g.heads, -info)
    return b.reshape(-1)


def blue_solve(net: Network, method="auto") -> BlueResult:
    """BLUE estimates of every node and their error covariances."""
    if net.measurements is None:
        raise ValueError("blue_solve needs measurements on every edge")
    solver = net.solver(method=method)
    b = _rhs(net)[solver.keep]
    x = solver.full(solver.solve(b)).reshape(net.graph.n, net.k)
    others = [u for u in range(net.graph.n) if u != net.reference]
    cov = np.zeros((net.graph.n, net.k, net.k))
    cov[others] = solver.node_blocks(others)
    return BlueResult(x, cov, net.reference)


def blue_covariance(net: Network, targets: Iterable[int], method="auto") -> dict[int, np.ndarray]:
    """Error covariance Sigma_{u,o} for each target u (zero block for u = o)."""
    targets = list(dict.fromkeys(int(t) for t in targets))
    solver = net.solver(method=method)
    others = [t for t in targets if t != net.reference]
    blocks = dict(zip(others, solver.node_blocks(others)))
    return {t: blocks.get(t, np.zeros((net.k, net.k))) for t in targets}


@dataclass(frozen=True)
class ConvergenceReport:
    sigmas: list[np.ndarray]
    monotone: bool
    worst_slack: float       # min eigenvalue of Sigma_n - Sigma_{n+1}, scaled
    last_change: float       # Frobenius norm of the last step

    def __bool__(self):
        return self.monotone


def nested_convergence(nets: Sequence[Network], u, o, slack=PSD_SLACK) -> ConvergenceReport:
    """Covariance of u relative to o over a nested sequence of finite networks.

    ``u`` and ``o`` are node labels; each network must embed in the next one
    through matching labels. Covariances should be non-increasing in the PSD
    order as the networks grow.
    """
    for small, big in zip(nets, nets[1:]):
        check = verify_embedding(embedding_by_labels(small.graph, big.graph),
                                 small.graph, big.graph)
        if not check:
            raise ValueError(f"networks are not nested: {check}")
    sigmas = []
    for net in nets:
        g = net.graph
        ref = g.node_of(o)
        target = g.node_of(u)
        sigmas.append(blue_covariance(net.with_reference(ref), [target])[target])
    worst = np.inf
    for a, b in zip(sigmas, sigmas[1:]):
        scale = max(np.linalg.norm(a, 2), 1.0)
        worst = min(worst, min_eig(a - b) / scale)
    last = float(np.linalg.norm(sigmas[-1] - sigmas[-2])) if len(sigmas) > 1 else 0.0
    return ConvergenceReport(sigmas, bool(worst >= -slack), float(worst), last)


def tree_estimate(net: Network, tree_edges: Sequence[int]) -> np.ndarray:
    """Naive estimator: sum measurements along a spanning tree from the reference."""
    g = net.graph
    x = np.full((g.n, net.k), np.nan)
    x[net.reference] = 0.0
    adj: dict[int, list[tuple[int, int, float]]] = {u: [] for u in range(g.n)}
    for e in tree_edges:
        t, h = int(g.tails[e]), int(g.heads[e])
        adj[t].append((h, e, -1.0))
        adj[h].append((t, e, 1.0))
    stack = [net.reference]
    while stack:
        a = stack.pop()
        for b, e, sign in adj[a]:
            if np.isnan(x[b, 0]):
                # z_e = x_t - x_h, so x_h = x_t - z_e and x_t = x_h + z_e
                x[b] = x[a] + sign * net.measurements[e]
                stack.append(b)
    return x
