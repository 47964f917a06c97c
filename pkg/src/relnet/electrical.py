"""Generalized electrical networks with matrix-valued resistances.

Effective resistance is computed exactly like a BLUE covariance: ground one
node and read a diagonal block of the inverse grounded Laplacian. Flows and
potentials are materialized separately so that Kirchhoff's current law and
Ohm's law can be checked on solver output.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .graph import Embedding, Graph, graphical_distance, h_fuzz, verify_embedding
from .linalg import PSD_SLACK, min_eig, min_generalized_eig
from .network import Network, merge_parallel


@dataclass(frozen=True)
class FlowAssignment:
    currents: np.ndarray  # (m, k, k), oriented along each edge (tail -> head)
    source: int
    sink: int
    intensity: np.ndarray


@dataclass(frozen=True)
class PotentialAssignment:
    potentials: np.ndarray  # (n, k, k)


@dataclass(frozen=True)
class LawReport:
    """Outcome of checking one comparison law over a batch of cases."""

    law: str
    ok: bool
    worst_slack: float
    cases: int
    violations: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def __bool__(self):
        return self.ok

    def to_dict(self) -> dict:
        return {"law": self.law, "ok": self.ok, "worst_slack": self.worst_slack,
                "cases": self.cases, "violations": self.violations, **self.extra}


def effective_resistance(net: Network, u: int, v: int, method="auto") -> np.ndarray:
    """Potential difference V_u - V_v under identity-intensity injection at u, extraction at v."""
    if u == v:
        raise ValueError("effective resistance needs two distinct nodes")
    return net.solver(ground=v, method=method).node_blocks([u])[0]


def effective_resistances(net: Network, pairs: Iterable[tuple[int, int]],
                          method="auto") -> list[np.ndarray]:
    """Batch version sharing one factorization.

    With X the inverse of the Laplacian grounded at the reference (zero
    blocks there), R^eff_{u,v} = X_uu + X_vv - X_uv - X_vu.
    """
    pairs = [(int(a), int(b)) for a, b in pairs]
    k = net.k
    if not pairs:
        return []
    solver = net.solver(method=method)
    nodes = sorted({x for p in pairs for x in p} - {net.reference})
    col = {u: j for j, u in enumerate(nodes)}
    rhs = np.zeros((solver.matrix.shape[0], k * len(nodes)))
    for u, j in col.items():
        off = solver.reduced_index(u)
        rhs[off:off + k, j * k:(j + 1) * k] = np.eye(k)
    cols = solver.full(solver.solve(rhs)) if nodes else None

    def block(a, b):
        if a == net.reference or b == net.reference:
            return np.zeros((k, k))
        j = col[b]
        return cols[a * k:(a + 1) * k, j * k:(j + 1) * k]

    out = []
    for a, b in pairs:
        r = block(a, a) + block(b, b) - block(a, b) - block(b, a)
        out.append(0.5 * (r + r.T))
    return out


def current_flow(net: Network, u: int, v: int, intensity=None):
    """Generalized current and potential for intensity ``intensity`` (default I_k) from u to v."""
    k = net.k
    j = np.eye(k) if intensity is None else np.atleast_2d(np.asarray(intensity, float))
    solver = net.solver(ground=v)
    rhs = np.zeros((net.graph.n * k, j.shape[1]))
    rhs[u * k:(u + 1) * k] = j
    pot = solver.full(solver.solve(rhs[solver.keep])).reshape(net.graph.n, k, j.shape[1])
    g = net.graph
    drop = pot[g.tails] - pot[g.heads]
    currents = np.einsum("eij,ejl->eil", net.weights, drop)
    return FlowAssignment(currents, u, v, j), PotentialAssignment(pot)


def check_kcl(flow: FlowAssignment, g: Graph, rtol=1e-10) -> tuple[bool, float, int]:
    """Node balance: net outflow is +j at the source, -j at the sink, zero elsewhere.

    Returns (ok, worst residual norm, node where it occurs).
    """
    shape = flow.currents.shape[1:]
    net_out = np.zeros((g.n,) + shape)
    np.add.at(net_out, g.tails, flow.currents)
    np.add.at(net_out, g.heads, -flow.currents)
    net_out[flow.source] -= flow.intensity
    net_out[flow.sink] += flow.intensity
    resid = np.linalg.norm(net_out.reshape(g.n, -1), axis=1)
    worst = int(resid.argmax()) if g.n else -1
    bound = rtol * max(np.linalg.norm(flow.intensity), 1e-300)
    return bool(resid[worst] <= bound), float(resid[worst]), worst


def check_ohm(net: Network, flow: FlowAssignment, pot: PotentialAssignment, rtol=1e-10) -> bool:
    g = net.graph
    lhs = np.einsum("eij,ejl->eil", net.blocks, flow.currents)
    rhs = pot.potentials[g.tails] - pot.potentials[g.heads]
    scale = max(np.abs(pot.potentials).max(), 1e-300)
    return bool(np.abs(lhs - rhs).max() <= rtol * scale)


def _slack(a, b) -> float:
    """Scaled min eigenvalue of a - b; >= -tol means a >= b."""
    scale = max(np.linalg.norm(np.atleast_2d(a), 2), np.linalg.norm(np.atleast_2d(b), 2), 1.0)
    return min_eig(np.asarray(a) - np.asarray(b)) / scale


def check_rayleigh(net_a: Network, net_b: Network, emb: Embedding,
                   pairs: Sequence[tuple[int, int]], slack=PSD_SLACK) -> LawReport:
    """Embedding plus edge-wise dominance R_e >= Rbar_e implies R^eff_A >= R^eff_B.

    Preconditions are checked before any solve; a failed precondition yields
    a report with ``ok=False`` and no resistances computed.
    """
    check = verify_embedding(emb, net_a.graph, net_b.graph)
    if not check:
        return LawReport("rayleigh", False, -np.inf, 0, [{"embedding": str(check)}],
                         {"precondition": "embedding"})
    merged_b = merge_parallel(net_b)
    gb = merged_b.graph
    index = {key: e for e, key in enumerate(map(tuple, gb.edge_keys().tolist()))}
    merged_a = merge_parallel(net_a)
    ga = merged_a.graph
    dominance = []
    for e in range(ga.num_edges):
        key = tuple(sorted((emb(int(ga.tails[e])), emb(int(ga.heads[e])))))
        s = _slack(merged_a.blocks[e], merged_b.blocks[index[key]])
        if s < -slack:
            dominance.append({"edge": e, "slack": s})
    if dominance:
        return LawReport("rayleigh", False, -np.inf, 0, dominance,
                         {"precondition": "dominance"})
    ra = effective_resistances(net_a, pairs)
    rb = effective_resistances(net_b, [(emb(a), emb(b)) for a, b in pairs])
    return _collect("rayleigh", [(p, _slack(x, y)) for p, x, y in zip(pairs, ra, rb)], slack)


def _collect(law, scored, slack, extra=None) -> LawReport:
    worst = min((s for _, s in scored), default=np.inf)
    bad = [{"case": list(map(int, case)), "slack": s} for case, s in scored if s < -slack]
    return LawReport(law, not bad, float(worst), len(scored), bad, extra or {})


def check_triangle(net: Network, triples: Sequence[tuple[int, int, int]],
                   slack=PSD_SLACK) -> LawReport:
    """R^eff_{u,w} <= R^eff_{u,v} + R^eff_{v,w} on a constant-resistance network."""
    if not net.is_constant():
        raise ValueError("triangle inequality requires the same resistance on every edge")
    pairs = []
    for u, v, w in triples:
        pairs += [(u, w), (u, v), (v, w)]
    r = effective_resistances(net, pairs)
    scored = []
    for i, t in enumerate(triples):
        uw, uv, vw = r[3 * i:3 * i + 3]
        scored.append((t, _slack(uv + vw, uw)))
    return _collect("triangle", scored, slack)


def fuzz_network(net: Network, h: int) -> Network:
    """The constant-resistance network on the h-fuzz of ``net``'s graph.

    For h = 1 the fuzz has exactly the original edges, so ``net`` itself is
    returned.
    """
    if not net.is_constant():
        raise ValueError("fuzz comparison requires a constant resistance")
    if h == 1:
        return net
    return Network.constant(h_fuzz(net.graph, h), net.blocks[0], net.reference)


def fuzz_sandwich(net: Network, h: int, pairs: Sequence[tuple[int, int]],
                  slack=PSD_SLACK) -> tuple[float, LawReport]:
    """Check R^eff(G^(h)) <= R^eff(G) and report alpha_hat = min generalized eigenvalue.

    alpha_hat estimates the constant alpha with alpha R^eff(G) <= R^eff(G^(h)).
    """
    fuzz = fuzz_network(net, h)
    base = effective_resistances(net, pairs)
    fz = base if fuzz is net else effective_resistances(fuzz, pairs)
    scored, alphas = [], []
    for p, b, f in zip(pairs, base, fz):
        scored.append((p, _slack(b, f)))
        alphas.append(min_generalized_eig(f, b))
    alpha = float(min(alphas)) if alphas else 1.0
    report = _collect("fuzz", scored, slack, {"alpha_hat": alpha, "h": h})
    if not alpha > 0:
        report = LawReport("fuzz", False, report.worst_slack, report.cases,
                           report.violations + [{"alpha_hat": alpha}], report.extra)
    return alpha, report


def path_upper_bound(net: Network, u: int, v: int, slack=PSD_SLACK) -> np.ndarray:
    """d_G(u, v) * R0 on a constant-resistance network; asserts R^eff_{u,v} is below it."""
    if not net.is_constant():
        raise ValueError("path bound requires the same resistance on every edge")
    d = graphical_distance(net.graph, u, v)
    if d is None:
        raise ValueError(f"nodes {u} and {v} are not connected")
    bound = d * net.blocks[0]
    if u != v:
        r = effective_resistance(net, u, v)
        if _slack(bound, r) < -slack:
            raise AssertionError(f"effective resistance exceeds path bound for ({u}, {v})")
    return bound
