import numpy as np
import pytest

from relnet.graph import Graph
from relnet.network import Network


def random_spd(rng, k, scale=1.0):
    a = rng.normal(size=(k, k))
    return scale * (a @ a.T + 0.5 * np.eye(k))


def random_connected_graph(rng, n, extra=None):
    """Random spanning tree plus extra random edges (no self-loops, may repeat pairs)."""
    order = rng.permutation(n)
    edges = [(int(order[i]), int(order[rng.integers(i)])) for i in range(1, n)]
    extra = n if extra is None else extra
    for _ in range(extra):
        u, v = rng.choice(n, 2, replace=False)
        edges.append((int(u), int(v)))
    return Graph.from_edges(n, edges, max_degree=None)


def random_network(rng, n, k, extra=None, reference=0):
    g = random_connected_graph(rng, n, extra)
    blocks = np.array([random_spd(rng, k) for _ in range(g.num_edges)])
    return Network(g, blocks, reference)


def dense_covariance(net, u):
    """Oracle: invert the dense grounded Laplacian built edge by edge."""
    g, k = net.graph, net.k
    lap = np.zeros((g.n * k, g.n * k))
    for (t, h), b in zip(g.edges, net.blocks):
        w = np.linalg.inv(b)
        for a, c, s in ((t, t, 1), (h, h, 1), (t, h, -1), (h, t, -1)):
            lap[a * k:(a + 1) * k, c * k:(c + 1) * k] += s * w
    keep = [i for i in range(g.n * k) if i // k != net.reference]
    inv = np.linalg.inv(lap[np.ix_(keep, keep)])
    full = np.zeros_like(lap)
    full[np.ix_(keep, keep)] = inv
    return full[u * k:(u + 1) * k, u * k:(u + 1) * k]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def record(criterion: int, ok: bool, detail: str) -> None:
    line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
