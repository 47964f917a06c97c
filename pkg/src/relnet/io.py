"""File formats: network JSON plus CSV tables for drawings, measurements and results."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .drawing import Drawing
from .graph import Graph
from .network import Network


def network_to_dict(net: Network) -> dict:
    g = net.graph
    doc = {
        "k": net.k,
        "nodes": g.n,
        "reference": net.reference,
        "edges": [{"tail": int(t), "head": int(h), "cov": b.tolist()}
                  for t, h, b in zip(g.tails, g.heads, net.blocks)],
    }
    if g.labels is not None:
        doc["labels"] = [list(lab) if isinstance(lab, tuple) else lab for lab in g.labels]
    return doc


def network_from_dict(doc: dict, reference: int | None = None) -> Network:
    try:
        k, n, edges = int(doc["k"]), int(doc["nodes"]), doc["edges"]
    except KeyError as exc:
        raise ValueError(f"network JSON is missing field {exc}") from None
    labels = doc.get("labels")
    if labels is not None:
        labels = tuple(tuple(lab) if isinstance(lab, list) else lab for lab in labels)
    tails = np.array([e["tail"] for e in edges], dtype=np.int64)
    heads = np.array([e["head"] for e in edges], dtype=np.int64)
    blocks = np.array([e["cov"] for e in edges], dtype=float).reshape(len(edges), k, k)
    ref = doc.get("reference", 0) if reference is None else reference
    return Network(Graph(n, tails, heads, labels, None), blocks, int(ref))


def write_network(net: Network, path) -> None:
    Path(path).write_text(json.dumps(network_to_dict(net)) + "\n")


def read_network(path, reference: int | None = None) -> Network:
    return network_from_dict(json.loads(Path(path).read_text()), reference)


def _reader(path):
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if rows and not _numeric(rows[0][0]):
        rows = rows[1:]  # header
    return rows


def _numeric(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def _writer(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def write_edge_csv(net: Network, path) -> None:
    """Bulk edge list: tail, head, k, then k^2 row-major covariance entries."""
    k = net.k
    _writer(path, ["tail", "head", "k"] + [f"p{i}{j}" for i in range(k) for j in range(k)],
            [[int(t), int(h), k] + [repr(float(v)) for v in b.reshape(-1)]
             for t, h, b in zip(net.graph.tails, net.graph.heads, net.blocks)])


def read_edge_csv(path, n: int | None = None, reference: int = 0) -> Network:
    rows = _reader(path)
    if not rows:
        raise ValueError(f"{path}: no edges")
    k = int(rows[0][2])
    tails = np.array([int(r[0]) for r in rows])
    heads = np.array([int(r[1]) for r in rows])
    blocks = np.array([[float(v) for v in r[3:3 + k * k]] for r in rows]).reshape(-1, k, k)
    n = int(max(tails.max(), heads.max()) + 1) if n is None else n
    return Network(Graph(n, tails, heads, None, None), blocks, reference)


def write_drawing(f: Drawing, path) -> None:
    _writer(path, ["node"] + [f"x{i}" for i in range(f.dim)],
            [[u] + [repr(float(v)) for v in row] for u, row in enumerate(f.coords)])


def read_drawing(path) -> Drawing:
    rows = sorted(_reader(path), key=lambda r: int(r[0]))
    if [int(r[0]) for r in rows] != list(range(len(rows))):
        raise ValueError(f"{path}: drawing must list nodes 0..n-1 once each")
    return Drawing(np.array([[float(v) for v in r[1:]] for r in rows]))


def write_vectors(values, path, name="x") -> None:
    """Node id followed by k values (ground truth or estimates)."""
    v = np.asarray(values, dtype=float)
    v = v[:, None] if v.ndim == 1 else v
    _writer(path, ["node"] + [f"{name}{i}" for i in range(v.shape[1])],
            [[u] + [repr(float(a)) for a in row] for u, row in enumerate(v)])


def read_vectors(path) -> np.ndarray:
    return read_drawing(path).coords


def write_measurements(g: Graph, z, path) -> None:
    z = np.asarray(z, dtype=float).reshape(g.num_edges, -1)
    _writer(path, ["tail", "head"] + [f"z{i}" for i in range(z.shape[1])],
            [[int(t), int(h)] + [repr(float(a)) for a in row]
             for t, h, row in zip(g.tails, g.heads, z)])


def read_measurements(g: Graph, path) -> np.ndarray:
    """Measurements in the graph's edge order; rows must match (tail, head) exactly."""
    rows = _reader(path)
    if len(rows) != g.num_edges:
        raise ValueError(f"{path}: {len(rows)} measurements for {g.num_edges} edges")
    for e, r in enumerate(rows):
        if (int(r[0]), int(r[1])) != (int(g.tails[e]), int(g.heads[e])):
            raise ValueError(f"{path}: row {e} is edge ({r[0]}, {r[1]}), expected "
                             f"({g.tails[e]}, {g.heads[e]})")
    return np.array([[float(v) for v in r[2:]] for r in rows])


def read_pairs(path) -> list[tuple[int, int]]:
    return [(int(r[0]), int(r[1])) for r in _reader(path)]


def write_pairs(pairs, path) -> None:
    _writer(path, ["u", "v"], [[int(a), int(b)] for a, b in pairs])


def write_covariances(blocks: dict, path) -> None:
    """Target id, k, then k^2 row-major entries."""
    rows = []
    for t, b in blocks.items():
        b = np.atleast_2d(b)
        rows.append([int(t), b.shape[0]] + [repr(float(v)) for v in b.reshape(-1)])
    k = rows[0][1] if rows else 1
    _writer(path, ["target", "k"] + [f"s{i}{j}" for i in range(k) for j in range(k)], rows)


def read_covariances(path) -> dict[int, np.ndarray]:
    out = {}
    for r in _reader(path):
        k = int(r[1])
        out[int(r[0])] = np.array([float(v) for v in r[2:2 + k * k]]).reshape(k, k)
    return out


def write_resistances(pairs, blocks, path) -> None:
    rows = []
    for (u, v), b in zip(pairs, blocks):
        b = np.atleast_2d(b)
        rows.append([int(u), int(v), b.shape[0]] + [repr(float(x)) for x in b.reshape(-1)])
    k = rows[0][2] if rows else 1
    _writer(path, ["u", "v", "k"] + [f"r{i}{j}" for i in range(k) for j in range(k)], rows)
