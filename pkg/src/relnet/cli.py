"""Command-line interface: ``relnet <command> ...``."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import io
from .electrical import (check_rayleigh, check_triangle, current_flow, check_kcl,
                         effective_resistances, fuzz_sandwich)
from .estimator import blue_covariance, blue_solve
from .experiments import FamilySpec, counterexample_trio, emit_report, run_scaling
from .geometry import Thresholds, classify
from .graph import Embedding, embedding_by_labels
from .measurements import NoiseModel, empirical_edge_covariance, synth_gaussian, synth_range_angle
from .netgen import (FailureSpec, LatticeSpec, gen_failed_lattice, gen_geometric, gen_lattice,
                     gen_regular_tree, gen_triangular, jittered_points, tree_drawing)
from .network import Network


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _dump(doc, path) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True, default=float) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_gen(a) -> int:
    if a.family == "lattice":
        g, f = gen_lattice(LatticeSpec(a.dim, a.half_width, a.fuzz))
    elif a.family == "tri":
        g, f = gen_triangular(2 * a.half_width + 1, 2 * a.half_width + 1)
    elif a.family == "geometric":
        g, f = gen_geometric(jittered_points(2 * a.half_width + 1, a.dim, a.jitter, a.seed), a.range)
    elif a.family == "failed-lattice":
        out = gen_failed_lattice(a.half_width, FailureSpec(a.alpha, a.beta), a.seed)
        g, f = out.graph, out.drawing
    else:
        g, f = gen_regular_tree(a.branching, a.depth), tree_drawing(a.branching, a.depth)
    net = Network.constant(g, a.cov * np.eye(a.k), 0)
    io.write_network(net, a.json)
    if a.drawing:
        io.write_drawing(f, a.drawing)
    print(f"{g.n} nodes, {g.num_edges} edges")
    return 0


def cmd_blue(a) -> int:
    net = io.read_network(a.graph, a.ref)
    if a.measurements:
        res = blue_solve(net.with_measurements(io.read_measurements(net.graph, a.measurements)))
        if a.estimates:
            io.write_vectors(res.estimates, a.estimates)
        blocks = {t: res.covariances[t] for t in (_ints(a.targets) if a.targets else range(net.graph.n))}
    else:
        targets = _ints(a.targets) if a.targets else range(net.graph.n)
        blocks = blue_covariance(net, targets)
    io.write_covariances(blocks, a.out)
    return 0


def cmd_reff(a) -> int:
    net = io.read_network(a.graph)
    pairs = io.read_pairs(a.pairs)
    io.write_resistances(pairs, effective_resistances(net, pairs), a.out)
    return 0


def _random_pairs(n, count, seed):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        u, v = rng.choice(n, 2, replace=False)
        out.append((int(u), int(v)))
    return out


def cmd_verify(a) -> int:
    net = io.read_network(a.graph)
    n = net.graph.n
    pairs = io.read_pairs(a.pairs) if a.pairs else _random_pairs(n, a.count, a.seed)
    if a.law == "analogy":
        reff = effective_resistances(net, pairs)
        worst, kcl_worst = 0.0, 0.0
        for (u, v), r in zip(pairs, reff):
            sigma = blue_covariance(net.with_reference(v), [u])[u]
            worst = max(worst, float(np.abs(sigma - r).max()))
            flow, _ = current_flow(net, u, v)
            kcl_worst = max(kcl_worst, check_kcl(flow, net.graph)[1])
        ok = worst <= a.tol
        report = {"law": "analogy", "ok": ok, "cases": len(pairs),
                  "max_abs_difference": worst, "kcl_residual": kcl_worst}
    elif a.law == "rayleigh":
        if not a.supergraph:
            raise SystemExit("--law rayleigh needs --supergraph")
        big = io.read_network(a.supergraph)
        try:
            if net.graph.labels is not None and big.graph.labels is not None:
                emb = embedding_by_labels(net.graph, big.graph)
            else:
                emb = Embedding(net.graph, big.graph, np.arange(n))
        except ValueError as exc:
            report = {"law": "rayleigh", "ok": False, "precondition": "embedding",
                      "violations": [{"embedding": str(exc)}], "cases": 0}
        else:
            report = check_rayleigh(net, big, emb, pairs).to_dict()
    elif a.law == "triangle":
        rng = np.random.default_rng(a.seed)
        triples = [tuple(int(x) for x in rng.choice(n, 3, replace=False)) for _ in range(a.count)]
        report = check_triangle(net, triples).to_dict()
    else:
        _, rep = fuzz_sandwich(net, a.h, pairs)
        report = rep.to_dict()
    _dump(report, a.out)
    return 0 if report["ok"] else 1


def cmd_classify(a) -> int:
    net = io.read_network(a.graph)
    f = io.read_drawing(a.drawing)
    th = Thresholds(gamma_max=a.gamma_max, rho_min=a.rho_min)
    _dump(classify(net.graph, f, _ints(a.cutoffs), th).to_dict(), a.out)
    return 0


def cmd_synth(a) -> int:
    net = io.read_network(a.graph)
    truth = io.read_vectors(a.truth)
    edges = list(zip(net.graph.tails.tolist(), net.graph.heads.tolist()))
    if a.model == "gaussian":
        z = synth_gaussian(truth, edges, net.blocks, a.seed)
    else:
        model = NoiseModel.range_angle(a.sigma_r, a.sigma_th, a.angle_law)
        z = synth_range_angle(truth, edges, model, a.seed, correct=not a.no_correction)
        if a.network_out:
            # estimated edge covariances so the estimator can weight these edges
            blocks = np.array([empirical_edge_covariance(model, truth[t] - truth[h], a.draws, a.seed)
                               for t, h in edges])
            io.write_network(net.with_blocks(blocks), a.network_out)
    io.write_measurements(net.graph, z, a.out)
    return 0


def cmd_experiment(a) -> int:
    if a.family == "trio":
        report = counterexample_trio()
        ok = True
        for name, entry in report.items():
            emit_report(entry.pop("run"), f"{a.out}/{name}")
            ok &= entry["degree_six"] and entry["best"] == entry["expected"]
        _dump(report, f"{a.out}/trio.json")
        return 0 if ok else 1
    spec = FamilySpec(a.family, a.dim, a.half_width, a.fuzz)
    dmax = a.dmax if a.dmax is not None else max(a.dmin + 4, a.half_width // 3)
    run = run_scaling(spec, list(range(a.dmin, dmax + 1)), a.k, margin=a.margin)
    for path in emit_report(run, a.out).values():
        print(path)
    print(f"best fit: {run.fit.best} (goodness {run.fit.goodness:.4f})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="relnet", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a graph family with its drawing")
    g.add_argument("--family", required=True,
                   choices=["lattice", "tri", "geometric", "failed-lattice", "tree"])
    g.add_argument("--json", required=True, help="output network JSON")
    g.add_argument("--drawing", help="output drawing CSV")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--dim", type=int, default=2)
    g.add_argument("--half-width", type=int, default=5)
    g.add_argument("--fuzz", type=int, default=1)
    g.add_argument("--alpha", type=float, default=0.04)
    g.add_argument("--beta", type=float, default=5.0)
    g.add_argument("--range", type=float, default=1.5)
    g.add_argument("--jitter", type=float, default=0.3)
    g.add_argument("--branching", type=int, default=2)
    g.add_argument("--depth", type=int, default=4)
    g.add_argument("--k", type=int, default=1)
    g.add_argument("--cov", type=float, default=1.0, help="edge covariance is cov * I_k")
    g.set_defaults(func=cmd_gen)

    b = sub.add_parser("blue", help="BLUE covariances (and estimates given measurements)")
    b.add_argument("--graph", required=True)
    b.add_argument("--ref", type=int, default=0)
    b.add_argument("--targets", help="comma-separated node ids (default: all)")
    b.add_argument("--measurements", help="measurements CSV")
    b.add_argument("--estimates", help="output estimates CSV")
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_blue)

    r = sub.add_parser("reff", help="effective resistances for listed pairs")
    r.add_argument("--graph", required=True)
    r.add_argument("--pairs", required=True)
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_reff)

    v = sub.add_parser("verify", help="check a network law; exit status 1 on violation")
    v.add_argument("--law", required=True, choices=["rayleigh", "triangle", "fuzz", "analogy"])
    v.add_argument("--graph", required=True)
    v.add_argument("--supergraph", help="network the graph embeds into (rayleigh)")
    v.add_argument("--pairs", help="pairs CSV (default: random pairs)")
    v.add_argument("--count", type=int, default=20)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--h", type=int, default=2)
    v.add_argument("--tol", type=float, default=1e-8)
    v.add_argument("--out", help="JSON report (default: stdout)")
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("classify", help="drawing parameters and dense/sparse evidence")
    c.add_argument("--graph", required=True)
    c.add_argument("--drawing", required=True)
    c.add_argument("--cutoffs", default="1")
    c.add_argument("--gamma-max", type=float, default=10.0)
    c.add_argument("--rho-min", type=float, default=0.1)
    c.add_argument("--out")
    c.set_defaults(func=cmd_classify)

    s = sub.add_parser("synth", help="synthesize noisy relative measurements")
    s.add_argument("--truth", required=True)
    s.add_argument("--graph", required=True)
    s.add_argument("--model", choices=["gaussian", "range-angle"], default="gaussian")
    s.add_argument("--sigma-r", type=float, default=0.1)
    s.add_argument("--sigma-th", type=float, default=0.1)
    s.add_argument("--angle-law", choices=["gaussian", "uniform"], default="gaussian")
    s.add_argument("--no-correction", action="store_true", help="skip the 1/c factor")
    s.add_argument("--draws", type=int, default=10_000)
    s.add_argument("--network-out", help="network JSON with estimated edge covariances")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)

    e = sub.add_parser("experiment", help="error growth with distance; writes CSV, JSON and SVG")
    e.add_argument("--family", choices=["lattice", "tri", "trio"], default="lattice")
    e.add_argument("--dim", type=int, default=2)
    e.add_argument("--half-width", type=int, default=32)
    e.add_argument("--fuzz", type=int, default=1)
    e.add_argument("--k", type=int, default=1)
    e.add_argument("--dmin", type=int, default=2)
    e.add_argument("--dmax", type=int)
    e.add_argument("--margin", type=float, default=1 / 3)
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"relnet: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
