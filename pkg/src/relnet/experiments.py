"""Growth of the BLUE error covariance with distance from the reference.

A run builds one graph family in a box around the reference, computes the
exact covariance of nodes at a range of drawing distances, and fits three
growth models: linear in d, logarithmic in d, and bounded.
"""

from __future__ import annotations

import csv
import io
import json
import os
from contextlib import nullcontext
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.spatial import ConvexHull

from .drawing import Drawing
from .estimator import blue_covariance
from .geometry import max_connected_range
from .graph import Graph
from .netgen import LatticeSpec, gen_lattice, gen_triangular
from .network import Network

FAMILIES = ("lattice", "tri")
GROWTH_CLASSES = ("linear", "log", "bounded")


@dataclass(frozen=True)
class FamilySpec:
    """Graph family in a box of half-width ``half_width`` around the reference.

    ``tri`` is a (2m+1) x (2m+1) triangular patch; ``lattice`` is the
    d-dimensional lattice box, optionally fuzzed.
    """

    family: str = "lattice"
    dim: int = 2
    half_width: int = 16
    fuzz: int = 1

    def build(self) -> tuple[Graph, Drawing, int]:
        m = self.half_width
        if self.family == "lattice":
            g, f = gen_lattice(LatticeSpec(self.dim, m, self.fuzz))
            return g, f, g.node_of((0,) * self.dim)
        if self.family == "tri":
            g, f = gen_triangular(2 * m + 1, 2 * m + 1)
            return g, f, g.node_of((m, m))
        raise ValueError(f"unknown family {self.family!r}; choose from {FAMILIES}")


@dataclass(frozen=True)
class Sample:
    node: int
    label: tuple
    distance: float
    sigma: np.ndarray  # k x k
    proxy: float       # largest eigenvalue of sigma
    min_eig: float


@dataclass(frozen=True)
class GrowthFit:
    best: str
    goodness: float
    models: dict  # per-model parameters and score

    def to_dict(self) -> dict:
        return {"best": self.best, "goodness": self.goodness, "models": self.models}


@dataclass
class ScalingRun:
    spec: FamilySpec
    reference: int
    k: int
    samples: list
    fit: GrowthFit
    min_eig_fit: GrowthFit | None = None
    extra: dict = field(default_factory=dict)

    def series(self) -> tuple[np.ndarray, np.ndarray]:
        return (np.array([s.distance for s in self.samples]),
                np.array([s.proxy for s in self.samples]))


def _r2(y, pred) -> float:
    ss_tot = float(((y - y.mean()) ** 2).sum())
    ss_res = float(((y - pred) ** 2).sum())
    if ss_tot == 0:
        return 1.0 if ss_res == 0 else 0.0
    return float(np.clip(1.0 - ss_res / ss_tot, 0.0, 1.0))


def fit_growth(distances, values, bounded_spread: float = 1.15) -> GrowthFit:
    """Least-squares fits of y ~ a d + b and y ~ a ln d + b, plus the max/min spread.

    The bounded class wins whenever the spread is below ``bounded_spread``;
    otherwise the higher R^2 of the linear and log fits decides.
    """
    d = np.asarray(distances, dtype=float)
    y = np.asarray(values, dtype=float)
    if d.shape != y.shape or d.ndim != 1:
        raise ValueError("distances and values must be equal-length 1D arrays")
    if len(d) < 5:
        raise ValueError(f"need at least 5 samples, got {len(d)}")
    if np.any(d <= 0) or np.ptp(d) == 0:
        raise ValueError("degenerate distances: need positive, non-constant values")
    models = {}
    for name, x in (("linear", d), ("log", np.log(d))):
        slope, intercept = np.polyfit(x, y, 1)
        r2 = _r2(y, slope * x + intercept)
        models[name] = {"slope": float(slope), "intercept": float(intercept), "r2": r2}
    lo, hi = float(np.min(np.abs(y))), float(np.max(np.abs(y)))
    spread = hi / lo if lo > 0 else float("inf")
    models["bounded"] = {"mean": float(y.mean()), "spread": spread}
    if spread < bounded_spread:
        return GrowthFit("bounded", 1.0 / spread, models)
    best = max(("linear", "log"), key=lambda name: models[name]["r2"])
    return GrowthFit(best, models[best]["r2"], models)


def _boundary_distance(coords: np.ndarray, query: np.ndarray) -> np.ndarray:
    """Distance from each query point to the boundary of the hull of ``coords``."""
    if coords.shape[1] == 1:
        lo, hi = coords.min(), coords.max()
        return np.minimum(query[:, 0] - lo, hi - query[:, 0])
    eq = ConvexHull(coords).equations  # a.x + b <= 0 inside, |a| = 1
    return -(query @ eq[:, :-1].T + eq[:, -1]).max(axis=1)


def pick_targets(f: Drawing, reference: int, distances: Sequence[float]) -> list[int]:
    """Node nearest to reference + d e_1 for each requested distance d."""
    out = []
    origin = f.coords[reference]
    for dist in distances:
        want = origin.copy()
        want[0] += dist
        out.append(int(np.argmin(np.linalg.norm(f.coords - want, axis=1))))
    return out


def _thread_limit():
    cap = os.environ.get("RELNET_THREADS")
    if not cap:
        return nullcontext()
    from threadpoolctl import threadpool_limits
    return threadpool_limits(int(cap))


def run_scaling(spec: FamilySpec, distances: Sequence[float], k: int = 1, cov=None,
                margin: float = 1 / 3, bounded_spread: float = 1.15) -> ScalingRun:
    """Exact covariance at nodes along the first axis, with growth fits.

    Every sampled node must keep at least ``margin`` times the reference's
    distance to the boundary of the drawn box; otherwise ValueError.
    """
    g, f, ref = spec.build()
    block = np.eye(k) if cov is None else np.asarray(cov, dtype=float).reshape(k, k)
    targets = pick_targets(f, ref, distances)
    bd = _boundary_distance(f.coords, f.coords[[ref] + targets])
    limit = margin * bd[0]
    for t, dist, b in zip(targets, distances, bd[1:]):
        if b < limit - 1e-9:
            raise ValueError(f"sample at distance {dist} is {b:.3g} from the boundary; "
                             f"need at least {limit:.3g} (margin {margin:g})")
    net = Network.constant(g, block, ref)
    with _thread_limit():
        sig = blue_covariance(net, targets)
    samples = []
    for t in targets:
        w = np.linalg.eigvalsh(sig[t])
        dist = float(np.linalg.norm(f.coords[t] - f.coords[ref]))
        samples.append(Sample(t, tuple(g.label_of(t)), dist, sig[t], float(w[-1]), float(w[0])))
    samples.sort(key=lambda s: s.distance)
    d = [s.distance for s in samples]
    fit = fit_growth(d, [s.proxy for s in samples], bounded_spread)
    lower = fit_growth(d, [s.min_eig for s in samples], bounded_spread) if k > 1 else None
    return ScalingRun(spec, ref, k, samples, fit, lower)


def interior_degrees(g: Graph, f: Drawing) -> np.ndarray:
    """Degrees of the nodes at least one connected range away from the boundary."""
    r = max_connected_range(g, f)
    inner = _boundary_distance(f.coords, f.coords) >= r - 1e-9
    return g.degrees[inner]


TRIO = (
    ("1d-fuzz3", FamilySpec("lattice", 1, 60, 3), tuple(range(2, 21)), "linear"),
    ("triangular", FamilySpec("tri", 2, 40), tuple(range(2, 21)), "log"),
    ("3d-lattice", FamilySpec("lattice", 3, 15), tuple(range(5, 11)), "bounded"),
)


def counterexample_trio(sizes: dict | None = None) -> dict:
    """Three graphs where every interior node has degree six but errors grow differently.

    ``sizes`` optionally overrides the half-width per graph name.
    """
    sizes = sizes or {}
    report = {}
    for name, spec, dists, expected in TRIO:
        if name in sizes:
            spec = FamilySpec(spec.family, spec.dim, int(sizes[name]), spec.fuzz)
        g, f, _ = spec.build()
        deg = interior_degrees(g, f)
        run = run_scaling(spec, dists)
        report[name] = {
            "half_width": spec.half_width,
            "interior_nodes": int(deg.size),
            "degree_six": bool(deg.size and np.all(deg == 6) and g.degrees.max() == 6),
            "expected": expected,
            "best": run.fit.best,
            "fit": run.fit.to_dict(),
            "run": run,
        }
    return report


REPORT_DIGITS = 12  # significant digits in report files; hides last-bit solver noise


def _fmt(x: float) -> str:
    return f"{float(x):.{REPORT_DIGITS}g}"


def _rounded(obj):
    if isinstance(obj, float):
        return float(_fmt(obj))
    if isinstance(obj, dict):
        return {k: _rounded(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_rounded(v) for v in obj]
    return obj


def samples_csv(run: ScalingRun) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    k = run.k
    w.writerow(["node", "label", "distance", "proxy", "min_eig"]
               + [f"sigma_{i}{j}" for i in range(k) for j in range(k)])
    for s in run.samples:
        w.writerow([s.node, " ".join(map(str, s.label)), _fmt(s.distance), _fmt(s.proxy),
                    _fmt(s.min_eig)] + [_fmt(v) for v in s.sigma.reshape(-1)])
    return buf.getvalue()


def fit_json(run: ScalingRun) -> str:
    doc = {
        "spec": asdict(run.spec),
        "reference": run.reference,
        "k": run.k,
        "samples": len(run.samples),
        "fit": run.fit.to_dict(),
    }
    if run.min_eig_fit is not None:
        doc["min_eig_fit"] = run.min_eig_fit.to_dict()
    return json.dumps(_rounded(doc), indent=2, sort_keys=True) + "\n"


def plot_svg(run: ScalingRun) -> str:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    d, y = run.series()
    grid = np.linspace(d.min(), d.max(), 200)
    m = run.fit.models
    curves = {
        "linear": m["linear"]["slope"] * grid + m["linear"]["intercept"],
        "log": m["log"]["slope"] * np.log(grid) + m["log"]["intercept"],
        "bounded": np.full_like(grid, m["bounded"]["mean"]),
    }
    with matplotlib.rc_context({"svg.hashsalt": "relnet", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        ax.plot(d, y, "o", color="k", label="samples")
        for name, curve in curves.items():
            style = "-" if name == run.fit.best else ":"
            ax.plot(grid, curve, style, label=f"{name} fit")
        ax.set_xlabel("distance to reference")
        ax.set_ylabel("largest eigenvalue of covariance")
        s = run.spec
        ax.set_title(f"{s.family} dim={s.dim} m={s.half_width}: best {run.fit.best}")
        ax.legend(fontsize=8)
        fig.tight_layout()
        buf = io.StringIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
        plt.close(fig)
    return buf.getvalue()


def emit_report(run: ScalingRun, out_dir) -> dict[str, Path]:
    """Write samples.csv, fit.json and plot.svg to ``out_dir``."""
    if not run.samples:
        raise ValueError("run has no samples")
    out = Path(out_dir)
    paths = {"samples": out / "samples.csv", "fit": out / "fit.json", "plot": out / "plot.svg"}
    contents = {"samples": samples_csv(run), "fit": fit_json(run), "plot": plot_svg(run)}
    try:
        out.mkdir(parents=True, exist_ok=True)
        for key, path in paths.items():
            path.write_text(contents[key])
    except OSError as exc:
        raise OSError(f"cannot write report to {out}: {exc}") from exc
    return paths
