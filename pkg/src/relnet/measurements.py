"""Synthetic noisy relative measurements.

Two noise models are provided: additive Gaussian noise on the relative
vector, and planar range/bearing measurements converted to a relative
position. For the latter, dividing by c = E[cos(angle error)] makes the
converted measurement unbiased when range and angle errors are independent,
the range error has zero mean and E[sin(angle error)] = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .linalg import check_spd


@dataclass(frozen=True)
class AngleLaw:
    """Distribution of the bearing error.

    ``kind`` is "gaussian" (scale = standard deviation), "uniform" (on
    [-scale, scale]) or "custom" (``pdf`` on [-support, support]).
    """

    kind: str = "gaussian"
    scale: float = 0.0
    pdf: object = None
    support: float = math.pi

    def __post_init__(self):
        if self.scale < 0:
            raise ValueError("angle error scale must be >= 0")
        if self.kind not in ("gaussian", "uniform", "custom"):
            raise ValueError(f"undefined angle error law {self.kind!r}")
        if self.kind == "custom" and self.pdf is None:
            raise ValueError("custom angle law needs a pdf")

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        if self.kind == "gaussian":
            return rng.normal(0.0, self.scale, size)
        if self.kind == "uniform":
            return rng.uniform(-self.scale, self.scale, size)
        raise ValueError("custom angle laws support cbar only, not sampling")


@dataclass(frozen=True)
class NoiseModel:
    kind: str = "gaussian-relative"
    cov: np.ndarray | None = None       # gaussian-relative
    sigma_r: float = 0.0                # range-angle
    angle: AngleLaw = AngleLaw()

    def __post_init__(self):
        if self.kind not in ("gaussian-relative", "range-angle"):
            raise ValueError(f"unknown noise model {self.kind!r}")
        if self.sigma_r < 0:
            raise ValueError("sigma_r must be >= 0")
        if self.kind == "gaussian-relative" and self.cov is not None:
            object.__setattr__(self, "cov", check_spd(self.cov, "noise covariance"))

    @classmethod
    def range_angle(cls, sigma_r: float, sigma_theta: float, law: str = "gaussian"):
        return cls("range-angle", sigma_r=sigma_r, angle=AngleLaw(law, sigma_theta))


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """True node variables, shifted so the reference sits at the origin."""

    values: np.ndarray  # (n, k)
    reference: int = 0

    def __post_init__(self):
        x = np.asarray(self.values, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        if not 0 <= self.reference < len(x):
            raise ValueError("reference node out of range")
        x = x - x[self.reference]
        x.setflags(write=False)
        object.__setattr__(self, "values", x)

    @property
    def k(self) -> int:
        return int(self.values.shape[1])


def cbar(model) -> float:
    """E[cos(angle error)] for a NoiseModel or an AngleLaw."""
    law = model.angle if isinstance(model, NoiseModel) else model
    if law.scale == 0 and law.kind != "custom":
        return 1.0
    if law.kind == "gaussian":
        return math.exp(-0.5 * law.scale ** 2)
    if law.kind == "uniform":
        return math.sin(law.scale) / law.scale
    val, _ = integrate.quad(lambda t: math.cos(t) * law.pdf(t), -law.support, law.support,
                            epsabs=1e-12, epsrel=1e-12, limit=200)
    return val


def _values(truth) -> np.ndarray:
    if isinstance(truth, GroundTruth):
        return truth.values
    x = np.asarray(truth, dtype=float)
    return x[:, None] if x.ndim == 1 else x


def edge_rng(seed, edge: int) -> np.random.Generator:
    """Independent stream per (seed, edge), unaffected by iteration order."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(int(edge),)))


def range_angle_errors(delta, model: NoiseModel, rng: np.random.Generator, size: int,
                       correct: bool = True) -> np.ndarray:
    """Errors zeta - delta for ``size`` range/bearing draws on relative vector ``delta``.

    With ``correct=False`` the 1/c division is skipped (biased conversion).
    """
    delta = np.asarray(delta, dtype=float)
    r = float(np.hypot(*delta))
    if r == 0:
        raise ValueError("coincident endpoints: bearing undefined")
    theta = math.atan2(delta[1], delta[0])
    dr = rng.normal(0.0, model.sigma_r, size) if model.sigma_r > 0 else np.zeros(size)
    dth = model.angle.sample(rng, size) if model.angle.scale > 0 else np.zeros(size)
    c = cbar(model) if correct else 1.0
    r_hat, th_hat = r + dr, theta + dth
    zeta = np.column_stack([r_hat * np.cos(th_hat), r_hat * np.sin(th_hat)]) / c
    return zeta - delta


def synth_range_angle(truth, edges, model: NoiseModel, seed=0, correct: bool = True) -> np.ndarray:
    """One converted range/bearing measurement of x_tail - x_head per edge."""
    truth = _values(truth)
    if truth.shape[1] != 2:
        raise ValueError("range/angle measurements need planar (k = 2) positions")
    out = []
    for e, (t, h) in enumerate(edges):
        delta = truth[t] - truth[h]
        out.append(delta + range_angle_errors(delta, model, edge_rng(seed, e), 1, correct)[0])
    return np.array(out).reshape(-1, 2)


def synth_gaussian(truth, edges, cov, seed=0) -> np.ndarray:
    """z_e = x_tail - x_head + N(0, P_e), one independent stream per edge.

    ``cov`` is a single k x k block or one block per edge.
    """
    truth = _values(truth)
    k = truth.shape[1]
    edges = list(edges)
    cov = np.asarray(cov, dtype=float)
    blocks = np.broadcast_to(cov.reshape(-1, k, k), (len(edges), k, k))
    out = np.empty((len(edges), k))
    for e, (t, h) in enumerate(edges):
        chol = np.linalg.cholesky(blocks[e])
        out[e] = truth[t] - truth[h] + chol @ edge_rng(seed, e).standard_normal(k)
    return out


def empirical_edge_covariance(model: NoiseModel, delta, draws: int = 10_000, seed=0,
                              floor: float = 1e-9) -> np.ndarray:
    """Sample covariance of the converted range/bearing error, eigenvalues floored."""
    if draws < 1000:
        raise ValueError("need at least 1000 draws")
    err = range_angle_errors(delta, model, np.random.default_rng(seed), draws)
    cov = np.atleast_2d(np.cov(err, rowvar=False))
    w, v = np.linalg.eigh(0.5 * (cov + cov.T))
    return (v * np.maximum(w, floor)) @ v.T
