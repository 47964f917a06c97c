from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class Drawing:
    """Placement of every node of a graph in R^d (row i is node i)."""

    coords: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float)
        if c.ndim == 1:
            c = c[:, None]
        if c.ndim != 2:
            raise ValueError("coords must be an (n, d) array")
        if not np.all(np.isfinite(c)):
            raise ValueError("drawing has non-finite coordinates")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @property
    def dim(self) -> int:
        return int(self.coords.shape[1])

    @property
    def n(self) -> int:
        return int(self.coords.shape[0])

    @property
    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        return self.coords.min(axis=0), self.coords.max(axis=0)

    def distance(self, u: int, v: int) -> float:
        return float(np.linalg.norm(self.coords[u] - self.coords[v]))

    def scaled(self, factor: float) -> "Drawing":
        return Drawing(self.coords * factor)

    def subset(self, nodes) -> "Drawing":
        return Drawing(self.coords[np.asarray(nodes)])
