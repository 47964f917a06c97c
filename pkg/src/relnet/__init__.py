"""Estimation from noisy relative measurements on graphs.

Optimal (BLUE) estimation, its matrix-valued electrical-network analogue,
graph drawings and embeddings, and experiments on how estimation error grows
with distance from the reference node.
"""

from .graph import (Embedding, Graph, GraphBuilder, graphical_distance, h_fuzz,
                    verify_embedding, weakly_connected)
from .network import GeneralizedNetwork, MeasurementNetwork, Network, merge_parallel
from .estimator import BlueResult, blue_covariance, blue_solve, nested_convergence
from .electrical import effective_resistance

__version__ = "0.1.0"
