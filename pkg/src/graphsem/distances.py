"""Per-attribute distance models and cost normalization.

Seven attribute channels drive pattern similarity: three live on
vertices (pixel weight, Gaussian, divergence) and four on edges (time
delay, pixel flow, Gaussian evolution, mutual information). Scalar
attributes compare by absolute difference; Gaussians by symmetrized
Kullback-Leibler divergence. Raw per-attribute matching costs are
mapped into [0, 1] by dividing by corpus-wide maxima and clamping.
"""

from __future__ import annotations

import enum
import math
from typing import TYPE_CHECKING

import numpy as np

from .graph_model import Corpus, Edge, GaussianParams, GraphPattern, Vertex

if TYPE_CHECKING:
    from .matcher import MatchConfig

__all__ = [
    "AttributeId",
    "N_ATTRIBUTES",
    "VERTEX_ATTRIBUTES",
    "EDGE_ATTRIBUTES",
    "ATTRIBUTE_NAMES",
    "scalar_distance",
    "gaussian_divergence",
    "vertex_cost_vector",
    "edge_cost_vector",
    "compute_scales",
    "normalize",
    "unit_weights",
]


class AttributeId(enum.IntEnum):
    """Fixed, order-significant enumeration of the attribute channels."""

    PIXEL_WEIGHT = 0
    GAUSSIAN = 1
    DIVERGENCE = 2
    TIME_DELAY = 3
    PIXEL_FLOW = 4
    GAUSSIAN_EVOLUTION = 5
    MUTUAL_INFORMATION = 6

    @property
    def json_name(self) -> str:
        return self.name.lower()


N_ATTRIBUTES = len(AttributeId)
VERTEX_ATTRIBUTES = (AttributeId.PIXEL_WEIGHT, AttributeId.GAUSSIAN, AttributeId.DIVERGENCE)
EDGE_ATTRIBUTES = (AttributeId.TIME_DELAY, AttributeId.PIXEL_FLOW,
                   AttributeId.GAUSSIAN_EVOLUTION, AttributeId.MUTUAL_INFORMATION)
ATTRIBUTE_NAMES = tuple(a.json_name for a in AttributeId)


def unit_weights() -> np.ndarray:
    """All-ones weight vector; the neutral weighting for scale passes."""
    return np.ones(N_ATTRIBUTES, dtype=np.float64)


def scalar_distance(a: float, b: float) -> float:
    """Absolute difference of two finite scalars."""
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError(f"scalar_distance requires finite inputs, got ({a}, {b})")
    return abs(a - b)


def gaussian_divergence(p: GaussianParams, q: GaussianParams) -> float:
    """Symmetrized KL divergence KL(p||q) + KL(q||p).

    Uses the closed form for multivariate Gaussians; in the symmetrized
    sum the log-determinant terms cancel, leaving
    ``(tr(Sq^-1 Sp) + tr(Sp^-1 Sq) + d^T (Sp^-1 + Sq^-1) d - 2 dim) / 2``
    with ``d`` the mean difference. Symmetric, and zero exactly when
    the parameters are identical; that case is short-circuited so
    self-comparisons are exact zeros rather than rounding residue.
    """
    if p.dimension != q.dimension:
        raise ValueError(f"dimension mismatch: {p.dimension} vs {q.dimension}")
    if np.array_equal(p.mean, q.mean) and np.array_equal(p.covariance, q.covariance):
        return 0.0
    d = p.dimension
    delta = q.mean - p.mean
    # one factorization per covariance solves both the trace and the
    # Mahalanobis terms
    solved_q = np.linalg.solve(q.covariance, np.column_stack((p.covariance, delta)))
    solved_p = np.linalg.solve(p.covariance, np.column_stack((q.covariance, delta)))
    traces = float(np.trace(solved_q[:, :d])) + float(np.trace(solved_p[:, :d]))
    mahalanobis = float(delta @ solved_q[:, d]) + float(delta @ solved_p[:, d])
    return max(0.5 * (traces + mahalanobis - 2.0 * d), 0.0)


def vertex_cost_vector(v1: Vertex, v2: Vertex) -> np.ndarray:
    """Raw attribute distances of a vertex pair; edge channels stay 0."""
    if v1.gaussian.dimension != v2.gaussian.dimension:
        raise ValueError("vertex feature dimensions differ")
    costs = np.zeros(N_ATTRIBUTES, dtype=np.float64)
    costs[AttributeId.PIXEL_WEIGHT] = scalar_distance(v1.pixel_weight, v2.pixel_weight)
    costs[AttributeId.GAUSSIAN] = gaussian_divergence(v1.gaussian, v2.gaussian)
    costs[AttributeId.DIVERGENCE] = scalar_distance(v1.divergence, v2.divergence)
    return costs


def edge_cost_vector(e1: Edge, e2: Edge) -> np.ndarray:
    """Raw attribute distances of an edge pair; vertex channels stay 0."""
    costs = np.zeros(N_ATTRIBUTES, dtype=np.float64)
    costs[AttributeId.TIME_DELAY] = scalar_distance(e1.time_delay, e2.time_delay)
    costs[AttributeId.PIXEL_FLOW] = scalar_distance(e1.pixel_flow, e2.pixel_flow)
    costs[AttributeId.GAUSSIAN_EVOLUTION] = scalar_distance(
        e1.gaussian_evolution, e2.gaussian_evolution)
    costs[AttributeId.MUTUAL_INFORMATION] = scalar_distance(
        e1.mutual_information, e2.mutual_information)
    return costs


def compute_scales(corpus: Corpus, reference: GraphPattern,
                   config: "MatchConfig | None" = None) -> np.ndarray:
    """Per-attribute normalization denominators for a reference graph.

    For each attribute the scale is the maximum, over the corpus, of
    that attribute's share of the optimal joint matching cost against
    the reference (matched with neutral weights and unit scales, beam
    disabled so maxima are exact). Attributes whose maximum is 0 get
    scale 1, making them neutral after normalization.
    """
    from .matcher import MatchConfig, match

    if not corpus.graphs:
        raise ValueError("corpus is empty")
    if config is None:
        config = MatchConfig()
    scale_config = MatchConfig(beam_width=0, deletion_penalty=config.deletion_penalty)
    ones = np.ones(N_ATTRIBUTES, dtype=np.float64)
    maxima = np.zeros(N_ATTRIBUTES, dtype=np.float64)
    for graph in corpus.graphs.values():
        result = match(reference, graph, unit_weights(), ones, scale_config)
        maxima = np.maximum(maxima, result.per_attribute)
    maxima[maxima == 0.0] = 1.0
    return maxima


def normalize(raw: np.ndarray, scales: np.ndarray) -> np.ndarray:
    """Map raw per-attribute costs into [0, 1]: min(raw/scale, 1)."""
    raw = np.asarray(raw, dtype=np.float64)
    scales = np.asarray(scales, dtype=np.float64)
    if raw.shape != (N_ATTRIBUTES,) or scales.shape != (N_ATTRIBUTES,):
        raise ValueError("cost and scale vectors must have one entry per attribute")
    if not np.all(scales > 0) or not np.all(np.isfinite(scales)):
        raise ValueError("scales must be positive and finite")
    if np.any(raw < 0) or not np.all(np.isfinite(raw)):
        raise ValueError("raw costs must be nonnegative and finite")
    return np.minimum(raw / scales, 1.0)
