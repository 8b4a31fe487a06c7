"""Shared strategies and builders for the test suite."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import strategies as st

from graphsem import (
    AttributeCenters,
    ClassSpec,
    Corpus,
    Edge,
    GaussianParams,
    GraphPattern,
    Vertex,
    generate_corpus,
)

# ---------------------------------------------------------------------------
# Seeded numpy builders (deterministic; used by acceptance-style tests)
# ---------------------------------------------------------------------------


def random_gaussian(rng: np.random.Generator, d: int) -> GaussianParams:
    return GaussianParams(
        mean=rng.normal(0.0, 1.0, d),
        covariance=np.diag(rng.uniform(0.5, 2.0, d)),
    )


def random_graph(rng: np.random.Generator, graph_id: str, d: int = 2,
                 max_layers: int = 2, max_width: int = 2,
                 edge_prob: float = 0.8) -> GraphPattern:
    """Random valid pattern with small, matcher-friendly dimensions."""
    n_layers = int(rng.integers(1, max_layers + 1))
    vertices: list[Vertex] = []
    by_layer: dict[int, list[Vertex]] = {}
    for t in range(n_layers):
        width = int(rng.integers(1, max_width + 1))
        for i in range(width):
            v = Vertex(
                id=f"v{t}_{i}",
                time_index=t,
                pixel_weight=float(rng.uniform(0.0, 1.0)),
                gaussian=random_gaussian(rng, d),
                divergence=float(rng.uniform(0.0, 2.0)),
            )
            vertices.append(v)
            by_layer.setdefault(t, []).append(v)
    edges: list[Edge] = []
    for t in range(n_layers - 1):
        for dst in by_layer[t + 1]:
            if rng.random() < edge_prob:
                src = by_layer[t][int(rng.integers(0, len(by_layer[t])))]
                edges.append(Edge(
                    from_id=src.id,
                    to_id=dst.id,
                    time_delay=float(rng.uniform(0.5, 2.0)),
                    pixel_flow=float(rng.uniform(0.0, 1.0)),
                    gaussian_evolution=float(rng.uniform(0.0, 1.0)),
                    mutual_information=float(rng.uniform(0.0, 1.0)),
                ))
    return GraphPattern(id=graph_id, vertices=tuple(vertices), edges=tuple(edges))


def random_corpus(rng: np.random.Generator, n_graphs: int, d: int = 2,
                  **graph_kwargs) -> Corpus:
    graphs = {}
    for k in range(n_graphs):
        g = random_graph(rng, f"g{k:03d}", d=d, **graph_kwargs)
        graphs[g.id] = g
    return Corpus(feature_dimension=d, graphs=graphs)


def planted_specs(separation: float, spread: float, count: int = 20,
                  layers: int = 3) -> list[ClassSpec]:
    """Two classes whose prototype values differ by ``separation``."""
    base = AttributeCenters(
        pixel_weight=0.5, gaussian_mean=0.0, divergence=1.0, time_delay=1.0,
        pixel_flow=0.4, gaussian_evolution=0.3, mutual_information=0.6)
    shifted = AttributeCenters(
        pixel_weight=base.pixel_weight + separation,
        gaussian_mean=base.gaussian_mean + separation,
        divergence=base.divergence + separation,
        time_delay=base.time_delay + separation,
        pixel_flow=base.pixel_flow + separation,
        gaussian_evolution=base.gaussian_evolution + separation,
        mutual_information=base.mutual_information + separation)
    return [
        ClassSpec("pos", count, layers, (2, 2), base,
                  within_class_spread=spread, split_merge_rate=0.5),
        ClassSpec("neg", count, layers, (2, 2), shifted,
                  within_class_spread=spread, split_merge_rate=0.5),
    ]


@pytest.fixture
def planted_corpus():
    corpus, truth = generate_corpus(planted_specs(separation=1.0, spread=0.1), 3, seed=101)
    return corpus, truth


# ---------------------------------------------------------------------------
# Hypothesis strategies
# ---------------------------------------------------------------------------

finite_floats = st.floats(min_value=-5.0, max_value=5.0, allow_nan=False)
nonneg_floats = st.floats(min_value=0.0, max_value=5.0, allow_nan=False)


@st.composite
def gaussian_params_st(draw, d: int = 2):
    mean = np.array([draw(finite_floats) for _ in range(d)])
    diag = np.array([draw(st.floats(min_value=0.5, max_value=2.0)) for _ in range(d)])
    return GaussianParams(mean=mean, covariance=np.diag(diag))


@st.composite
def graph_pattern_st(draw, d: int = 2, max_layers: int = 2, max_width: int = 2,
                     graph_id: str = "g"):
    n_layers = draw(st.integers(min_value=1, max_value=max_layers))
    vertices = []
    by_layer: dict[int, list[Vertex]] = {}
    for t in range(n_layers):
        width = draw(st.integers(min_value=1, max_value=max_width))
        for i in range(width):
            v = Vertex(
                id=f"v{t}_{i}",
                time_index=t,
                pixel_weight=draw(nonneg_floats),
                gaussian=draw(gaussian_params_st(d)),
                divergence=draw(nonneg_floats),
            )
            vertices.append(v)
            by_layer.setdefault(t, []).append(v)
    edges = []
    for t in range(n_layers - 1):
        for dst in by_layer[t + 1]:
            if draw(st.booleans()):
                src_idx = draw(st.integers(min_value=0, max_value=len(by_layer[t]) - 1))
                edges.append(Edge(
                    from_id=by_layer[t][src_idx].id,
                    to_id=dst.id,
                    time_delay=draw(st.floats(min_value=0.1, max_value=3.0)),
                    pixel_flow=draw(nonneg_floats),
                    gaussian_evolution=draw(nonneg_floats),
                    mutual_information=draw(nonneg_floats),
                ))
    return GraphPattern(id=graph_id, vertices=tuple(vertices), edges=tuple(edges))


@st.composite
def corpus_st(draw, d: int = 2, max_graphs: int = 4):
    n = draw(st.integers(min_value=1, max_value=max_graphs))
    graphs = {}
    for k in range(n):
        g = draw(graph_pattern_st(d=d, graph_id=f"g{k:03d}"))
        graphs[g.id] = g
    return Corpus(feature_dimension=d, graphs=graphs)


@st.composite
def phi_st(draw):
    return np.array([draw(st.floats(min_value=0.0, max_value=1.0)) for _ in range(7)])


@st.composite
def scales_st(draw):
    return np.array([draw(st.floats(min_value=0.25, max_value=4.0)) for _ in range(7)])
