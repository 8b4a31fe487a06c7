"""Synthetic corpora with planted classes for retrieval benchmarks.

Each class owns a topology skeleton (layer sizes, trajectory edges,
optional split/merge branches, per-vertex covariances) drawn once from
the class RNG, so with zero spread all graphs of a class are
attribute-identical. Per-graph attribute values jitter around the class
prototype values with the configured spread. Ground truth is returned
as a separate id-to-label map, never embedded in the patterns.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph_model import Corpus, Edge, GaussianParams, GraphPattern, Vertex

__all__ = ["AttributeCenters", "ClassSpec", "generate_corpus", "GENERATOR_NAME"]

GENERATOR_NAME = "pcg64"

_MIN_TIME_DELAY = 1e-6


@dataclass(frozen=True)
class AttributeCenters:
    """Class prototype value for each attribute-bearing field."""

    pixel_weight: float
    gaussian_mean: float
    divergence: float
    time_delay: float
    pixel_flow: float
    gaussian_evolution: float
    mutual_information: float


@dataclass(frozen=True)
class ClassSpec:
    class_label: str
    count: int
    layers: int
    vertices_per_layer: tuple[int, int]
    centers: AttributeCenters
    within_class_spread: float = 0.0
    split_merge_rate: float = 0.0


def _validate_specs(specs: list[ClassSpec], feature_dimension: int) -> None:
    if not specs:
        raise ValueError("need at least one class spec")
    if feature_dimension < 1:
        raise ValueError("feature_dimension must be >= 1")
    labels = set()
    for spec in specs:
        if not spec.class_label:
            raise ValueError("class_label must be non-empty")
        if spec.class_label in labels:
            raise ValueError(f"duplicate class label {spec.class_label!r}")
        labels.add(spec.class_label)
        if spec.count < 1:
            raise ValueError(f"class {spec.class_label!r}: count must be >= 1")
        if spec.layers < 1:
            raise ValueError(f"class {spec.class_label!r}: layers must be >= 1")
        lo, hi = spec.vertices_per_layer
        if lo < 1 or hi < lo:
            raise ValueError(f"class {spec.class_label!r}: bad vertices_per_layer ({lo}, {hi})")
        if spec.within_class_spread < 0:
            raise ValueError(f"class {spec.class_label!r}: spread must be >= 0")
        if not (0.0 <= spec.split_merge_rate <= 1.0):
            raise ValueError(f"class {spec.class_label!r}: split_merge_rate must be in [0, 1]")
        if spec.centers.time_delay <= 0:
            raise ValueError(f"class {spec.class_label!r}: time_delay center must be > 0")
        for name in ("pixel_weight", "divergence", "pixel_flow",
                     "gaussian_evolution", "mutual_information"):
            if getattr(spec.centers, name) < 0:
                raise ValueError(f"class {spec.class_label!r}: {name} center must be >= 0")


@dataclass(frozen=True)
class _Skeleton:
    """Per-class topology shared by all graphs of the class."""

    layer_sizes: tuple[int, ...]
    edges: tuple[tuple[tuple[int, int], tuple[int, int]], ...]  # ((t, i), (t+1, j))
    cov_diagonals: dict[tuple[int, int], np.ndarray]


def _build_skeleton(spec: ClassSpec, rng: np.random.Generator,
                    feature_dimension: int) -> _Skeleton:
    sizes = tuple(int(rng.integers(spec.vertices_per_layer[0],
                                   spec.vertices_per_layer[1] + 1))
                  for _ in range(spec.layers))
    edges: list[tuple[tuple[int, int], tuple[int, int]]] = []
    edge_set: set[tuple[tuple[int, int], tuple[int, int]]] = set()

    def add_edge(src: tuple[int, int], dst: tuple[int, int]) -> None:
        if (src, dst) not in edge_set:
            edge_set.add((src, dst))
            edges.append((src, dst))

    for t in range(spec.layers - 1):
        n_src, n_dst = sizes[t], sizes[t + 1]
        for j in range(n_dst):
            add_edge((t, j % n_src), (t + 1, j))
        if rng.random() < spec.split_merge_rate:
            if rng.integers(2) == 0 and n_src > 1:
                # merge: a second parent feeds child 0
                add_edge((t, 1 % n_src), (t + 1, 0))
            elif n_dst > 1:
                # split: parent of child 0 also feeds child 1
                add_edge((t, 0), (t + 1, 1))

    cov_diagonals = {
        (t, i): rng.uniform(0.5, 2.0, size=feature_dimension)
        for t in range(spec.layers)
        for i in range(sizes[t])
    }
    return _Skeleton(layer_sizes=sizes, edges=tuple(edges), cov_diagonals=cov_diagonals)


def _jitter(rng: np.random.Generator, center: float, spread: float,
            floor: float = 0.0) -> float:
    return max(center + spread * float(rng.standard_normal()), floor)


def _build_graph(graph_id: str, spec: ClassSpec, skeleton: _Skeleton,
                 rng: np.random.Generator, feature_dimension: int,
                 seed: int) -> GraphPattern:
    c = spec.centers
    spread = spec.within_class_spread
    vertices = []
    for t, size in enumerate(skeleton.layer_sizes):
        for i in range(size):
            mean = c.gaussian_mean + spread * rng.standard_normal(feature_dimension)
            vertices.append(Vertex(
                id=f"v{t}_{i}",
                time_index=t,
                pixel_weight=_jitter(rng, c.pixel_weight, spread),
                gaussian=GaussianParams(
                    mean=mean,
                    covariance=np.diag(skeleton.cov_diagonals[(t, i)]),
                ),
                divergence=_jitter(rng, c.divergence, spread),
            ))
    edges = []
    for (t, i), (t_next, j) in skeleton.edges:
        edges.append(Edge(
            from_id=f"v{t}_{i}",
            to_id=f"v{t_next}_{j}",
            time_delay=_jitter(rng, c.time_delay, spread, floor=_MIN_TIME_DELAY),
            pixel_flow=_jitter(rng, c.pixel_flow, spread),
            gaussian_evolution=_jitter(rng, c.gaussian_evolution, spread),
            mutual_information=_jitter(rng, c.mutual_information, spread),
        ))
    return GraphPattern(
        id=graph_id,
        vertices=tuple(vertices),
        edges=tuple(edges),
        metadata={"generator": GENERATOR_NAME, "seed": seed},
    )


def generate_corpus(specs: list[ClassSpec], feature_dimension: int,
                    seed: int) -> tuple[Corpus, dict[str, str]]:
    """Deterministically generate a corpus plus its ground-truth map.

    The same (specs, dimension, seed) triple always produces the same
    bytes when saved. Class RNG streams are spawned from the seed so
    adding a class never perturbs the preceding ones.
    """
    _validate_specs(specs, feature_dimension)
    root = np.random.SeedSequence(seed)
    class_sequences = root.spawn(len(specs))

    graphs: dict[str, GraphPattern] = {}
    ground_truth: dict[str, str] = {}
    for spec, sequence in zip(specs, class_sequences):
        skeleton_seq, graphs_seq = sequence.spawn(2)
        skeleton = _build_skeleton(spec, np.random.Generator(np.random.PCG64(skeleton_seq)),
                                   feature_dimension)
        graph_rng = np.random.Generator(np.random.PCG64(graphs_seq))
        for k in range(spec.count):
            graph_id = f"{spec.class_label}-{k:03d}"
            if graph_id in graphs:
                raise ValueError(f"duplicate graph id {graph_id!r}")
            graph = _build_graph(graph_id, spec, skeleton, graph_rng,
                                 feature_dimension, seed)
            graphs[graph_id] = graph
            ground_truth[graph_id] = spec.class_label

    return Corpus(feature_dimension=feature_dimension, graphs=graphs), ground_truth
