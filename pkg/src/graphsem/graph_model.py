"""Attributed temporal graph patterns and their JSON corpus format.

A graph pattern is a time-layered DAG: every vertex sits on an integer
time layer and every edge connects a vertex to one in the next layer.
Vertices carry a pixel weight, a multivariate Gaussian and a divergence
scalar; edges carry a time delay, a pixel flow, a Gaussian evolution
magnitude and a mutual information value.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Mapping

import numpy as np

__all__ = [
    "CorpusFormatError",
    "CorpusValidationError",
    "GraphNotFoundError",
    "GaussianParams",
    "Vertex",
    "Edge",
    "GraphPattern",
    "Corpus",
    "ValidationIssue",
    "ValidationReport",
    "validate_graph",
    "load_corpus",
    "save_corpus",
    "canonical_corpus_id",
]

# Covariances are accepted as positive definite when the smallest
# eigenvalue exceeds this ratio of the largest one.
_EIGENVALUE_FLOOR_RATIO = 1e-10
_SYMMETRY_TOL = 1e-12


class CorpusFormatError(ValueError):
    """Corpus bytes are not well-formed (syntax or schema)."""

    def __init__(self, message: str, *, offset: int | None = None, path: str | None = None):
        detail = message
        if path is not None:
            detail = f"{path}: {message}"
        if offset is not None:
            detail = f"{detail} (byte offset {offset})"
        super().__init__(detail)
        self.offset = offset
        self.path = path


class CorpusValidationError(ValueError):
    """A parsed corpus violates a structural invariant."""

    def __init__(self, message: str, *, graph_id: str | None = None,
                 report: "ValidationReport | None" = None):
        super().__init__(message)
        self.graph_id = graph_id
        self.report = report


class GraphNotFoundError(KeyError):
    """Lookup of an unknown graph id."""

    def __init__(self, graph_id: str):
        super().__init__(graph_id)
        self.graph_id = graph_id

    def __str__(self) -> str:
        return f"unknown graph id {self.graph_id!r}"


@dataclass(frozen=True)
class ValidationIssue:
    code: str
    location: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple[ValidationIssue, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.issues

    def codes(self) -> set[str]:
        return {issue.code for issue in self.issues}


@dataclass(frozen=True, eq=False)
class GaussianParams:
    """Mean vector and covariance matrix of one spatial class."""

    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean, dtype=np.float64)
        cov = np.asarray(self.covariance, dtype=np.float64)
        if mean.ndim != 1:
            raise ValueError("mean must be a 1-D vector")
        if cov.shape != (mean.size, mean.size):
            raise ValueError(f"covariance must be {mean.size}x{mean.size}, got {cov.shape}")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)

    @property
    def dimension(self) -> int:
        return self.mean.size

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GaussianParams):
            return NotImplemented
        return (np.array_equal(self.mean, other.mean)
                and np.array_equal(self.covariance, other.covariance))


@dataclass(frozen=True, eq=False)
class Vertex:
    id: str
    time_index: int
    pixel_weight: float
    gaussian: GaussianParams
    divergence: float

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Vertex):
            return NotImplemented
        return (self.id == other.id
                and self.time_index == other.time_index
                and self.pixel_weight == other.pixel_weight
                and self.gaussian == other.gaussian
                and self.divergence == other.divergence)


@dataclass(frozen=True)
class Edge:
    from_id: str
    to_id: str
    time_delay: float
    pixel_flow: float
    gaussian_evolution: float
    mutual_information: float


@dataclass(frozen=True, eq=False)
class GraphPattern:
    id: str
    vertices: tuple[Vertex, ...]
    edges: tuple[Edge, ...]
    metadata: Mapping[str, Any] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", tuple(self.edges))

    @cached_property
    def vertex_index(self) -> dict[str, Vertex]:
        return {v.id: v for v in self.vertices}

    @cached_property
    def layer_count(self) -> int:
        return max(v.time_index for v in self.vertices) + 1 if self.vertices else 0

    @cached_property
    def layers(self) -> dict[int, tuple[Vertex, ...]]:
        by_layer: dict[int, list[Vertex]] = {}
        for v in self.vertices:
            by_layer.setdefault(v.time_index, []).append(v)
        return {t: tuple(vs) for t, vs in by_layer.items()}

    def vertex(self, vertex_id: str) -> Vertex:
        return self.vertex_index[vertex_id]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GraphPattern):
            return NotImplemented
        return (self.id == other.id
                and self.vertices == other.vertices
                and self.edges == other.edges
                and self.metadata == other.metadata)


@dataclass(frozen=True, eq=False)
class Corpus:
    feature_dimension: int
    graphs: Mapping[str, GraphPattern]

    def graph(self, graph_id: str) -> GraphPattern:
        try:
            return self.graphs[graph_id]
        except KeyError:
            raise GraphNotFoundError(graph_id) from None

    def __len__(self) -> int:
        return len(self.graphs)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Corpus):
            return NotImplemented
        return (self.feature_dimension == other.feature_dimension
                and dict(self.graphs) == dict(other.graphs))


def _finite(x: float) -> bool:
    return bool(np.isfinite(x))


def validate_graph(graph: GraphPattern, feature_dimension: int) -> ValidationReport:
    """Check every structural invariant of ``graph`` and report violations.

    Validation never raises; it accumulates one issue per violated
    invariant so corpus problems can be reported in full.
    """
    issues: list[ValidationIssue] = []

    def add(code: str, location: str, message: str) -> None:
        issues.append(ValidationIssue(code, location, message))

    if not graph.vertices:
        add("empty_graph", "graph", "graph has no vertices")
        return ValidationReport(tuple(issues))

    seen_vertex_ids: set[str] = set()
    for v in graph.vertices:
        loc = f"vertex {v.id}"
        if v.id in seen_vertex_ids:
            add("duplicate_vertex_id", loc, f"vertex id {v.id!r} appears more than once")
        seen_vertex_ids.add(v.id)
        if v.time_index < 0:
            add("negative_time_index", loc, f"time_index {v.time_index} is negative")
        if not _finite(v.pixel_weight):
            add("non_finite_attribute", loc, "pixel_weight is not finite")
        elif v.pixel_weight < 0:
            add("negative_pixel_weight", loc, f"pixel_weight {v.pixel_weight} is negative")
        if not _finite(v.divergence):
            add("non_finite_attribute", loc, "divergence is not finite")
        elif v.divergence < 0:
            add("negative_divergence", loc, f"divergence {v.divergence} is negative")

        g = v.gaussian
        if g.dimension != feature_dimension:
            add("gaussian_dimension_mismatch", loc,
                f"gaussian dimension {g.dimension} != corpus dimension {feature_dimension}")
        if not (np.isfinite(g.mean).all() and np.isfinite(g.covariance).all()):
            add("non_finite_gaussian", loc, "gaussian parameters contain non-finite values")
        else:
            asym = float(np.abs(g.covariance - g.covariance.T).max()) if g.dimension else 0.0
            if asym > _SYMMETRY_TOL:
                add("covariance_not_symmetric", loc,
                    f"covariance asymmetry {asym:.3e} exceeds {_SYMMETRY_TOL}")
            eigenvalues = np.linalg.eigvalsh((g.covariance + g.covariance.T) / 2.0)
            smallest, largest = float(eigenvalues[0]), float(eigenvalues[-1])
            if smallest <= 0 or smallest <= _EIGENVALUE_FLOOR_RATIO * abs(largest):
                add("covariance_not_positive_definite", loc,
                    f"smallest eigenvalue {smallest:.3e} fails the positive-definite check")

    layer_set = {v.time_index for v in graph.vertices}
    max_layer = max(layer_set)
    if layer_set != set(range(max_layer + 1)):
        missing = sorted(set(range(max_layer + 1)) - layer_set)
        add("layers_not_contiguous", "graph",
            f"time layers must cover 0..{max_layer}; missing {missing}")

    vertex_by_id = {v.id: v for v in graph.vertices}
    seen_edges: set[tuple[str, str]] = set()
    for e in graph.edges:
        loc = f"edge {e.from_id}->{e.to_id}"
        if (e.from_id, e.to_id) in seen_edges:
            add("duplicate_edge", loc, "duplicate (from, to) pair")
        seen_edges.add((e.from_id, e.to_id))
        src = vertex_by_id.get(e.from_id)
        dst = vertex_by_id.get(e.to_id)
        if src is None:
            add("unknown_vertex_ref", loc, f"from vertex {e.from_id!r} does not exist")
        if dst is None:
            add("unknown_vertex_ref", loc, f"to vertex {e.to_id!r} does not exist")
        if src is not None and dst is not None and dst.time_index != src.time_index + 1:
            add("non_consecutive_layers", loc,
                f"edge spans layers {src.time_index}->{dst.time_index}; must be consecutive")
        if not _finite(e.time_delay):
            add("non_finite_attribute", loc, "time_delay is not finite")
        elif e.time_delay <= 0:
            add("nonpositive_time_delay", loc, f"time_delay {e.time_delay} must be > 0")
        for name, value in (("pixel_flow", e.pixel_flow),
                            ("gaussian_evolution", e.gaussian_evolution),
                            ("mutual_information", e.mutual_information)):
            if not _finite(value):
                add("non_finite_attribute", loc, f"{name} is not finite")
            elif value < 0:
                add(f"negative_{name}", loc, f"{name} {value} is negative")

    return ValidationReport(tuple(issues))


# ---------------------------------------------------------------------------
# JSON corpus format
# ---------------------------------------------------------------------------

def _expect(payload: Any, expected_type: type, path: str) -> Any:
    if not isinstance(payload, expected_type):
        raise CorpusFormatError(
            f"expected {expected_type.__name__}, got {type(payload).__name__}", path=path)
    return payload


def _get(obj: Mapping[str, Any], key: str, expected_type: type, path: str) -> Any:
    if key not in obj:
        raise CorpusFormatError(f"missing key {key!r}", path=path)
    value = obj[key]
    if expected_type is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise CorpusFormatError(f"key {key!r} must be a number", path=path)
        return float(value)
    if expected_type is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise CorpusFormatError(f"key {key!r} must be an integer", path=path)
        return value
    return _expect(value, expected_type, f"{path}.{key}")


def _parse_matrix(raw: Any, path: str) -> np.ndarray:
    rows = _expect(raw, list, path)
    if not rows:
        raise CorpusFormatError("covariance must be non-empty", path=path)
    width = None
    for i, row in enumerate(rows):
        cells = _expect(row, list, f"{path}[{i}]")
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise CorpusFormatError("covariance rows have unequal lengths", path=path)
        for j, cell in enumerate(cells):
            if isinstance(cell, bool) or not isinstance(cell, (int, float)):
                raise CorpusFormatError("covariance entries must be numbers",
                                        path=f"{path}[{i}][{j}]")
    if width != len(rows):
        raise CorpusFormatError("covariance must be square", path=path)
    return np.asarray(rows, dtype=np.float64)


def _parse_vector(raw: Any, path: str) -> np.ndarray:
    cells = _expect(raw, list, path)
    if not cells:
        raise CorpusFormatError("mean must be non-empty", path=path)
    for i, cell in enumerate(cells):
        if isinstance(cell, bool) or not isinstance(cell, (int, float)):
            raise CorpusFormatError("mean entries must be numbers", path=f"{path}[{i}]")
    return np.asarray(cells, dtype=np.float64)


def _parse_graph(raw: Any, path: str) -> GraphPattern:
    obj = _expect(raw, dict, path)
    graph_id = _get(obj, "id", str, path)
    vertices = []
    for i, raw_vertex in enumerate(_get(obj, "vertices", list, path)):
        vpath = f"{path}.vertices[{i}]"
        vobj = _expect(raw_vertex, dict, vpath)
        vertices.append(Vertex(
            id=_get(vobj, "id", str, vpath),
            time_index=_get(vobj, "time_index", int, vpath),
            pixel_weight=_get(vobj, "pixel_weight", float, vpath),
            gaussian=GaussianParams(
                mean=_parse_vector(vobj.get("mean"), f"{vpath}.mean"),
                covariance=_parse_matrix(vobj.get("covariance"), f"{vpath}.covariance"),
            ),
            divergence=_get(vobj, "divergence", float, vpath),
        ))
    edges = []
    for i, raw_edge in enumerate(_get(obj, "edges", list, path)):
        epath = f"{path}.edges[{i}]"
        eobj = _expect(raw_edge, dict, epath)
        edges.append(Edge(
            from_id=_get(eobj, "from", str, epath),
            to_id=_get(eobj, "to", str, epath),
            time_delay=_get(eobj, "time_delay", float, epath),
            pixel_flow=_get(eobj, "pixel_flow", float, epath),
            gaussian_evolution=_get(eobj, "gaussian_evolution", float, epath),
            mutual_information=_get(eobj, "mutual_information", float, epath),
        ))
    metadata = obj.get("metadata")
    if metadata is not None and not isinstance(metadata, dict):
        raise CorpusFormatError("metadata must be an object or null", path=f"{path}.metadata")
    return GraphPattern(id=graph_id, vertices=tuple(vertices), edges=tuple(edges),
                        metadata=metadata)


def load_corpus(data: bytes | str) -> Corpus:
    """Parse corpus bytes; returns a fully validated Corpus or raises.

    Syntax errors raise :class:`CorpusFormatError` with a byte offset;
    invariant violations raise :class:`CorpusValidationError` naming the
    offending graph. The parse is total: no partially built corpus ever
    escapes.
    """
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CorpusFormatError(f"invalid UTF-8: {exc.reason}", offset=exc.start) from None
    else:
        text = data
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CorpusFormatError(exc.msg, offset=exc.pos) from None

    root = _expect(payload, dict, "$")
    feature_dimension = _get(root, "feature_dimension", int, "$")
    if feature_dimension < 1:
        raise CorpusValidationError(
            f"feature_dimension must be >= 1, got {feature_dimension}")

    graphs: dict[str, GraphPattern] = {}
    for i, raw_graph in enumerate(_get(root, "graphs", list, "$")):
        graph = _parse_graph(raw_graph, f"$.graphs[{i}]")
        if graph.id in graphs:
            raise CorpusValidationError(f"duplicate graph id {graph.id!r}",
                                        graph_id=graph.id)
        graphs[graph.id] = graph

    for graph in graphs.values():
        report = validate_graph(graph, feature_dimension)
        if not report.ok:
            first = report.issues[0]
            raise CorpusValidationError(
                f"graph {graph.id!r}: {first.message} [{first.code}]",
                graph_id=graph.id, report=report)

    return Corpus(feature_dimension=feature_dimension, graphs=graphs)


def _vertex_to_jsonable(v: Vertex) -> dict[str, Any]:
    return {
        "id": v.id,
        "time_index": int(v.time_index),
        "pixel_weight": float(v.pixel_weight),
        "mean": v.gaussian.mean.tolist(),
        "covariance": v.gaussian.covariance.tolist(),
        "divergence": float(v.divergence),
    }


def _edge_to_jsonable(e: Edge) -> dict[str, Any]:
    return {
        "from": e.from_id,
        "to": e.to_id,
        "time_delay": float(e.time_delay),
        "pixel_flow": float(e.pixel_flow),
        "gaussian_evolution": float(e.gaussian_evolution),
        "mutual_information": float(e.mutual_information),
    }


def graph_to_jsonable(graph: GraphPattern) -> dict[str, Any]:
    return {
        "id": graph.id,
        "vertices": [_vertex_to_jsonable(v) for v in graph.vertices],
        "edges": [_edge_to_jsonable(e) for e in graph.edges],
        "metadata": dict(graph.metadata) if graph.metadata is not None else None,
    }


def save_corpus(corpus: Corpus) -> bytes:
    """Serialize to the JSON corpus format; deterministic byte output."""
    payload = {
        "feature_dimension": int(corpus.feature_dimension),
        "graphs": [graph_to_jsonable(g) for g in corpus.graphs.values()],
    }
    return (json.dumps(payload, indent=2, allow_nan=False) + "\n").encode("utf-8")


def canonical_corpus_id(corpus: Corpus) -> str:
    """Content-derived corpus identifier, stable across formatting."""
    return hashlib.sha256(save_corpus(corpus)).hexdigest()[:12]
