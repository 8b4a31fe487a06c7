"""Inexact matching of time-layered attributed graph patterns.

A mapping assigns every vertex of the left graph to a same-layer vertex
of the right graph or to the null marker (deletion); right vertices
left unmatched count as insertions. Layers are aligned at index 0.

The cost of a mapping accumulates, per attribute channel:

* matched vertex/edge pairs: the raw attribute distance divided by that
  attribute's scale (no clamping during search);
* deleted or inserted vertices: ``deletion_penalty`` once per vertex
  attribute;
* dangling edges (an edge present on exactly one side of a matched or
  deleted structure): ``deletion_penalty`` once per edge attribute.

The objective is the weighted sum over attributes of these
accumulators, which is linear in the weights and grows monotonically
along a search path, so prefix cost is an admissible bound. Reported
costs equal the minimized objective: per-attribute totals are the
scale-divided sums without clamping, so they may exceed 1 when a pair
is farther apart than the scale pass ever observed. Consumers that
need [0, 1] semantics clamp on their side.

Exact mode is a best-first branch-and-bound (uniform-cost search seeded
with a greedy incumbent). Beam mode with width ``b`` runs per-depth
truncated searches at widths 1..b and keeps the best completion, which
makes the returned cost monotonically non-increasing in ``b``; a pass
that never truncates is exhaustive and stops the widening early.

Ties between equal-cost mappings break toward the lexicographically
smallest assignment sequence (left vertices in layer order, right
vertex ids ascending, null marker last), so results are deterministic.
"""

from __future__ import annotations

import heapq
import threading
from dataclasses import dataclass

import numpy as np

from .distances import (
    EDGE_ATTRIBUTES,
    N_ATTRIBUTES,
    VERTEX_ATTRIBUTES,
    edge_cost_vector,
    vertex_cost_vector,
)
from .graph_model import GraphPattern

__all__ = [
    "MatchConfig",
    "MatchResult",
    "MatchCancelled",
    "match",
    "brute_force_match",
    "per_attribute_costs",
    "evaluate_mapping",
    "BRUTE_FORCE_VERTEX_LIMIT",
]

BRUTE_FORCE_VERTEX_LIMIT = 10

# Lexicographic markers: real assignments order by vertex id, the null
# marker sorts after every real id.
_NULL_MARKER = (1, "")


class MatchCancelled(RuntimeError):
    """Raised when a cooperative cancellation signal fires mid-search."""


@dataclass(frozen=True)
class MatchConfig:
    """Search knobs: ``beam_width`` 0 means exact branch-and-bound."""

    beam_width: int = 0
    deletion_penalty: float = 1.0

    def __post_init__(self) -> None:
        if self.beam_width < 0:
            raise ValueError("beam_width must be >= 0")
        if not (0.0 < self.deletion_penalty <= 1.0):
            raise ValueError("deletion_penalty must be in (0, 1]")


@dataclass(frozen=True, eq=False)
class MatchResult:
    """Outcome of a match: cost, decomposition, mapping, exactness.

    ``total_cost`` is always the weighted sum of ``per_attribute``.
    """

    total_cost: float
    per_attribute: np.ndarray
    mapping: dict[str, str | None]
    exact: bool


def _check_inputs(g1: GraphPattern, g2: GraphPattern,
                  phi: np.ndarray, scales: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if not g1.vertices or not g2.vertices:
        raise ValueError("patterns must have at least one vertex")
    d1 = g1.vertices[0].gaussian.dimension
    d2 = g2.vertices[0].gaussian.dimension
    if d1 != d2:
        raise ValueError(f"feature dimension mismatch: {d1} vs {d2}")
    phi = np.asarray(phi, dtype=np.float64)
    scales = np.asarray(scales, dtype=np.float64)
    if phi.shape != (N_ATTRIBUTES,):
        raise ValueError("phi must have one weight per attribute")
    if np.any(phi < 0) or np.any(phi > 1) or not np.all(np.isfinite(phi)):
        raise ValueError("phi entries must be finite and in [0, 1]")
    if scales.shape != (N_ATTRIBUTES,):
        raise ValueError("scales must have one entry per attribute")
    if not np.all(scales > 0) or not np.all(np.isfinite(scales)):
        raise ValueError("scales must be positive and finite")
    return phi, scales


class _Problem:
    """Precomputed pair costs, adjacency, and the step schedule.

    The search itself tracks only the scalar objective; per-attribute
    accumulators of the winning mapping are rebuilt afterwards by
    :func:`evaluate_mapping`, which keeps the reported decomposition on
    a single code path for every engine.
    """

    def __init__(self, g1: GraphPattern, g2: GraphPattern,
                 phi: np.ndarray, scales: np.ndarray, config: MatchConfig):
        self.g1 = g1
        self.g2 = g2
        self.phi = phi
        self.scales = scales
        self.config = config

        self.verts1 = list(g1.vertices)
        self.verts2 = list(g2.vertices)
        layers1: dict[int, list[int]] = {}
        for i, v in enumerate(self.verts1):
            layers1.setdefault(v.time_index, []).append(i)
        self.layers2: dict[int, list[int]] = {}
        for j, w in enumerate(self.verts2):
            self.layers2.setdefault(w.time_index, []).append(j)
        for js in self.layers2.values():
            js.sort(key=lambda j: self.verts2[j].id)

        n_layers1 = max(layers1) + 1
        n_layers2 = max(self.layers2) + 1

        # Step schedule: assign every left vertex of layer t, then close
        # layer t (charging unmatched right vertices and their in-edges).
        self.steps: list[tuple[str, int]] = []
        self.assign_positions: list[int] = []
        for t in range(max(n_layers1, n_layers2)):
            for i in layers1.get(t, []):
                self.assign_positions.append(i)
                self.steps.append(("assign", i))
            if t < n_layers2:
                self.steps.append(("close", t))

        # Incoming edges keyed by destination vertex index.
        self.in1: dict[int, list[tuple[int, int]]] = {i: [] for i in range(len(self.verts1))}
        index1 = {v.id: i for i, v in enumerate(self.verts1)}
        self.e1_by_pair: dict[tuple[int, int], int] = {}
        for k, e in enumerate(g1.edges):
            u, v = index1[e.from_id], index1[e.to_id]
            self.in1[v].append((u, k))
            self.e1_by_pair[(u, v)] = k
        self.in2: dict[int, list[tuple[int, int]]] = {j: [] for j in range(len(self.verts2))}
        index2 = {w.id: j for j, w in enumerate(self.verts2)}
        self.e2_by_pair: dict[tuple[int, int], int] = {}
        for k, e in enumerate(g2.edges):
            u, v = index2[e.from_id], index2[e.to_id]
            self.in2[v].append((u, k))
            self.e2_by_pair[(u, v)] = k

        # Weighted scaled costs for same-layer vertex pairs.
        self._vcost: dict[tuple[int, int], float] = {}
        for t, is_ in layers1.items():
            for i in is_:
                for j in self.layers2.get(t, []):
                    delta = vertex_cost_vector(self.verts1[i], self.verts2[j]) / scales
                    self._vcost[(i, j)] = float(phi @ delta)
        self._ecost: dict[tuple[int, int], float] = {}

        pen = config.deletion_penalty
        self.vertex_del_cost = pen * float(sum(phi[a] for a in VERTEX_ATTRIBUTES))
        self.edge_del_cost = pen * float(sum(phi[a] for a in EDGE_ATTRIBUTES))

    def edge_cost(self, k1: int, k2: int) -> float:
        key = (k1, k2)
        cost = self._ecost.get(key)
        if cost is None:
            delta = edge_cost_vector(self.g1.edges[k1], self.g2.edges[k2]) / self.scales
            cost = float(self.phi @ delta)
            self._ecost[key] = cost
        return cost

    def assign_delta(self, i: int, j: int | None, assigned: dict[int, int | None],
                     matched2: dict[int, int]) -> float:
        """Objective increment of extending a prefix with f(v_i) = w_j."""
        if j is None:
            return self.vertex_del_cost + self.edge_del_cost * len(self.in1[i])

        cost = self._vcost[(i, j)]
        for u, k1 in self.in1[i]:
            ju = assigned.get(u)
            k2 = self.e2_by_pair.get((ju, j)) if ju is not None else None
            if k2 is not None:
                cost += self.edge_cost(k1, k2)
            else:
                cost += self.edge_del_cost
        for wu, _k2 in self.in2[j]:
            iu = matched2.get(wu)
            if iu is not None and (iu, i) in self.e1_by_pair:
                continue  # counted as a matched edge pair above
            cost += self.edge_del_cost
        return cost

    def close_delta(self, t: int, used: int) -> float:
        """Charges due when layer ``t`` of the right graph is finalized."""
        cost = 0.0
        for j in self.layers2.get(t, []):
            if used & (1 << j):
                continue
            cost += self.vertex_del_cost + self.edge_del_cost * len(self.in2[j])
        return cost

    def candidates(self, i: int, used: int) -> list[int | None]:
        t = self.verts1[i].time_index
        cands: list[int | None] = [j for j in self.layers2.get(t, []) if not used & (1 << j)]
        cands.append(None)
        return cands


class _Node:
    """One search prefix; ``assign`` follows the assign-step order."""

    __slots__ = ("step", "cost", "key", "assign", "used")

    def __init__(self, step: int, cost: float, key: tuple,
                 assign: tuple[int | None, ...], used: int):
        self.step = step
        self.cost = cost
        self.key = key
        self.assign = assign
        self.used = used


def _root() -> _Node:
    return _Node(0, 0.0, (), (), 0)


def _maps_of(problem: _Problem, node: _Node) -> tuple[dict[int, int | None], dict[int, int]]:
    assigned: dict[int, int | None] = {}
    matched2: dict[int, int] = {}
    for pos, j in enumerate(node.assign):
        i = problem.assign_positions[pos]
        assigned[i] = j
        if j is not None:
            matched2[j] = i
    return assigned, matched2


def _children(problem: _Problem, node: _Node) -> list[_Node]:
    kind, arg = problem.steps[node.step]
    if kind == "assign":
        assigned, matched2 = _maps_of(problem, node)
        children = []
        for j in problem.candidates(arg, node.used):
            delta = problem.assign_delta(arg, j, assigned, matched2)
            if j is None:
                marker, used = _NULL_MARKER, node.used
            else:
                marker, used = (0, problem.verts2[j].id), node.used | (1 << j)
            children.append(_Node(node.step + 1, node.cost + delta,
                                  node.key + (marker,), node.assign + (j,), used))
        return children
    delta = problem.close_delta(arg, node.used)
    return [_Node(node.step + 1, node.cost + delta, node.key, node.assign, node.used)]


def _greedy_rollout(problem: _Problem) -> _Node:
    node = _root()
    while node.step < len(problem.steps):
        node = min(_children(problem, node), key=lambda n: (n.cost, n.key))
    return node


def _check_cancel(cancel: "threading.Event | None") -> None:
    if cancel is not None and cancel.is_set():
        raise MatchCancelled("match cancelled")


def _search_exact(problem: _Problem, cancel: "threading.Event | None") -> _Node:
    best = _greedy_rollout(problem)
    n_steps = len(problem.steps)
    counter = 0
    heap: list[tuple[float, tuple, int, _Node]] = [(0.0, (), counter, _root())]
    while heap:
        _check_cancel(cancel)
        cost, _key, _, node = heapq.heappop(heap)
        if cost > best.cost:
            break  # admissible bound: nothing cheaper remains
        if node.step == n_steps:
            if (node.cost, node.key) < (best.cost, best.key):
                best = node
            continue
        for child in _children(problem, node):
            if child.cost <= best.cost:  # keep equal-cost paths for tie-breaking
                counter += 1
                heapq.heappush(heap, (child.cost, child.key, counter, child))
    return best


def _search_beam(problem: _Problem, width: int,
                 cancel: "threading.Event | None") -> tuple[_Node, bool]:
    frontier = [_root()]
    truncated = False
    for _step in range(len(problem.steps)):
        _check_cancel(cancel)
        expanded: list[_Node] = []
        for node in frontier:
            expanded.extend(_children(problem, node))
        expanded.sort(key=lambda n: (n.cost, n.key))
        if len(expanded) > width:
            truncated = True
            expanded = expanded[:width]
        frontier = expanded
    best = min(frontier, key=lambda n: (n.cost, n.key))
    return best, truncated


def _node_mapping(problem: _Problem, node: _Node) -> dict[str, str | None]:
    mapping: dict[str, str | None] = {}
    for pos, j in enumerate(node.assign):
        i = problem.assign_positions[pos]
        mapping[problem.verts1[i].id] = None if j is None else problem.verts2[j].id
    return mapping


def match(g1: GraphPattern, g2: GraphPattern, phi: np.ndarray, scales: np.ndarray,
          config: MatchConfig = MatchConfig(),
          cancel: "threading.Event | None" = None) -> MatchResult:
    """Minimum-cost mapping between two patterns under weights ``phi``.

    With ``beam_width`` 0 the result is globally optimal and ``exact``
    is True. With a positive beam width the result is an upper bound
    that can only improve as the width grows; ``exact`` is True when
    some pass completed without truncating its frontier.
    """
    phi, scales = _check_inputs(g1, g2, phi, scales)
    problem = _Problem(g1, g2, phi, scales, config)
    if config.beam_width == 0:
        node = _search_exact(problem, cancel)
        exact = True
    else:
        best: _Node | None = None
        exact = False
        for width in range(1, config.beam_width + 1):
            candidate, truncated = _search_beam(problem, width, cancel)
            if best is None or (candidate.cost, candidate.key) < (best.cost, best.key):
                best = candidate
            if not truncated:
                exact = True
                break
        assert best is not None
        node = best
    priced = evaluate_mapping(g1, g2, _node_mapping(problem, node), phi, scales, config)
    return MatchResult(
        total_cost=priced.total_cost,
        per_attribute=priced.per_attribute,
        mapping=priced.mapping,
        exact=exact,
    )


def per_attribute_costs(g1: GraphPattern, g2: GraphPattern, phi: np.ndarray,
                        scales: np.ndarray, config: MatchConfig = MatchConfig(),
                        cancel: "threading.Event | None" = None) -> np.ndarray:
    """Per-attribute decomposition of the jointly optimal mapping."""
    return match(g1, g2, phi, scales, config, cancel).per_attribute


def evaluate_mapping(g1: GraphPattern, g2: GraphPattern, mapping: dict[str, str | None],
                     phi: np.ndarray, scales: np.ndarray,
                     config: MatchConfig = MatchConfig()) -> MatchResult:
    """Directly price a complete mapping from its final state.

    Independent of the incremental search accounting: iterates whole
    vertex and edge sets once. Raises if the mapping is not admissible
    (missing vertices, layer mismatch, or a non-injective assignment).
    """
    phi, scales = _check_inputs(g1, g2, phi, scales)
    pen = config.deletion_penalty
    index2 = {w.id: w for w in g2.vertices}
    if set(mapping) != {v.id for v in g1.vertices}:
        raise ValueError("mapping must assign every left vertex exactly once")

    inverse: dict[str, str] = {}
    for vid, wid in mapping.items():
        if wid is None:
            continue
        if wid in inverse:
            raise ValueError(f"right vertex {wid!r} is assigned twice")
        if wid not in index2:
            raise ValueError(f"unknown right vertex {wid!r}")
        inverse[wid] = vid

    accum = np.zeros(N_ATTRIBUTES)
    for v in g1.vertices:
        wid = mapping[v.id]
        if wid is None:
            for a in VERTEX_ATTRIBUTES:
                accum[a] += pen
            continue
        w = index2[wid]
        if w.time_index != v.time_index:
            raise ValueError(f"{v.id!r}->{wid!r} crosses time layers")
        accum += vertex_cost_vector(v, w) / scales
    for w in g2.vertices:
        if w.id not in inverse:
            for a in VERTEX_ATTRIBUTES:
                accum[a] += pen

    e2_by_pair = {(e.from_id, e.to_id): e for e in g2.edges}
    matched_pairs: set[tuple[str, str]] = set()
    for e in g1.edges:
        fu, fv = mapping[e.from_id], mapping[e.to_id]
        counterpart = e2_by_pair.get((fu, fv)) if fu is not None and fv is not None else None
        if counterpart is not None:
            matched_pairs.add((fu, fv))
            accum += edge_cost_vector(e, counterpart) / scales
        else:
            for a in EDGE_ATTRIBUTES:
                accum[a] += pen
    for e in g2.edges:
        if (e.from_id, e.to_id) not in matched_pairs:
            for a in EDGE_ATTRIBUTES:
                accum[a] += pen

    return MatchResult(
        total_cost=float(phi @ accum),
        per_attribute=accum,
        mapping=dict(mapping),
        exact=True,
    )


def brute_force_match(g1: GraphPattern, g2: GraphPattern, phi: np.ndarray,
                      scales: np.ndarray, config: MatchConfig = MatchConfig()) -> MatchResult:
    """Exhaustively enumerate every admissible mapping and price each one.

    Serves as the independent optimality oracle for :func:`match`;
    refuses inputs above :data:`BRUTE_FORCE_VERTEX_LIMIT` combined
    vertices because enumeration is factorial.
    """
    total = len(g1.vertices) + len(g2.vertices)
    if total > BRUTE_FORCE_VERTEX_LIMIT:
        raise ValueError(
            f"brute force refused: {total} vertices exceeds limit {BRUTE_FORCE_VERTEX_LIMIT}")
    phi, scales = _check_inputs(g1, g2, phi, scales)
    problem = _Problem(g1, g2, phi, scales, config)

    order = problem.assign_positions
    verts1, verts2 = problem.verts1, problem.verts2
    best: tuple[float, tuple, dict[str, str | None]] | None = None

    def recurse(pos: int, used: int, key: tuple, mapping: dict[str, str | None]) -> None:
        nonlocal best
        if pos == len(order):
            priced = evaluate_mapping(g1, g2, mapping, phi, scales, config)
            if best is None or (priced.total_cost, key) < (best[0], best[1]):
                best = (priced.total_cost, key, dict(mapping))
            return
        i = order[pos]
        for j in problem.candidates(i, used):
            marker = _NULL_MARKER if j is None else (0, verts2[j].id)
            mapping[verts1[i].id] = None if j is None else verts2[j].id
            recurse(pos + 1, used if j is None else used | (1 << j),
                    key + (marker,), mapping)
        del mapping[verts1[i].id]

    recurse(0, 0, (), {})
    assert best is not None
    return evaluate_mapping(g1, g2, best[2], phi, scales, config)
