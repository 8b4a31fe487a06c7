"""Dirichlet-multinomial learning of per-attribute similarity weights.

Each semantic (positive or negative) keeps, per attribute channel, a
Dirichlet belief over ``r`` discretized weight levels. A labeled
example is matched against the semantic's reference pattern; each
attribute's normalized cost is flipped into a weight level (low cost
means high weight) and the corresponding Dirichlet hyperparameter is
incremented. The working weight vector is the posterior mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from .distances import AttributeId, N_ATTRIBUTES, compute_scales, unit_weights
from .graph_model import Corpus
from .matcher import MatchConfig, per_attribute_costs

__all__ = [
    "Quantizer",
    "AttributeDistribution",
    "TrainingExample",
    "SemanticModel",
    "ModelStateError",
    "POSITIVE",
    "NEGATIVE",
    "mmse_weight",
    "estimate_phi",
    "observe",
    "update_reference",
]

POSITIVE = "positive"
NEGATIVE = "negative"
DEFAULT_QUANTIZATION_LEVELS = 1000


class ModelStateError(RuntimeError):
    """An operation needs state the model does not have yet."""


@dataclass(frozen=True)
class Quantizer:
    """Uniform discretization of [0, 1] into ``r`` bins with midpoint levels."""

    r: int = DEFAULT_QUANTIZATION_LEVELS

    def __post_init__(self) -> None:
        if self.r < 2:
            raise ValueError("quantizer needs at least 2 levels")

    @cached_property
    def levels(self) -> np.ndarray:
        """Weight value of each bin: (j - 1/2) / r for j = 1..r."""
        return (np.arange(1, self.r + 1, dtype=np.float64) - 0.5) / self.r

    def quantize(self, normalized_cost: float) -> int:
        """Bin index (1-based) of the weight implied by a cost in [0, 1].

        The weight is 1 - cost, so cost 0 lands in the top bin and cost
        1 in the bottom one; the mapping is monotone non-increasing.
        """
        if not (0.0 <= normalized_cost <= 1.0):
            raise ValueError(f"normalized cost must be in [0, 1], got {normalized_cost}")
        j = math.ceil((1.0 - normalized_cost) * self.r)
        return min(max(j, 1), self.r)


@dataclass(frozen=True, eq=False)
class AttributeDistribution:
    """Dirichlet hyperparameters over the weight levels of one attribute."""

    attribute: AttributeId
    alpha: np.ndarray

    def __post_init__(self) -> None:
        alpha = np.asarray(self.alpha, dtype=np.float64)
        if alpha.ndim != 1 or alpha.size < 2:
            raise ValueError("alpha must be a vector with at least 2 entries")
        if not np.all(alpha > 0):
            raise ValueError("alpha entries must be positive")
        object.__setattr__(self, "alpha", alpha)

    @property
    def alpha_sum(self) -> float:
        return float(self.alpha.sum())

    @classmethod
    def uniform(cls, attribute: AttributeId, r: int) -> "AttributeDistribution":
        return cls(attribute=attribute, alpha=np.ones(r, dtype=np.float64))

    def with_observation(self, level: int) -> "AttributeDistribution":
        """New distribution with one count added to 1-based bin ``level``."""
        if not (1 <= level <= self.alpha.size):
            raise ValueError(f"level {level} out of range 1..{self.alpha.size}")
        alpha = self.alpha.copy()
        alpha[level - 1] += 1.0
        return AttributeDistribution(attribute=self.attribute, alpha=alpha)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AttributeDistribution):
            return NotImplemented
        return self.attribute == other.attribute and np.array_equal(self.alpha, other.alpha)


@dataclass(frozen=True)
class TrainingExample:
    graph_id: str
    step: int


@dataclass(frozen=True, eq=False)
class SemanticModel:
    """Learned state of one semantic: reference pattern + weight beliefs."""

    sign: str
    reference_graph_id: str | None
    distributions: tuple[AttributeDistribution, ...]
    scales: np.ndarray | None
    training_log: tuple[TrainingExample, ...]

    def __post_init__(self) -> None:
        if self.sign not in (POSITIVE, NEGATIVE):
            raise ValueError(f"sign must be {POSITIVE!r} or {NEGATIVE!r}")
        if len(self.distributions) != N_ATTRIBUTES:
            raise ValueError("need one distribution per attribute")
        for a, dist in zip(AttributeId, self.distributions):
            if dist.attribute != a:
                raise ValueError("distributions must follow the attribute order")

    @classmethod
    def fresh(cls, sign: str, r: int = DEFAULT_QUANTIZATION_LEVELS) -> "SemanticModel":
        return cls(
            sign=sign,
            reference_graph_id=None,
            distributions=tuple(AttributeDistribution.uniform(a, r) for a in AttributeId),
            scales=None,
            training_log=(),
        )

    @property
    def trained(self) -> bool:
        return self.reference_graph_id is not None

    def distribution(self, attribute: AttributeId) -> AttributeDistribution:
        return self.distributions[attribute]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SemanticModel):
            return NotImplemented
        scales_equal = (
            (self.scales is None and other.scales is None)
            or (self.scales is not None and other.scales is not None
                and np.array_equal(self.scales, other.scales))
        )
        return (self.sign == other.sign
                and self.reference_graph_id == other.reference_graph_id
                and self.distributions == other.distributions
                and scales_equal
                and self.training_log == other.training_log)


def mmse_weight(dist: AttributeDistribution, quantizer: Quantizer) -> float:
    """Posterior-mean weight: sum_j level_j * alpha_j / alpha_sum."""
    if dist.alpha.size != quantizer.r:
        raise ValueError("distribution resolution does not match the quantizer")
    return float(np.dot(quantizer.levels, dist.alpha) / dist.alpha.sum())


def estimate_phi(model: SemanticModel, quantizer: Quantizer) -> np.ndarray:
    """Componentwise posterior-mean weight vector (channels independent)."""
    return np.array([mmse_weight(d, quantizer) for d in model.distributions],
                    dtype=np.float64)


def observe(model: SemanticModel, corpus: Corpus, example_id: str,
            quantizer: Quantizer, config: MatchConfig = MatchConfig(),
            step: int | None = None) -> SemanticModel:
    """Incorporate one labeled example; returns the updated model.

    The first example seeds the reference pattern and the normalization
    scales without updating any counts (its self-match cost is a
    degenerate all-zero observation). Later examples are matched
    against the reference with neutral weights; each attribute's
    normalized cost is quantized and the hit bin's hyperparameter is
    incremented. Using fixed neutral weights for the learning matches
    keeps the accumulated counts independent of example order.
    """
    example = corpus.graph(example_id)
    if step is None:
        step = len(model.training_log)
    log = model.training_log + (TrainingExample(graph_id=example_id, step=step),)

    if model.reference_graph_id is None:
        return replace(
            model,
            reference_graph_id=example_id,
            scales=compute_scales(corpus, example, config),
            training_log=log,
        )

    reference = corpus.graph(model.reference_graph_id)
    assert model.scales is not None
    costs = per_attribute_costs(reference, example, unit_weights(), model.scales, config)
    normalized = np.minimum(costs, 1.0)
    updated = tuple(
        dist.with_observation(quantizer.quantize(float(normalized[dist.attribute])))
        for dist in model.distributions
    )
    return replace(model, distributions=updated, training_log=log)


def update_reference(model: SemanticModel, corpus: Corpus, quantizer: Quantizer,
                     config: MatchConfig = MatchConfig()) -> SemanticModel:
    """Re-elect the reference as the likelihood argmax over the model's
    own labeled examples (ties break to the smallest graph id); scales
    are recomputed only when the reference actually changes.
    """
    from .semantics import likelihood

    if not model.training_log:
        raise ModelStateError("cannot update the reference of an untrained model")
    candidates = sorted({entry.graph_id for entry in model.training_log})
    best_id: str | None = None
    best_likelihood = -math.inf
    for graph_id in candidates:
        value = likelihood(corpus.graph(graph_id), model, corpus, quantizer, config)
        if value > best_likelihood:
            best_id, best_likelihood = graph_id, value
    assert best_id is not None
    if best_id == model.reference_graph_id:
        return model
    return replace(
        model,
        reference_graph_id=best_id,
        scales=compute_scales(corpus, corpus.graph(best_id), config),
    )
