"""Likelihoods, posteriors, and threshold-labeled corpus rankings.

A pattern's likelihood under a semantic is ``1 - S / Z`` where ``S`` is
the weighted matching cost against the semantic's reference and ``Z``
is the sum of the weights (the largest weighted cost a fully clamped
match can reach), clamped into [0, 1]. Posteriors combine the positive
and negative likelihoods by Bayes' rule under a uniform semantic prior.
"""

from __future__ import annotations

import json
import logging
import threading
from dataclasses import dataclass, replace

from .graph_model import Corpus, GraphPattern
from .learner import ModelStateError, Quantizer, SemanticModel, estimate_phi
from .matcher import MatchConfig, match

__all__ = [
    "PosteriorRecord",
    "Ranking",
    "UNTRAINED_LIKELIHOOD",
    "likelihood",
    "posterior",
    "posterior_from_likelihoods",
    "graph_prior",
    "rank_corpus",
]

logger = logging.getLogger(__name__)

# A model with no reference yet treats every pattern as equally likely.
UNTRAINED_LIKELIHOOD = 0.5


@dataclass(frozen=True)
class PosteriorRecord:
    graph_id: str
    likelihood_pos: float
    likelihood_neg: float
    posterior: float
    labeled: bool

    def to_jsonable(self) -> dict:
        return {
            "graph_id": self.graph_id,
            "likelihood_pos": self.likelihood_pos,
            "likelihood_neg": self.likelihood_neg,
            "posterior": self.posterior,
            "labeled": self.labeled,
        }


@dataclass(frozen=True)
class Ranking:
    """Posterior records in descending order plus the labeling threshold."""

    records: tuple[PosteriorRecord, ...]
    threshold: float

    def to_jsonable(self) -> list[dict]:
        return [record.to_jsonable() for record in self.records]

    def to_json_bytes(self) -> bytes:
        return (json.dumps(self.to_jsonable(), indent=2) + "\n").encode("utf-8")

    def relabeled(self, threshold: float) -> "Ranking":
        """Same posteriors, labels recut at a new threshold."""
        if not (0.0 <= threshold <= 1.0):
            raise ValueError("threshold must be in [0, 1]")
        records = tuple(replace(r, labeled=r.posterior >= threshold) for r in self.records)
        return Ranking(records=records, threshold=threshold)

    @property
    def labeled_count(self) -> int:
        return sum(1 for r in self.records if r.labeled)


def likelihood(graph: GraphPattern, model: SemanticModel, corpus: Corpus,
               quantizer: Quantizer, config: MatchConfig = MatchConfig(),
               cancel: "threading.Event | None" = None) -> float:
    """Probability of ``graph`` under the semantic, in [0, 1].

    The reference pattern itself always scores exactly 1. A degenerate
    all-zero weight vector cannot arise from posterior means, but if
    weights ever sum to zero the model is uninformative and every
    pattern scores 1 (logged as a warning).
    """
    if model.reference_graph_id is None:
        raise ModelStateError("model has no reference pattern yet")
    assert model.scales is not None
    phi = estimate_phi(model, quantizer)
    z = float(phi.sum())
    if z == 0.0:
        logger.warning("all attribute weights are zero; likelihood degenerates to 1")
        return 1.0
    reference = corpus.graph(model.reference_graph_id)
    cost = match(reference, graph, phi, model.scales, config, cancel).total_cost
    return min(1.0, max(0.0, 1.0 - cost / z))


def posterior_from_likelihoods(likelihood_pos: float, likelihood_neg: float) -> float:
    """Bayes posterior of the positive semantic under a uniform prior."""
    total = likelihood_pos + likelihood_neg
    if total == 0.0:
        return 0.5
    return likelihood_pos / total


def posterior(graph: GraphPattern, pos_model: SemanticModel, neg_model: SemanticModel,
              corpus: Corpus, quantizer: Quantizer,
              config: MatchConfig = MatchConfig()) -> float:
    return posterior_from_likelihoods(
        likelihood(graph, pos_model, corpus, quantizer, config),
        likelihood(graph, neg_model, corpus, quantizer, config),
    )


def graph_prior(graph: GraphPattern, pos_model: SemanticModel, neg_model: SemanticModel,
                corpus: Corpus, quantizer: Quantizer,
                config: MatchConfig = MatchConfig()) -> float:
    """Marginal pattern probability under the uniform semantic prior.

    Diagnostic only; the posterior uses the cancelled form directly.
    """
    lp = likelihood(graph, pos_model, corpus, quantizer, config)
    ln = likelihood(graph, neg_model, corpus, quantizer, config)
    return 0.5 * lp + 0.5 * ln


def rank_corpus(corpus: Corpus, pos_model: SemanticModel, neg_model: SemanticModel,
                threshold: float, quantizer: Quantizer,
                config: MatchConfig = MatchConfig(),
                cancel: "threading.Event | None" = None) -> Ranking:
    """Posterior-ranked records for every corpus pattern.

    Training examples are not excluded; callers mark them instead. The
    positive model must be trained; an untrained negative model
    contributes the uninformative likelihood 0.5 to every pattern.
    Records sort by descending posterior with ascending graph id as the
    tie-break, so the result is independent of corpus iteration order.
    """
    if not (0.0 <= threshold <= 1.0):
        raise ValueError("threshold must be in [0, 1]")
    if pos_model.reference_graph_id is None:
        raise ModelStateError("positive model has no reference pattern yet")

    records = []
    for graph in corpus.graphs.values():
        lp = likelihood(graph, pos_model, corpus, quantizer, config, cancel)
        if neg_model.reference_graph_id is None:
            ln = UNTRAINED_LIKELIHOOD
        else:
            ln = likelihood(graph, neg_model, corpus, quantizer, config, cancel)
        p = posterior_from_likelihoods(lp, ln)
        records.append(PosteriorRecord(
            graph_id=graph.id,
            likelihood_pos=lp,
            likelihood_neg=ln,
            posterior=p,
            labeled=p >= threshold,
        ))
    records.sort(key=lambda r: (-r.posterior, r.graph_id))
    return Ranking(records=tuple(records), threshold=threshold)
