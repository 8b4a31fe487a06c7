"""Session state: paired semantic models, feedback replay, snapshots.

A session is an immutable value; feedback and threshold changes are
pure transitions returning a new state with the revision bumped by one.
The snapshot serialization is canonical (sorted keys, fixed separators)
so identical states always produce identical bytes, no matter whether
they were reached through the CLI or the HTTP service.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Any, Callable

import numpy as np

from .distances import ATTRIBUTE_NAMES, AttributeId, N_ATTRIBUTES
from .graph_model import Corpus
from .learner import (
    NEGATIVE,
    POSITIVE,
    AttributeDistribution,
    Quantizer,
    SemanticModel,
    TrainingExample,
    observe,
    update_reference,
)
from .matcher import MatchConfig
from .semantics import Ranking, rank_corpus

__all__ = [
    "SessionState",
    "SnapshotError",
    "new_session_state",
    "apply_feedback",
    "apply_threshold",
    "snapshot_bytes",
    "restore_snapshot",
    "SNAPSHOT_FORMAT",
]

SNAPSHOT_FORMAT = "graphsem-session/1"


class SnapshotError(ValueError):
    """Snapshot bytes are malformed or inconsistent."""


@dataclass(frozen=True)
class SessionState:
    corpus_id: str
    revision: int
    threshold: float
    quantizer: Quantizer
    matcher_config: MatchConfig
    positive: SemanticModel
    negative: SemanticModel
    ranking: Ranking | None

    @property
    def trained(self) -> bool:
        return self.positive.trained

    @property
    def feedback_count(self) -> int:
        return len(self.positive.training_log) + len(self.negative.training_log)


def new_session_state(corpus_id: str, r: int = 1000, beam_width: int = 0,
                      deletion_penalty: float = 1.0,
                      threshold: float = 0.5) -> SessionState:
    if not (0.0 <= threshold <= 1.0):
        raise ValueError("threshold must be in [0, 1]")
    return SessionState(
        corpus_id=corpus_id,
        revision=0,
        threshold=threshold,
        quantizer=Quantizer(r=r),
        matcher_config=MatchConfig(beam_width=beam_width, deletion_penalty=deletion_penalty),
        positive=SemanticModel.fresh(POSITIVE, r=r),
        negative=SemanticModel.fresh(NEGATIVE, r=r),
        ranking=None,
    )


def _recompute_ranking(state: SessionState, corpus: Corpus) -> Ranking | None:
    if not state.positive.trained:
        return None
    return rank_corpus(corpus, state.positive, state.negative, state.threshold,
                       state.quantizer, state.matcher_config)


def apply_feedback(state: SessionState, corpus: Corpus, graph_id: str,
                   label: str) -> SessionState:
    """One labeled example: observe, re-elect the reference, re-rank."""
    if label not in (POSITIVE, NEGATIVE):
        raise ValueError(f"label must be {POSITIVE!r} or {NEGATIVE!r}, got {label!r}")
    step = state.feedback_count
    config = state.matcher_config
    if label == POSITIVE:
        model = observe(state.positive, corpus, graph_id, state.quantizer, config, step)
        model = update_reference(model, corpus, state.quantizer, config)
        state = replace(state, positive=model)
    else:
        model = observe(state.negative, corpus, graph_id, state.quantizer, config, step)
        model = update_reference(model, corpus, state.quantizer, config)
        state = replace(state, negative=model)
    state = replace(state, revision=state.revision + 1)
    return replace(state, ranking=_recompute_ranking(state, corpus))


def apply_threshold(state: SessionState, threshold: float) -> SessionState:
    """Relabel the current ranking at a new threshold; no recomputation."""
    if not (0.0 <= threshold <= 1.0):
        raise ValueError("threshold must be in [0, 1]")
    ranking = state.ranking.relabeled(threshold) if state.ranking is not None else None
    return replace(state, threshold=threshold, revision=state.revision + 1,
                   ranking=ranking)


# ---------------------------------------------------------------------------
# Snapshot serialization
# ---------------------------------------------------------------------------

def _model_to_jsonable(model: SemanticModel) -> dict[str, Any]:
    return {
        "sign": model.sign,
        "reference": model.reference_graph_id,
        "scales": model.scales.tolist() if model.scales is not None else None,
        "alpha": {
            ATTRIBUTE_NAMES[dist.attribute]: dist.alpha.tolist()
            for dist in model.distributions
        },
        "log": [[entry.graph_id, entry.step] for entry in model.training_log],
    }


def snapshot_bytes(state: SessionState) -> bytes:
    """Canonical snapshot: same state, same bytes."""
    payload = {
        "format": SNAPSHOT_FORMAT,
        "corpus_id": state.corpus_id,
        "revision": state.revision,
        "threshold": state.threshold,
        "quantizer_r": state.quantizer.r,
        "matcher": {
            "beam_width": state.matcher_config.beam_width,
            "deletion_penalty": state.matcher_config.deletion_penalty,
        },
        "models": {
            "positive": _model_to_jsonable(state.positive),
            "negative": _model_to_jsonable(state.negative),
        },
    }
    return (json.dumps(payload, sort_keys=True, separators=(",", ":"),
                       allow_nan=False) + "\n").encode("utf-8")


def _model_from_jsonable(payload: Any, expected_sign: str, r: int) -> SemanticModel:
    if not isinstance(payload, dict):
        raise SnapshotError(f"{expected_sign} model must be an object")
    sign = payload.get("sign")
    if sign != expected_sign:
        raise SnapshotError(f"model sign {sign!r} does not match slot {expected_sign!r}")
    reference = payload.get("reference")
    if reference is not None and not isinstance(reference, str):
        raise SnapshotError("reference must be a graph id or null")
    raw_scales = payload.get("scales")
    scales = None
    if raw_scales is not None:
        if not isinstance(raw_scales, list) or len(raw_scales) != N_ATTRIBUTES:
            raise SnapshotError("scales must list one value per attribute")
        scales = np.asarray(raw_scales, dtype=np.float64)
    if (reference is None) != (scales is None):
        raise SnapshotError("reference and scales must be set together")

    raw_alpha = payload.get("alpha")
    if not isinstance(raw_alpha, dict) or set(raw_alpha) != set(ATTRIBUTE_NAMES):
        raise SnapshotError("alpha must map every attribute name to a vector")
    distributions = []
    for attribute in AttributeId:
        values = raw_alpha[ATTRIBUTE_NAMES[attribute]]
        if not isinstance(values, list) or len(values) != r:
            raise SnapshotError(f"alpha[{ATTRIBUTE_NAMES[attribute]}] must have {r} entries")
        distributions.append(AttributeDistribution(
            attribute=attribute, alpha=np.asarray(values, dtype=np.float64)))

    raw_log = payload.get("log")
    if not isinstance(raw_log, list):
        raise SnapshotError("log must be a list")
    log = []
    for entry in raw_log:
        if (not isinstance(entry, list) or len(entry) != 2
                or not isinstance(entry[0], str) or not isinstance(entry[1], int)):
            raise SnapshotError("log entries must be [graph_id, step] pairs")
        log.append(TrainingExample(graph_id=entry[0], step=entry[1]))

    return SemanticModel(
        sign=expected_sign,
        reference_graph_id=reference,
        distributions=tuple(distributions),
        scales=scales,
        training_log=tuple(log),
    )


def restore_snapshot(data: bytes | str,
                     corpus_lookup: Callable[[str], Corpus]) -> SessionState:
    """Rebuild a session from snapshot bytes; the ranking is recomputed
    deterministically from the restored models."""
    try:
        payload = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SnapshotError(f"snapshot is not valid JSON: {exc.msg}") from None
    if not isinstance(payload, dict) or payload.get("format") != SNAPSHOT_FORMAT:
        raise SnapshotError(f"unsupported snapshot format {payload.get('format')!r}"
                            if isinstance(payload, dict) else "snapshot must be an object")

    corpus_id = payload.get("corpus_id")
    if not isinstance(corpus_id, str):
        raise SnapshotError("corpus_id must be a string")
    revision = payload.get("revision")
    if not isinstance(revision, int) or revision < 0:
        raise SnapshotError("revision must be a nonnegative integer")
    threshold = payload.get("threshold")
    if isinstance(threshold, bool) or not isinstance(threshold, (int, float)) \
            or not (0.0 <= threshold <= 1.0):
        raise SnapshotError("threshold must be a number in [0, 1]")
    r = payload.get("quantizer_r")
    if not isinstance(r, int) or r < 2:
        raise SnapshotError("quantizer_r must be an integer >= 2")
    matcher_payload = payload.get("matcher")
    if not isinstance(matcher_payload, dict):
        raise SnapshotError("matcher settings missing")
    try:
        config = MatchConfig(
            beam_width=int(matcher_payload.get("beam_width", 0)),
            deletion_penalty=float(matcher_payload.get("deletion_penalty", 1.0)),
        )
    except (TypeError, ValueError) as exc:
        raise SnapshotError(f"bad matcher settings: {exc}") from None

    models = payload.get("models")
    if not isinstance(models, dict):
        raise SnapshotError("models missing")
    positive = _model_from_jsonable(models.get("positive"), POSITIVE, r)
    negative = _model_from_jsonable(models.get("negative"), NEGATIVE, r)

    corpus = corpus_lookup(corpus_id)
    state = SessionState(
        corpus_id=corpus_id,
        revision=revision,
        threshold=float(threshold),
        quantizer=Quantizer(r=r),
        matcher_config=config,
        positive=positive,
        negative=negative,
        ranking=None,
    )
    return replace(state, ranking=_recompute_ranking(state, corpus))
