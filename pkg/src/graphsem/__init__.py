"""Relevance-feedback retrieval over attributed temporal graph patterns."""

from .distances import (
    ATTRIBUTE_NAMES,
    AttributeId,
    EDGE_ATTRIBUTES,
    N_ATTRIBUTES,
    VERTEX_ATTRIBUTES,
    compute_scales,
    edge_cost_vector,
    gaussian_divergence,
    normalize,
    scalar_distance,
    unit_weights,
    vertex_cost_vector,
)
from .graph_model import (
    Corpus,
    CorpusFormatError,
    CorpusValidationError,
    Edge,
    GaussianParams,
    GraphNotFoundError,
    GraphPattern,
    ValidationIssue,
    ValidationReport,
    Vertex,
    canonical_corpus_id,
    load_corpus,
    save_corpus,
    validate_graph,
)
from .learner import (
    NEGATIVE,
    POSITIVE,
    AttributeDistribution,
    ModelStateError,
    Quantizer,
    SemanticModel,
    TrainingExample,
    estimate_phi,
    mmse_weight,
    observe,
    update_reference,
)
from .matcher import (
    BRUTE_FORCE_VERTEX_LIMIT,
    MatchCancelled,
    MatchConfig,
    MatchResult,
    brute_force_match,
    evaluate_mapping,
    match,
    per_attribute_costs,
)
from .semantics import (
    PosteriorRecord,
    Ranking,
    UNTRAINED_LIKELIHOOD,
    graph_prior,
    likelihood,
    posterior,
    posterior_from_likelihoods,
    rank_corpus,
)
from .session import (
    SessionState,
    SnapshotError,
    apply_feedback,
    apply_threshold,
    new_session_state,
    restore_snapshot,
    snapshot_bytes,
)
from .synth import AttributeCenters, ClassSpec, generate_corpus

__version__ = "0.1.0"
