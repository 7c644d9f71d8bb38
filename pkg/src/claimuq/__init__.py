"""Claim segmentation and token-uncertainty scoring for sampled generations.

The pipeline: tokenize generated text into word spans, open claim
boundaries at stopwords and sentence ends, bin the model's sampled tokens
into those claims, score each token from its stored top-24 candidate
logits, aggregate token scores per claim, and evaluate how well the claim
scores rank non-factual claims.
"""
from .aggregation import AggregationError, aggregate, content_token_mask
from .evaluation import (
    AgreementReport,
    DegenerateLabelsError,
    EvalReport,
    HallucinationStats,
    agreement_from_confusion,
    cohen_kappa,
    evaluate_scores,
    hallucination_stats,
    pr_auc,
    pr_points,
    rec_at_prec,
    roc_auc,
    roc_points,
    tpr_at_fpr,
)
from .model import (
    CANDIDATES_PER_TOKEN,
    FORMAT_VERSION,
    LANGUAGES,
    AggregatorKind,
    AnnotationSet,
    ClaimPartition,
    ClaimScoreSet,
    ExternalScoreMeta,
    Sample,
    SchemaError,
    ScorerConfig,
    TokenRecord,
    TokenScoreVector,
    Violation,
    partition_digest,
    validate_sample,
)
from .pipeline import (
    FilterOutcome,
    LoadResult,
    apply_filters,
    dataset_composition,
    filter_agreement,
    filter_wellformedness,
    load_dataset,
    persist_results,
)
from .scorers import (
    IngestError,
    ingest_external_scores,
    max_likelihood,
    softmax_over_candidates,
    token_entropy,
    token_likelihood,
)
from .segmenter import find_claim_starts, map_starts_to_claims, segment, segment_text
from .stops import StopSet, load_default_stops
from .words import WordSpan, tokenize_words

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "CANDIDATES_PER_TOKEN",
    "FORMAT_VERSION",
    "LANGUAGES",
    "AggregatorKind",
    "AggregationError",
    "AgreementReport",
    "AnnotationSet",
    "ClaimPartition",
    "ClaimScoreSet",
    "DegenerateLabelsError",
    "EvalReport",
    "ExternalScoreMeta",
    "FilterOutcome",
    "HallucinationStats",
    "IngestError",
    "LoadResult",
    "Sample",
    "SchemaError",
    "ScorerConfig",
    "StopSet",
    "TokenRecord",
    "TokenScoreVector",
    "Violation",
    "WordSpan",
    "aggregate",
    "agreement_from_confusion",
    "apply_filters",
    "cohen_kappa",
    "content_token_mask",
    "dataset_composition",
    "evaluate_scores",
    "filter_agreement",
    "filter_wellformedness",
    "find_claim_starts",
    "hallucination_stats",
    "ingest_external_scores",
    "load_dataset",
    "load_default_stops",
    "map_starts_to_claims",
    "max_likelihood",
    "partition_digest",
    "persist_results",
    "pr_auc",
    "pr_points",
    "rec_at_prec",
    "roc_auc",
    "roc_points",
    "segment",
    "segment_text",
    "softmax_over_candidates",
    "token_entropy",
    "token_likelihood",
    "tokenize_words",
    "tpr_at_fpr",
    "validate_sample",
]
