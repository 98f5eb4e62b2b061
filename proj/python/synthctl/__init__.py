"""Event causality identification with synthetic control."""

from ._synthctl import (
    Index,
    MockEmbedder,
    MockJudge,
    MockTransform,
    PipelineConfig,
    SynthctlError,
    combine_outcomes,
    compute_metrics,
    content_tokens,
    cosine,
    decide_mock,
    f1_score,
    fit_weights,
    run_cli,
    tokenize,
)

__all__ = [
    "Index",
    "MockEmbedder",
    "MockJudge",
    "MockTransform",
    "PipelineConfig",
    "SynthctlError",
    "combine_outcomes",
    "compute_metrics",
    "content_tokens",
    "cosine",
    "decide_mock",
    "f1_score",
    "fit_weights",
    "run_cli",
    "tokenize",
]
