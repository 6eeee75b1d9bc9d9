"""Reference-based comparison engine for generative-model outputs.

One metric contract across five modalities (text, action plans, time
series, images, audio): every metric scores a candidate against a
reference on a [0, 1] higher-is-better scale. The experiment layer turns
many candidates x many metrics into score matrices, threshold judgments,
CSV reports and SVG plots; the CLI drives the same workflow from JSON
manifests.
"""

from __future__ import annotations

from typing import Any, Sequence

from .builtins import build_registry, default_registry
from .core import (
    ComparisonPair,
    DuplicateMetricError,
    MetricDescriptor,
    MetricError,
    ModalityMismatchError,
    PairPayloadError,
    Registry,
    UnknownMetricError,
    calculate_batch,
)
from .experiment import (
    AggregationSpec,
    ExperimentConfig,
    ExperimentError,
    ScoreMatrix,
    aggregate,
    compare,
    emit_report,
    parse_csv,
    to_csv,
)

__all__ = [
    "AggregationSpec",
    "ComparisonPair",
    "DuplicateMetricError",
    "ExperimentConfig",
    "ExperimentError",
    "MetricDescriptor",
    "MetricError",
    "ModalityMismatchError",
    "PairPayloadError",
    "Registry",
    "ScoreMatrix",
    "UnknownMetricError",
    "aggregate",
    "build_registry",
    "calculate",
    "calculate_batch",
    "compare",
    "default_registry",
    "emit_report",
    "list_metrics",
    "parse_csv",
    "to_csv",
]


def list_metrics() -> list[MetricDescriptor]:
    """Descriptors of the built-in metrics, in registration order."""
    return default_registry().list_metrics()


def calculate(
    metric: str, candidates: Sequence[Any] | Any, references: Sequence[Any] | Any
) -> list[float]:
    """Score candidates against references with one built-in metric.

    Accepts single payloads or equal-length lists; a single reference is
    broadcast across all candidates.
    """
    registry = default_registry()
    modality = registry.descriptor(metric).modality
    cands = list(candidates) if isinstance(candidates, (list, tuple)) else [candidates]
    refs = list(references) if isinstance(references, (list, tuple)) else [references]
    if len(refs) == 1 and len(cands) > 1:
        refs = refs * len(cands)
    if len(cands) != len(refs):
        raise ValueError(
            f"got {len(cands)} candidates but {len(refs)} references; "
            "pass equal-length lists or a single reference"
        )
    pairs = [ComparisonPair(c, r, modality) for c, r in zip(cands, refs)]
    return calculate_batch(registry, metric, pairs)
