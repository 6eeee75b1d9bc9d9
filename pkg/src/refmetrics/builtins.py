"""Registration of the built-in metric library.

One descriptor per metric, grouped by modality: eight textual, four
structured, two audio and four image metrics. Every default threshold is
0.5; callers override per experiment.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Any

from . import media, structured, textmetrics
from .core import MetricDescriptor, Registry
from .textmetrics import EmbeddingProvider


def _as_image(payload: Any) -> media.ImageBuffer:
    if isinstance(payload, media.ImageBuffer):
        return payload
    return media.load_image(payload)


def _as_audio(payload: Any) -> media.AudioBuffer:
    if isinstance(payload, media.AudioBuffer):
        return payload
    return media.load_audio(payload)


def build_registry(embedding_provider: EmbeddingProvider | None = None) -> Registry:
    """Assemble a fresh registry holding the full built-in library.

    The semantic-similarity metric uses the deterministic hash-seeded
    provider unless a real embedding provider is supplied.
    """
    provider = embedding_provider or textmetrics.HashEmbedding()
    registry = Registry()

    def add(name: str, modality: str, impl) -> None:
        registry.register(MetricDescriptor(name=name, modality=modality), impl)

    add("bleu", "text", textmetrics.bleu)
    add("rougeL", "text", lambda c, r: textmetrics.rouge(c, r, "rougeL"))
    add("jsd", "text", textmetrics.js_divergence_score)
    add("jaccard", "text", textmetrics.jaccard)
    add("cosine_tfidf", "text", textmetrics.cosine_tfidf)
    add("levenshtein", "text", textmetrics.levenshtein_score)
    add("sequence_matcher", "text", textmetrics.sequence_matcher_score)
    add("bertscore", "text", lambda c, r: textmetrics.embedding_score(c, r, provider))
    add("planning_lcs", "plan", structured.planning_lcs)
    add("planning_jaccard", "plan", structured.planning_jaccard)
    add("timeseries_element_diff", "timeseries", structured.timeseries_element_diff)
    add("timeseries_dtw", "timeseries", structured.timeseries_dtw)
    add("audio_snr", "audio", lambda c, r: media.audio_snr_score(_as_audio(c), _as_audio(r)))
    add(
        "spectrogram_distance",
        "audio",
        lambda c, r: media.spectrogram_distance_score(_as_audio(c), _as_audio(r)),
    )
    add("ssim", "image", lambda c, r: media.ssim(_as_image(c), _as_image(r)))
    add("psnr", "image", lambda c, r: media.psnr_score(_as_image(c), _as_image(r)))
    add(
        "average_hash",
        "image",
        lambda c, r: media.average_hash_score(_as_image(c), _as_image(r)),
    )
    add(
        "histogram_match",
        "image",
        lambda c, r: media.histogram_match(_as_image(c), _as_image(r)),
    )
    return registry


@lru_cache(maxsize=1)
def default_registry() -> Registry:
    """Shared immutable registry with the built-ins and stub embeddings."""
    return build_registry()
