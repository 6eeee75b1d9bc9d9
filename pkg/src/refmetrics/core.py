"""Metric contract, registry and batch-calculation plumbing.

Every concrete metric is a pure function ``(candidate, reference) -> float``
returning a similarity in [0, 1] where 1 means identical. Distances are
converted to similarities inside the metric modules so that one threshold
semantics ("higher is better") holds engine-wide.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable

MODALITIES = ("text", "plan", "timeseries", "image", "audio")

MetricFn = Callable[[Any, Any], float]


class MetricError(Exception):
    """Base class for errors raised by the comparison engine."""


class DuplicateMetricError(MetricError):
    def __init__(self, name: str):
        super().__init__(f"metric {name!r} is already registered")
        self.name = name


class UnknownMetricError(MetricError):
    def __init__(self, name: str, available: list[str]):
        super().__init__(
            f"unknown metric {name!r}; available metrics: {', '.join(available)}"
        )
        self.name = name
        self.available = available


class ModalityMismatchError(MetricError):
    def __init__(self, index: int, metric: str, expected: str, got: str):
        super().__init__(
            f"modality mismatch at pair index {index}: metric {metric!r} "
            f"expects {expected!r}, got {got!r}"
        )
        self.index = index
        self.expected = expected
        self.got = got


class PairPayloadError(MetricError):
    """A pair's payload could not be scored (bad type, undecodable media)."""

    def __init__(self, index: int, cause: Exception):
        super().__init__(f"pair index {index}: {cause}")
        self.index = index
        self.cause = cause


@dataclass(frozen=True)
class MetricDescriptor:
    """Registry entry for one metric.

    ``direction`` is fixed: every metric is exposed as a similarity, so a
    single threshold rule (score >= threshold) applies everywhere.
    """

    name: str
    modality: str
    default_threshold: float = 0.5
    direction: str = "higher-is-better"

    def __post_init__(self) -> None:
        if self.modality not in MODALITIES:
            raise ValueError(f"unknown modality {self.modality!r}")
        if not 0.0 <= self.default_threshold <= 1.0:
            raise ValueError(
                f"default_threshold must be in [0, 1], got {self.default_threshold}"
            )
        if self.direction != "higher-is-better":
            raise ValueError("score direction is fixed to 'higher-is-better'")


@dataclass(frozen=True)
class ComparisonPair:
    """A candidate/reference payload pair tagged with its modality."""

    candidate: Any
    reference: Any
    modality: str

    def __post_init__(self) -> None:
        if self.modality not in MODALITIES:
            raise ValueError(f"unknown modality {self.modality!r}")


@dataclass
class Registry:
    """Name -> metric lookup. Built once, then treated as immutable."""

    _descriptors: dict[str, MetricDescriptor] = field(default_factory=dict)
    _impls: dict[str, MetricFn] = field(default_factory=dict)

    def register(self, descriptor: MetricDescriptor, impl: MetricFn) -> None:
        if descriptor.name in self._descriptors:
            raise DuplicateMetricError(descriptor.name)
        self._descriptors[descriptor.name] = descriptor
        self._impls[descriptor.name] = impl

    def descriptor(self, name: str) -> MetricDescriptor:
        if name not in self._descriptors:
            raise UnknownMetricError(name, self.names())
        return self._descriptors[name]

    def impl(self, name: str) -> MetricFn:
        if name not in self._impls:
            raise UnknownMetricError(name, self.names())
        return self._impls[name]

    def list_metrics(self) -> list[MetricDescriptor]:
        """All descriptors, in registration order."""
        return list(self._descriptors.values())

    def names(self) -> list[str]:
        return list(self._descriptors)

    def __contains__(self, name: str) -> bool:
        return name in self._descriptors

    def __len__(self) -> int:
        return len(self._descriptors)


def _finalize(value: float, metric: str) -> float:
    # Guards the engine-wide contract: finite, inside [0, 1] bar float dust.
    if not math.isfinite(value):
        raise MetricError(f"metric {metric!r} produced a non-finite score: {value!r}")
    if value < -1e-9 or value > 1.0 + 1e-9:
        raise MetricError(f"metric {metric!r} produced an out-of-range score: {value!r}")
    return min(1.0, max(0.0, float(value)))


def calculate_batch(
    registry: Registry, metric: str, pairs: list[ComparisonPair]
) -> list[float]:
    """Score every pair with the named metric, preserving order.

    All pairs are modality-checked before any scoring happens, so a bad
    batch fails as a whole. A single pair behaves identically to a
    length-1 batch.
    """
    descriptor = registry.descriptor(metric)
    impl = registry.impl(metric)
    for i, pair in enumerate(pairs):
        if pair.modality != descriptor.modality:
            raise ModalityMismatchError(i, metric, descriptor.modality, pair.modality)
    scores: list[float] = []
    for i, pair in enumerate(pairs):
        try:
            raw = impl(pair.candidate, pair.reference)
        except MetricError:
            raise
        except Exception as exc:
            raise PairPayloadError(i, exc) from exc
        scores.append(_finalize(raw, metric))
    return scores
