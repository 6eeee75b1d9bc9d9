"""Experiment workflow: compare candidates against one reference, apply
thresholds, and export CSV reports plus SVG plots.

A run either produces a fully populated score matrix or fails before any
output is written; partial matrices are never emitted.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator

from . import media
from .core import ComparisonPair, Registry, UnknownMetricError, calculate_batch


class ExperimentError(ValueError):
    """Invalid configuration or unusable payload."""


@dataclass
class ExperimentConfig:
    """One comparison run: many candidates, one reference, several metrics.

    Payloads are inline strings, ``pathlib.Path`` file references, or
    decoded media buffers. For image/audio metrics a plain string is
    treated as a file path.
    """

    candidates: dict[str, Any]
    reference: Any
    metrics: list[str]
    thresholds: dict[str, float] = field(default_factory=dict)
    output_dir: Path | None = None


@dataclass
class ScoreMatrix:
    """Candidates x metrics score table with per-metric thresholds."""

    candidates: list[str]
    metrics: list[str]
    scores: list[list[float]]
    thresholds: dict[str, float]

    def score(self, candidate: str, metric: str) -> float:
        return self.scores[self.candidates.index(candidate)][self.metrics.index(metric)]

    def threshold(self, metric: str) -> float:
        return self.thresholds[metric]

    def passes(self, candidate: str, metric: str) -> bool:
        return self.score(candidate, metric) >= self.thresholds[metric]

    @property
    def all_pass(self) -> bool:
        return all(passed for _, _, _, _, passed in self.cells())

    def cells(self) -> Iterator[tuple[str, str, float, float, bool]]:
        """Row-major (candidate-major) iteration over all cells."""
        for i, candidate in enumerate(self.candidates):
            for j, metric in enumerate(self.metrics):
                score = self.scores[i][j]
                threshold = self.thresholds[metric]
                yield candidate, metric, score, threshold, score >= threshold


@dataclass(frozen=True)
class AggregationSpec:
    """Names of the groups being averaged (e.g. day-1/day-2/day-3)."""

    group_keys: list[str]


def validate_config(config: ExperimentConfig, registry: Registry) -> str:
    """Check the whole config up front; returns the shared modality."""
    if not config.candidates:
        raise ExperimentError("experiment needs at least one candidate")
    if not config.metrics:
        raise ExperimentError("experiment needs at least one metric")
    if len(set(config.metrics)) != len(config.metrics):
        raise ExperimentError("metric list contains duplicates")
    modalities = {}
    for name in config.metrics:
        modalities[name] = registry.descriptor(name).modality
    distinct = sorted(set(modalities.values()))
    if len(distinct) > 1:
        raise ExperimentError(
            f"metrics span several modalities ({', '.join(distinct)}); "
            "one experiment covers exactly one modality"
        )
    for name, value in config.thresholds.items():
        if name not in config.metrics:
            raise ExperimentError(f"threshold for unlisted metric {name!r}")
        if not 0.0 <= value <= 1.0:
            raise ExperimentError(f"threshold for {name!r} must be in [0, 1], got {value}")
    return distinct[0]


def _resolve_payload(payload: Any, modality: str, owner: str) -> Any:
    try:
        if modality in ("text", "plan", "timeseries"):
            if isinstance(payload, Path):
                return payload.read_text(encoding="utf-8")
            if isinstance(payload, str):
                return payload
            raise ExperimentError(f"expected text or a file path, got {type(payload).__name__}")
        if modality == "image":
            if isinstance(payload, media.ImageBuffer):
                return payload
            return media.load_image(payload)
        if isinstance(payload, media.AudioBuffer):
            return payload
        return media.load_audio(payload)
    except ExperimentError:
        raise
    except Exception as exc:
        raise ExperimentError(f"{owner}: {exc}") from exc


def compare(config: ExperimentConfig, registry: Registry) -> ScoreMatrix:
    """Score every candidate against the reference on every metric.

    Any unknown metric, modality clash or undecodable payload aborts the
    run before any score is reported.
    """
    modality = validate_config(config, registry)
    reference = _resolve_payload(config.reference, modality, "reference")
    resolved = {
        cid: _resolve_payload(payload, modality, f"candidate {cid!r}")
        for cid, payload in config.candidates.items()
    }
    candidates = list(resolved)
    thresholds = {
        name: config.thresholds.get(name, registry.descriptor(name).default_threshold)
        for name in config.metrics
    }
    columns: dict[str, list[float]] = {}
    pairs = [ComparisonPair(resolved[cid], reference, modality) for cid in candidates]
    for name in config.metrics:
        columns[name] = calculate_batch(registry, name, pairs)
    scores = [[columns[name][i] for name in config.metrics] for i in range(len(candidates))]
    return ScoreMatrix(candidates, list(config.metrics), scores, thresholds)


def aggregate(
    matrices: list[ScoreMatrix], spec: AggregationSpec | None = None
) -> ScoreMatrix:
    """Cell-wise arithmetic mean of matrices sharing rows and columns;
    pass flags are recomputed on the aggregated scores."""
    if not matrices:
        raise ExperimentError("nothing to aggregate")
    if spec is not None and len(spec.group_keys) != len(matrices):
        raise ExperimentError(
            f"aggregation spec names {len(spec.group_keys)} groups "
            f"but {len(matrices)} matrices were given"
        )
    first = matrices[0]
    for other in matrices[1:]:
        row_diff = set(first.candidates) ^ set(other.candidates)
        if row_diff:
            raise ExperimentError(f"candidate sets differ: {sorted(row_diff)}")
        col_diff = set(first.metrics) ^ set(other.metrics)
        if col_diff:
            raise ExperimentError(f"metric sets differ: {sorted(col_diff)}")
        if other.thresholds != first.thresholds:
            raise ExperimentError("aggregated matrices carry different thresholds")
    count = len(matrices)
    scores = [
        [
            sum(m.score(candidate, metric) for m in matrices) / count
            for metric in first.metrics
        ]
        for candidate in first.candidates
    ]
    return ScoreMatrix(list(first.candidates), list(first.metrics), scores, dict(first.thresholds))


def select_columns(matrix: ScoreMatrix, metrics: list[str]) -> ScoreMatrix:
    """Project a matrix onto a subset of its metric columns."""
    for name in metrics:
        if name not in matrix.metrics:
            raise ExperimentError(f"metric {name!r} is not a column of this matrix")
    indices = [matrix.metrics.index(name) for name in metrics]
    scores = [[row[j] for j in indices] for row in matrix.scores]
    thresholds = {name: matrix.thresholds[name] for name in metrics}
    return ScoreMatrix(list(matrix.candidates), list(metrics), scores, thresholds)


def concat_columns(matrices: list[ScoreMatrix]) -> ScoreMatrix:
    """Join matrices with identical candidate rows and disjoint metrics."""
    if not matrices:
        raise ExperimentError("nothing to concatenate")
    first = matrices[0]
    metrics: list[str] = []
    thresholds: dict[str, float] = {}
    for other in matrices:
        if other.candidates != first.candidates:
            raise ExperimentError("candidate rows differ between matrices")
        overlap = set(metrics) & set(other.metrics)
        if overlap:
            raise ExperimentError(f"duplicate metric columns: {sorted(overlap)}")
        metrics.extend(other.metrics)
        thresholds.update(other.thresholds)
    scores = [
        [m.scores[i][j] for m in matrices for j in range(len(m.metrics))]
        for i in range(len(first.candidates))
    ]
    return ScoreMatrix(list(first.candidates), metrics, scores, thresholds)


CSV_HEADER = ["candidate", "metric", "score", "threshold", "pass"]


def to_csv(matrix: ScoreMatrix) -> str:
    """RFC-4180 report: one row per cell in candidate-major order, scores
    and thresholds at 6 decimals, trailing newline."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\r\n")
    writer.writerow(CSV_HEADER)
    for candidate, metric, score, threshold, passed in matrix.cells():
        writer.writerow(
            [candidate, metric, f"{score:.6f}", f"{threshold:.6f}", "true" if passed else "false"]
        )
    return buffer.getvalue()


def parse_csv(text: str) -> ScoreMatrix:
    """Rebuild a score matrix from a report produced by to_csv."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != CSV_HEADER:
        raise ExperimentError(f"unexpected CSV header: {rows[0] if rows else 'empty file'}")
    candidates: list[str] = []
    metrics: list[str] = []
    thresholds: dict[str, float] = {}
    scores: dict[tuple[str, str], float] = {}
    for row in rows[1:]:
        if len(row) != 5:
            raise ExperimentError(f"malformed CSV row: {row}")
        candidate, metric, score, threshold, _ = row
        if candidate not in candidates:
            candidates.append(candidate)
        if metric not in metrics:
            metrics.append(metric)
        thresholds[metric] = float(threshold)
        scores[(candidate, metric)] = float(score)
    table = [[scores[(c, m)] for m in metrics] for c in candidates]
    return ScoreMatrix(candidates, metrics, table, thresholds)


def emit_report(
    matrix: ScoreMatrix, out_dir: Path, radar: bool | None = None
) -> dict[str, Any]:
    """Write report.csv, one bar_<metric>.svg per metric and (for three or
    more metrics, or on request) radar.svg under out_dir; returns the
    artifact paths."""
    from .charts import render_bar, render_radar

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    artifacts: dict[str, Any] = {"bars": {}}
    csv_path = out_dir / "report.csv"
    csv_path.write_bytes(to_csv(matrix).encode("utf-8"))
    artifacts["csv"] = csv_path
    for metric in matrix.metrics:
        bar_path = out_dir / f"bar_{metric}.svg"
        bar_path.write_text(render_bar(matrix, metric), encoding="utf-8")
        artifacts["bars"][metric] = bar_path
    want_radar = radar if radar is not None else len(matrix.metrics) >= 3
    artifacts["radar"] = None
    if want_radar:
        radar_path = out_dir / "radar.svg"
        radar_path.write_text(render_radar(matrix), encoding="utf-8")
        artifacts["radar"] = radar_path
    return artifacts
