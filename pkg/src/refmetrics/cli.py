"""Command-line front end.

    refmetrics list-metrics
    refmetrics calc <metric> <candidate> <reference>
    refmetrics compare --manifest plan.json --out reports/ [--no-gate]
    refmetrics casestudy --bundle bundle/ --out reports/

`calc` arguments are literals, or file paths when a file of that name
exists (media metrics always require file paths). `compare` exits 0 only
when every cell meets its threshold, unless --no-gate is given. All paths
are resolved relative to the working directory.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any

from . import calculate
from .builtins import default_registry
from .core import MODALITIES, MetricError, Registry
from .experiment import (
    ExperimentConfig,
    ExperimentError,
    ScoreMatrix,
    aggregate,
    compare,
    concat_columns,
    emit_report,
)

PLAN_COHERENCE_METRICS = [
    "rougeL",
    "bertscore",
    "planning_lcs",
    "planning_jaccard",
    "timeseries_dtw",
]
MODALITY_QUALITY_METRICS = [
    "ssim",
    "average_hash",
    "histogram_match",
    "audio_snr",
    "spectrogram_distance",
]

PLAN_DAY_FIELDS = (
    "day",
    "day_plan_text",
    "day_plan_sequence",
    "day_budget_euros",
    "image_prompt",
    "audio_script",
)


class ManifestError(ValueError):
    pass


def _fail(message: str) -> ManifestError:
    return ManifestError(f"invalid manifest: {message}")


def _check_payload(value: Any, where: str, modality: str) -> Any:
    if isinstance(value, str):
        if modality in ("image", "audio"):
            raise _fail(f"{where}: {modality} payloads must be file references")
        return value
    if isinstance(value, dict):
        extra = set(value) - {"file"}
        if extra or "file" not in value:
            raise _fail(f"{where}: file reference must be exactly {{\"file\": path}}")
        if not isinstance(value["file"], str):
            raise _fail(f"{where}: file path must be a string")
        return Path(value["file"])
    raise _fail(f"{where}: payload must be a string or a file reference")


def _check_candidates(value: Any, where: str, modality: str) -> dict[str, Any]:
    if not isinstance(value, dict) or not value:
        raise _fail(f"{where}: candidates must be a non-empty object")
    return {
        str(cid): _check_payload(payload, f"{where}.candidates[{cid!r}]", modality)
        for cid, payload in value.items()
    }


def load_manifest(path: Path) -> dict[str, Any]:
    """Parse and strictly validate a comparison manifest.

    Returns {"metrics", "thresholds", "radar", "groups"} where groups is
    an ordered {name: (candidates, reference)} mapping (a group-less
    manifest becomes one anonymous group).
    """
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ManifestError(f"manifest {path} is not valid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise _fail("top level must be an object")
    allowed = {"modality", "metrics", "thresholds", "radar", "candidates", "reference", "groups"}
    unknown = sorted(set(document) - allowed)
    if unknown:
        raise _fail(f"unknown fields: {', '.join(unknown)}")
    modality = document.get("modality")
    if modality not in MODALITIES:
        raise _fail(f"modality must be one of {', '.join(MODALITIES)}, got {modality!r}")
    metrics = document.get("metrics")
    if (
        not isinstance(metrics, list)
        or not metrics
        or not all(isinstance(m, str) for m in metrics)
    ):
        raise _fail("metrics must be a non-empty list of metric names")
    thresholds = document.get("thresholds", {})
    if not isinstance(thresholds, dict):
        raise _fail("thresholds must be an object of metric -> value")
    for name, value in thresholds.items():
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise _fail(f"threshold for {name!r} must be a number")
        if not 0.0 <= float(value) <= 1.0:
            raise _fail(f"threshold for {name!r} must be in [0, 1], got {value}")
    radar = document.get("radar")
    if radar is not None and not isinstance(radar, bool):
        raise _fail("radar must be a boolean")
    if radar is True and len(metrics) < 3:
        raise _fail(f"radar requires at least 3 metrics, got {len(metrics)}")

    has_inline = "candidates" in document or "reference" in document
    has_groups = "groups" in document
    if has_inline == has_groups:
        raise _fail("provide either candidates+reference or groups, not both")
    groups: dict[str, tuple[dict[str, Any], Any]] = {}
    if has_inline:
        if "candidates" not in document or "reference" not in document:
            raise _fail("candidates and reference are both required")
        groups[""] = (
            _check_candidates(document["candidates"], "manifest", modality),
            _check_payload(document["reference"], "manifest.reference", modality),
        )
    else:
        raw_groups = document["groups"]
        if not isinstance(raw_groups, list) or not raw_groups:
            raise _fail("groups must be a non-empty list")
        for i, group in enumerate(raw_groups):
            if not isinstance(group, dict):
                raise _fail(f"groups[{i}] must be an object")
            extra = sorted(set(group) - {"name", "candidates", "reference"})
            if extra:
                raise _fail(f"groups[{i}]: unknown fields: {', '.join(extra)}")
            name = group.get("name")
            if not isinstance(name, str) or not name:
                raise _fail(f"groups[{i}]: name must be a non-empty string")
            if name in groups:
                raise _fail(f"duplicate group name {name!r}")
            if "candidates" not in group or "reference" not in group:
                raise _fail(f"groups[{i}]: candidates and reference are required")
            groups[name] = (
                _check_candidates(group["candidates"], f"groups[{i}]", modality),
                _check_payload(group["reference"], f"groups[{i}].reference", modality),
            )
    return {
        "modality": modality,
        "metrics": [str(m) for m in metrics],
        "thresholds": {str(k): float(v) for k, v in thresholds.items()},
        "radar": radar,
        "groups": groups,
    }


def run_manifest(manifest: dict[str, Any], registry: Registry) -> ScoreMatrix:
    """Compare every group of a validated manifest and average the results."""
    for name in manifest["metrics"]:
        descriptor = registry.descriptor(name)
        if descriptor.modality != manifest["modality"]:
            raise ManifestError(
                f"metric {name!r} has modality {descriptor.modality!r} but the "
                f"manifest declares {manifest['modality']!r}"
            )
    matrices = [
        compare(
            ExperimentConfig(
                candidates=candidates,
                reference=reference,
                metrics=manifest["metrics"],
                thresholds=manifest["thresholds"],
            ),
            registry,
        )
        for candidates, reference in manifest["groups"].values()
    ]
    return matrices[0] if len(matrices) == 1 else aggregate(matrices)


def format_table(matrix: ScoreMatrix) -> str:
    """Aligned candidate x metric table with 3-decimal scores."""
    id_width = max(len("candidate"), *(len(c) for c in matrix.candidates))
    widths = [max(len(m), 5) for m in matrix.metrics]
    lines = [
        "candidate".ljust(id_width)
        + "".join(f"  {m.rjust(w)}" for m, w in zip(matrix.metrics, widths))
    ]
    for i, candidate in enumerate(matrix.candidates):
        cells = "".join(
            f"  {matrix.scores[i][j]:.3f}".rjust(w + 2) for j, w in enumerate(widths)
        )
        lines.append(candidate.ljust(id_width) + cells)
    return "\n".join(lines)


def _calc_payload(raw: str, modality: str) -> Any:
    path = Path(raw)
    if modality in ("image", "audio"):
        if not path.is_file():
            raise MetricError(f"{modality} payloads must be readable files: {raw!r}")
        return path
    if path.is_file():
        return path.read_text(encoding="utf-8")
    return raw


def cmd_calc(args: argparse.Namespace) -> int:
    registry = default_registry()
    descriptor = registry.descriptor(args.metric)
    score = calculate(
        args.metric,
        _calc_payload(args.candidate, descriptor.modality),
        _calc_payload(args.reference, descriptor.modality),
    )[0]
    print(f"{score:.6f}")
    return 0


def cmd_list_metrics(_: argparse.Namespace) -> int:
    rows = default_registry().list_metrics()
    name_w = max(len(d.name) for d in rows)
    modality_w = max(len(d.modality) for d in rows)
    for d in rows:
        print(f"{d.name.ljust(name_w)}  {d.modality.ljust(modality_w)}  {d.default_threshold:.2f}")
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    registry = default_registry()
    manifest = load_manifest(Path(args.manifest))
    matrix = run_manifest(manifest, registry)
    emit_report(matrix, Path(args.out), radar=manifest["radar"])
    print(format_table(matrix))
    if args.no_gate or matrix.all_pass:
        return 0
    return 1


def _load_plan_document(path: Path) -> list[dict[str, Any]]:
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ManifestError(f"cannot read plan {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ManifestError(f"plan {path} is not valid JSON: {exc}") from exc
    days = document.get("trip_plan") if isinstance(document, dict) else None
    if not isinstance(days, list) or not days:
        raise ManifestError(f"plan {path}: expected a non-empty trip_plan array")
    for i, day in enumerate(days):
        if not isinstance(day, dict):
            raise ManifestError(f"plan {path}: trip_plan[{i}] must be an object")
        missing = [k for k in PLAN_DAY_FIELDS if k not in day]
        if missing:
            raise ManifestError(
                f"plan {path}: trip_plan[{i}] is missing {', '.join(missing)}"
            )
    return days


def _budget_series(days: list[dict[str, Any]]) -> list[tuple[str, float]]:
    return [(str(day["day"]), float(day["day_budget_euros"])) for day in days]


def _find_media(pipeline_dir: Path, stem: str, suffixes: tuple[str, ...], pipeline: str) -> Path:
    for suffix in suffixes:
        path = pipeline_dir / f"{stem}{suffix}"
        if path.is_file():
            return path
    raise ManifestError(
        f"pipeline {pipeline!r}: missing file {pipeline_dir / (stem + suffixes[0])}"
    )


def cmd_casestudy(args: argparse.Namespace) -> int:
    """Two-part protocol over a bundle of per-pipeline outputs.

    Part 1 scores each pipeline's plan JSON against the single baseline
    plan (text, plan and budget-series metrics); part 2 scores each
    pipeline's image/audio files against that pipeline's own references.
    Day-level scores are averaged; the budget series spans all days.
    """
    registry = default_registry()
    bundle = Path(args.bundle)
    baseline_path = bundle / "reference_plan.json"
    if not baseline_path.is_file():
        raise ManifestError(f"bundle is missing the baseline plan: {baseline_path}")
    baseline = _load_plan_document(baseline_path)
    day_count = len(baseline)
    pipeline_dirs = sorted(p for p in bundle.iterdir() if p.is_dir())
    if not pipeline_dirs:
        raise ManifestError(f"bundle {bundle} contains no pipeline directories")
    plans: dict[str, list[dict[str, Any]]] = {}
    for pipeline_dir in pipeline_dirs:
        name = pipeline_dir.name
        days = _load_plan_document(pipeline_dir / "plan.json")
        if len(days) != day_count:
            raise ManifestError(
                f"pipeline {name!r}: plan has {len(days)} days, baseline has {day_count}"
            )
        plans[name] = days

    def day_matrix(metrics: list[str], payloads: dict[str, Any], reference: Any) -> ScoreMatrix:
        return compare(
            ExperimentConfig(candidates=payloads, reference=reference, metrics=metrics),
            registry,
        )

    # Part 1: plan coherence against the single baseline plan.
    text_days = []
    plan_days = []
    for d in range(day_count):
        text_days.append(
            day_matrix(
                ["rougeL", "bertscore"],
                {name: plans[name][d]["day_plan_text"] for name in plans},
                baseline[d]["day_plan_text"],
            )
        )
        plan_days.append(
            day_matrix(
                ["planning_lcs", "planning_jaccard"],
                {name: plans[name][d]["day_plan_sequence"] for name in plans},
                baseline[d]["day_plan_sequence"],
            )
        )
    budget_matrix = day_matrix(
        ["timeseries_dtw"],
        {name: _series_text(_budget_series(plans[name])) for name in plans},
        _series_text(_budget_series(baseline)),
    )
    coherence = concat_columns([aggregate(text_days), aggregate(plan_days), budget_matrix])

    # Part 2: image/audio fidelity against per-pipeline references.
    media_days = []
    for d in range(day_count):
        image_matrices = []
        audio_matrices = []
        for pipeline_dir in pipeline_dirs:
            name = pipeline_dir.name
            reference_dir = pipeline_dir / "reference"
            image = _find_media(pipeline_dir, f"day{d + 1}", (".png", ".jpg", ".jpeg"), name)
            image_ref = _find_media(reference_dir, f"day{d + 1}", (".png", ".jpg", ".jpeg"), name)
            audio = _find_media(pipeline_dir, f"day{d + 1}", (".wav",), name)
            audio_ref = _find_media(reference_dir, f"day{d + 1}", (".wav",), name)
            image_matrices.append((name, image, image_ref))
            audio_matrices.append((name, audio, audio_ref))
        image_day = _per_pipeline_matrix(
            registry, ["ssim", "average_hash", "histogram_match"], image_matrices
        )
        audio_day = _per_pipeline_matrix(
            registry, ["audio_snr", "spectrogram_distance"], audio_matrices
        )
        media_days.append(concat_columns([image_day, audio_day]))
    quality = aggregate(media_days)

    out = Path(args.out)
    emit_report(coherence, out / "plan_coherence")
    emit_report(quality, out / "modality_quality")
    print("plan coherence (averaged over days)")
    print(format_table(coherence))
    print()
    print("modality quality (averaged over days)")
    print(format_table(quality))
    return 0


def _series_text(points: list[tuple[str, float]]) -> str:
    return ", ".join(f"{key}: {value}" for key, value in points)


def _per_pipeline_matrix(
    registry: Registry, metrics: list[str], rows: list[tuple[str, Path, Path]]
) -> ScoreMatrix:
    # Each pipeline has its own reference, so compare one pipeline at a
    # time and stack the single-row matrices.
    singles = [
        compare(
            ExperimentConfig(candidates={name: cand}, reference=ref, metrics=metrics),
            registry,
        )
        for name, cand, ref in rows
    ]
    candidates = [m.candidates[0] for m in singles]
    scores = [m.scores[0] for m in singles]
    return ScoreMatrix(candidates, list(metrics), scores, dict(singles[0].thresholds))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="refmetrics",
        description="Reference-based comparison of generated text, plans, series, images and audio.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    calc = sub.add_parser("calc", help="score one candidate/reference pair")
    calc.add_argument("metric")
    calc.add_argument("candidate")
    calc.add_argument("reference")
    calc.set_defaults(func=cmd_calc)

    listing = sub.add_parser("list-metrics", help="list the built-in metrics")
    listing.set_defaults(func=cmd_list_metrics)

    comp = sub.add_parser("compare", help="run a manifest-driven experiment")
    comp.add_argument("--manifest", required=True)
    comp.add_argument("--out", required=True)
    comp.add_argument(
        "--no-gate",
        action="store_true",
        help="exit 0 even when cells fall below their thresholds",
    )
    comp.set_defaults(func=cmd_compare)

    case = sub.add_parser("casestudy", help="run the two-part pipeline evaluation")
    case.add_argument("--bundle", required=True)
    case.add_argument("--out", required=True)
    case.set_defaults(func=cmd_casestudy)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (MetricError, ExperimentError, ManifestError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
