"""Shared fixture builders: WAV/PNG writers and a synthetic case-study bundle."""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np
import pytest
from PIL import Image


def write_wav(path: Path, samples: np.ndarray, rate: int, fmt: str = "pcm16") -> Path:
    """Minimal WAV writer covering the formats the decoder supports."""
    samples = np.asarray(samples, dtype=np.float64)
    if fmt == "pcm8":
        data = np.round(np.clip(samples, -1, 1) * 127 + 128).astype(np.uint8).tobytes()
        bits, code = 8, 1
    elif fmt == "pcm16":
        data = np.round(np.clip(samples, -1, 1) * 32767).astype("<i2").tobytes()
        bits, code = 16, 1
    elif fmt == "pcm24":
        ints = np.round(np.clip(samples, -1, 1) * (2**23 - 1)).astype(np.int64)
        data = b"".join(int(v & 0xFFFFFF).to_bytes(3, "little") for v in ints)
        bits, code = 24, 1
    elif fmt == "f32":
        data = samples.astype("<f4").tobytes()
        bits, code = 32, 3
    else:
        raise ValueError(fmt)
    header = b"RIFF" + struct.pack("<I", 36 + len(data)) + b"WAVE"
    header += b"fmt " + struct.pack("<IHHIIHH", 16, code, 1, rate, rate * bits // 8, bits // 8, bits)
    header += b"data" + struct.pack("<I", len(data))
    path = Path(path)
    path.write_bytes(header + data)
    return path


def write_stereo_wav(path: Path, left: np.ndarray, right: np.ndarray, rate: int) -> Path:
    frames = np.stack([left, right], axis=1).ravel()
    data = (np.clip(frames, -1, 1) * 32767).astype("<i2").tobytes()
    header = b"RIFF" + struct.pack("<I", 36 + len(data)) + b"WAVE"
    header += b"fmt " + struct.pack("<IHHIIHH", 16, 1, 2, rate, rate * 4, 4, 16)
    header += b"data" + struct.pack("<I", len(data))
    path = Path(path)
    path.write_bytes(header + data)
    return path


def write_png(path: Path, pixels: np.ndarray) -> Path:
    arr = np.asarray(pixels, dtype=np.uint8)
    if arr.ndim == 3 and arr.shape[2] == 1:
        arr = arr[:, :, 0]
    Image.fromarray(arr).save(path)
    return Path(path)


def gradient_image(size: int = 48, tilt: float = 0.0, noise_seed: int | None = None) -> np.ndarray:
    """Deterministic RGB test card; tilt/noise perturb it away from the base."""
    y, x = np.mgrid[0:size, 0:size].astype(np.float64)
    r = (x / (size - 1)) * 255.0
    g = (y / (size - 1)) * 255.0
    b = ((x + y) / (2 * (size - 1))) * 255.0 + tilt
    img = np.stack([r, g, b], axis=2)
    if noise_seed is not None:
        img = img + np.random.default_rng(noise_seed).normal(0.0, 24.0, img.shape)
    return np.clip(img, 0, 255).astype(np.uint8)


def sine_audio(freq: float, seconds: float = 0.25, rate: int = 8000, amp: float = 0.8) -> np.ndarray:
    t = np.arange(int(seconds * rate)) / rate
    return amp * np.sin(2.0 * np.pi * freq * t)


def _plan_document(texts: list[str], sequences: list[str], budgets: list[float]) -> dict:
    return {
        "trip_plan": [
            {
                "day": i + 1,
                "day_plan_text": texts[i],
                "day_plan_sequence": sequences[i],
                "day_budget_euros": budgets[i],
                "image_prompt": f"impressionist view of stop {i + 1}",
                "audio_script": f"day {i + 1} recap in fifteen seconds",
            }
            for i in range(len(texts))
        ]
    }


BASE_TEXTS = [
    "morning at the louvre then a riverside walk and dinner in the marais",
    "climb montmartre visit the basilica and end with a seine cruise",
    "day trip to versailles gardens followed by a quiet cafe evening",
]
BASE_SEQUENCES = [
    "visit(louvre), eat(cafe marais), see(seine)",
    "visit(montmartre) | see(basilica), ride(cruise)",
    "visit(versailles), walk(gardens), eat(cafe)",
]
BASE_BUDGETS = [300.0, 250.0, 280.0]

VARIANT_TEXTS = [
    "start with the eiffel tower then shopping and a show",
    "museums all day with a quick lunch near the opera",
    "explore the latin quarter and relax at a wine bar",
]
VARIANT_SEQUENCES = [
    "visit(eiffel tower), shop(mall), see(show)",
    "visit(orsay), eat(opera cafe), visit(rodin)",
    "walk(latin quarter), eat(wine bar)",
]
VARIANT_BUDGETS = [410.0, 150.0, 330.0]


def build_case_study_bundle(
    root: Path, days: int = 3, pipelines: tuple[str, ...] = ("pipe_a", "pipe_b", "pipe_c")
) -> Path:
    """Bundle where the first pipeline reproduces the baseline exactly
    (its plan equals the reference plan and its media equal its own
    references) and later pipelines deviate progressively."""
    bundle = Path(root)
    bundle.mkdir(parents=True, exist_ok=True)
    baseline = _plan_document(BASE_TEXTS[:days], BASE_SEQUENCES[:days], BASE_BUDGETS[:days])
    (bundle / "reference_plan.json").write_text(json.dumps(baseline, indent=2))
    for index, name in enumerate(pipelines):
        pdir = bundle / name
        refdir = pdir / "reference"
        refdir.mkdir(parents=True, exist_ok=True)
        if index == 0:
            doc = baseline
        else:
            texts = [VARIANT_TEXTS[(d + index) % len(VARIANT_TEXTS)] for d in range(days)]
            seqs = [VARIANT_SEQUENCES[(d + index) % len(VARIANT_SEQUENCES)] for d in range(days)]
            budgets = [VARIANT_BUDGETS[(d + index) % len(VARIANT_BUDGETS)] for d in range(days)]
            doc = _plan_document(texts, seqs, budgets)
        (pdir / "plan.json").write_text(json.dumps(doc, indent=2))
        for d in range(days):
            ref_img = gradient_image(48, tilt=10.0 * d)
            ref_audio = sine_audio(220.0 * (d + 1))
            write_png(refdir / f"day{d + 1}.png", ref_img)
            write_wav(refdir / f"day{d + 1}.wav", ref_audio, 8000)
            if index == 0:
                img, audio = ref_img, ref_audio
            else:
                img = gradient_image(48, tilt=10.0 * d, noise_seed=100 * index + d)
                rng = np.random.default_rng(200 * index + d)
                audio = np.clip(ref_audio + rng.normal(0.0, 0.1 * index, ref_audio.shape), -1, 1)
            write_png(pdir / f"day{d + 1}.png", img)
            write_wav(pdir / f"day{d + 1}.wav", audio, 8000)
    return bundle


@pytest.fixture
def case_study_bundle(tmp_path: Path) -> Path:
    return build_case_study_bundle(tmp_path / "bundle")


# ------------------------------------------------------- random payloads

WORD_POOL = ["plan", "paris", "walk", "eat", "see", "river", "museum", "budget", "day", "tour"]
ACTION_POOL = ["visit(a)", "eat(b)", "see(c)", "walk", "ride(d, e)"]


def random_text(rng) -> str:
    return " ".join(rng.choice(WORD_POOL) for _ in range(rng.randrange(0, 12)))


def random_plan(rng) -> str:
    steps = []
    for _ in range(rng.randrange(0, 6)):
        actions = rng.sample(ACTION_POOL, rng.randrange(1, 3))
        steps.append(" | ".join(actions))
    return ", ".join(steps)


def random_series(rng) -> str:
    n = rng.randrange(0, 8)
    return ", ".join(f"k{i}: {rng.uniform(-50, 50):.3f}" for i in range(n))


def random_image(rng: np.random.Generator):
    from refmetrics.media import ImageBuffer

    h, w = int(rng.integers(8, 25)), int(rng.integers(8, 25))
    channels = int(rng.choice([1, 3]))
    return ImageBuffer(rng.integers(0, 256, (h, w, channels), dtype=np.uint8))


def random_audio(rng: np.random.Generator):
    from refmetrics.media import AudioBuffer

    n = int(rng.integers(0, 4000))
    return AudioBuffer(rng.uniform(-1.0, 1.0, n), 8000)


def random_payload(modality: str, seed: int):
    """One deterministic payload of the given modality."""
    import random as _random

    if modality in ("text", "plan", "timeseries"):
        rng = _random.Random(seed)
        return {"text": random_text, "plan": random_plan, "timeseries": random_series}[
            modality
        ](rng)
    rng = np.random.default_rng(seed)
    return random_image(rng) if modality == "image" else random_audio(rng)
