"""Image/audio decoding and the multimedia metrics.

Supported containers: PNG and JPEG images (8-bit, grayscale or RGB) and
WAV audio (PCM 8/16/24-bit and 32-bit float; stereo is averaged to mono).
Decode errors carry the file path and a codec diagnosis.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

STFT_WINDOW = 1024
STFT_HOP = 512
STFT_BINS = STFT_WINDOW // 2 + 1

SNR_CEILING_DB = 50.0
PSNR_CEILING_DB = 50.0

_LUMA = np.array([0.299, 0.587, 0.114])


class MediaDecodeError(ValueError):
    def __init__(self, path: str | Path, diagnosis: str):
        super().__init__(f"cannot decode {path}: {diagnosis}")
        self.path = str(path)
        self.diagnosis = diagnosis


class DimensionMismatchError(ValueError):
    def __init__(self, candidate_shape: tuple, reference_shape: tuple):
        super().__init__(
            f"image dimensions differ: candidate {candidate_shape} vs "
            f"reference {reference_shape}"
        )


class SampleRateMismatchError(ValueError):
    def __init__(self, candidate_rate: int, reference_rate: int):
        super().__init__(
            f"sample rates differ: candidate {candidate_rate} Hz vs "
            f"reference {reference_rate} Hz"
        )


@dataclass(frozen=True)
class ImageBuffer:
    """Decoded 8-bit image, shape (height, width, channels), channels 1 or 3."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        if self.pixels.ndim != 3 or self.pixels.shape[2] not in (1, 3):
            raise ValueError(f"expected (H, W, 1|3) pixel array, got {self.pixels.shape}")
        if self.pixels.shape[0] < 1 or self.pixels.shape[1] < 1:
            raise ValueError("image must be at least 1x1")
        if self.pixels.dtype != np.uint8:
            raise ValueError(f"expected uint8 samples, got {self.pixels.dtype}")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return self.pixels.shape[2]


@dataclass(frozen=True)
class AudioBuffer:
    """Mono audio samples in [-1, 1] plus the sample rate in Hz."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self) -> None:
        if self.samples.ndim != 1:
            raise ValueError(f"expected a mono sample vector, got shape {self.samples.shape}")
        if self.sample_rate <= 0:
            raise ValueError(f"sample rate must be positive, got {self.sample_rate}")
        if self.samples.size and not np.all(np.isfinite(self.samples)):
            raise ValueError("audio samples must be finite")


def load_image(path: str | Path) -> ImageBuffer:
    """Decode a PNG or JPEG file into an 8-bit gray or RGB buffer."""
    try:
        with Image.open(path) as img:
            mode = img.mode
            if mode in ("I", "I;16", "I;16B", "I;16L", "F"):
                raise MediaDecodeError(path, f"unsupported bit depth (mode {mode})")
            if mode == "L":
                arr = np.asarray(img, dtype=np.uint8)[:, :, np.newaxis]
            elif mode == "RGB":
                arr = np.asarray(img, dtype=np.uint8)
            elif mode in ("1", "LA"):
                arr = np.asarray(img.convert("L"), dtype=np.uint8)[:, :, np.newaxis]
            else:
                arr = np.asarray(img.convert("RGB"), dtype=np.uint8)
    except MediaDecodeError:
        raise
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise MediaDecodeError(path, f"not a readable PNG/JPEG image ({exc})") from exc
    return ImageBuffer(arr)


def _decode_wav_samples(data: bytes, audio_format: int, bits: int, path: str | Path) -> np.ndarray:
    if audio_format == 1 and bits == 8:
        return (np.frombuffer(data, dtype=np.uint8).astype(np.float64) - 128.0) / 128.0
    if audio_format == 1 and bits == 16:
        return np.frombuffer(data, dtype="<i2").astype(np.float64) / 32768.0
    if audio_format == 1 and bits == 24:
        raw = np.frombuffer(data, dtype=np.uint8)
        raw = raw[: len(raw) - len(raw) % 3].reshape(-1, 3).astype(np.int64)
        values = raw[:, 0] | (raw[:, 1] << 8) | (raw[:, 2] << 16)
        values = np.where(values >= 1 << 23, values - (1 << 24), values)
        return values.astype(np.float64) / float(1 << 23)
    if audio_format == 3 and bits == 32:
        return np.clip(np.frombuffer(data, dtype="<f4").astype(np.float64), -1.0, 1.0)
    raise MediaDecodeError(path, f"unsupported WAV encoding (format {audio_format}, {bits}-bit)")


def load_audio(path: str | Path) -> AudioBuffer:
    """Decode a WAV file to mono float samples; stereo channels are averaged."""
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise MediaDecodeError(path, f"unreadable file ({exc})") from exc
    if len(blob) < 12 or blob[:4] != b"RIFF" or blob[8:12] != b"WAVE":
        raise MediaDecodeError(path, "not a RIFF/WAVE file")
    fmt = None
    data = None
    pos = 12
    while pos + 8 <= len(blob):
        chunk_id = blob[pos : pos + 4]
        (size,) = struct.unpack_from("<I", blob, pos + 4)
        body = blob[pos + 8 : pos + 8 + size]
        if chunk_id == b"fmt ":
            if len(body) < 16:
                raise MediaDecodeError(path, "truncated fmt chunk")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif chunk_id == b"data":
            data = body
        pos += 8 + size + (size & 1)  # chunks are word-aligned
    if fmt is None or data is None:
        raise MediaDecodeError(path, "missing fmt or data chunk")
    audio_format, channels, sample_rate, _, _, bits = fmt
    if audio_format == 0xFFFE:  # WAVE_FORMAT_EXTENSIBLE: sub-format leads the GUID
        raise MediaDecodeError(path, "WAVE_FORMAT_EXTENSIBLE is not supported")
    if channels < 1:
        raise MediaDecodeError(path, "zero channels")
    samples = _decode_wav_samples(data, audio_format, bits, path)
    if channels > 1:
        samples = samples[: len(samples) - len(samples) % channels]
        samples = samples.reshape(-1, channels).mean(axis=1)
    return AudioBuffer(samples, sample_rate)


def to_grayscale(image: ImageBuffer) -> np.ndarray:
    """Luma (ITU-R 601 weights) grayscale as float64, shape (H, W)."""
    pixels = image.pixels.astype(np.float64)
    if image.channels == 1:
        return pixels[:, :, 0]
    return pixels @ _LUMA


def to_rgb(image: ImageBuffer) -> np.ndarray:
    pixels = image.pixels
    if image.channels == 3:
        return pixels
    return np.repeat(pixels, 3, axis=2)


def resize_bilinear(image: ImageBuffer, width: int, height: int) -> ImageBuffer:
    """Resample to (width, height) with bilinear interpolation."""
    arr = image.pixels[:, :, 0] if image.channels == 1 else image.pixels
    resized = Image.fromarray(arr).resize((width, height), Image.BILINEAR)
    out = np.asarray(resized, dtype=np.uint8)
    if out.ndim == 2:
        out = out[:, :, np.newaxis]
    return ImageBuffer(out)


def _match_geometry(candidate: ImageBuffer, reference: ImageBuffer) -> tuple[ImageBuffer, ImageBuffer]:
    # Candidate is resampled onto the reference grid; never the reverse.
    if (candidate.height, candidate.width) != (reference.height, reference.width):
        candidate = resize_bilinear(candidate, reference.width, reference.height)
    if candidate.pixels.shape[:2] != reference.pixels.shape[:2]:
        raise DimensionMismatchError(candidate.pixels.shape, reference.pixels.shape)
    return candidate, reference


def _gaussian_window(size: int, sigma: float = 1.5) -> np.ndarray:
    offsets = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(offsets**2) / (2.0 * sigma**2))
    g /= g.sum()
    return np.outer(g, g)


def ssim(candidate: ImageBuffer, reference: ImageBuffer) -> float:
    """Mean local structural similarity on the grayscale images.

    Gaussian 11x11 window (sigma 1.5), constants C1=(0.01*255)^2 and
    C2=(0.03*255)^2; the window shrinks to the largest odd size that fits
    when an image is smaller than 11 pixels on a side. A negative mean is
    remapped by (s+1)/2; the result is clamped to [0, 1].
    """
    from scipy.signal import correlate2d  # deferred: scipy dominates import time

    candidate, reference = _match_geometry(candidate, reference)
    gray_c = to_grayscale(candidate)
    gray_r = to_grayscale(reference)
    size = min(11, gray_c.shape[0], gray_c.shape[1])
    if size % 2 == 0:
        size -= 1
    window = _gaussian_window(size)
    c1 = (0.01 * 255.0) ** 2
    c2 = (0.03 * 255.0) ** 2

    def local_mean(img: np.ndarray) -> np.ndarray:
        return correlate2d(img, window, mode="valid")

    mu_c = local_mean(gray_c)
    mu_r = local_mean(gray_r)
    var_c = local_mean(gray_c * gray_c) - mu_c * mu_c
    var_r = local_mean(gray_r * gray_r) - mu_r * mu_r
    cov = local_mean(gray_c * gray_r) - mu_c * mu_r
    ssim_map = ((2.0 * mu_c * mu_r + c1) * (2.0 * cov + c2)) / (
        (mu_c * mu_c + mu_r * mu_r + c1) * (var_c + var_r + c2)
    )
    score = float(ssim_map.mean())
    if score < 0.0:
        score = (score + 1.0) / 2.0
    return min(1.0, max(0.0, score))


def psnr_score(candidate: ImageBuffer, reference: ImageBuffer) -> float:
    """Peak signal-to-noise ratio mapped onto [0, 1] by clamping at
    50 dB; identical images score 1.0 by definition."""
    candidate, reference = _match_geometry(candidate, reference)
    if candidate.channels != reference.channels:
        c_arr, r_arr = to_rgb(candidate), to_rgb(reference)
    else:
        c_arr, r_arr = candidate.pixels, reference.pixels
    diff = c_arr.astype(np.float64) - r_arr.astype(np.float64)
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return 1.0
    psnr = 10.0 * math.log10(255.0**2 / mse)
    return min(PSNR_CEILING_DB, max(0.0, psnr)) / PSNR_CEILING_DB


def _area_downsample(gray: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    # Exact box/area averaging with fractional cell coverage.
    def weights(n_out: int, n_in: int) -> np.ndarray:
        w = np.zeros((n_out, n_in))
        step = n_in / n_out
        for i in range(n_out):
            lo, hi = i * step, (i + 1) * step
            first, last = int(math.floor(lo)), int(math.ceil(hi))
            for j in range(first, min(last, n_in)):
                w[i, j] = min(hi, j + 1) - max(lo, j)
        return w / step

    return weights(out_h, gray.shape[0]) @ gray @ weights(out_w, gray.shape[1]).T


def average_hash(image: ImageBuffer) -> np.ndarray:
    """64-bit perceptual fingerprint: 8x8 area-averaged grayscale
    thresholded at its own mean (>= mean sets the bit)."""
    small = _area_downsample(to_grayscale(image), 8, 8)
    return (small >= small.mean()).ravel()


def average_hash_score(candidate: ImageBuffer, reference: ImageBuffer) -> float:
    """1 - normalized Hamming distance between the two average hashes."""
    distance = int(np.count_nonzero(average_hash(candidate) != average_hash(reference)))
    return 1.0 - distance / 64.0


def histogram_match(candidate: ImageBuffer, reference: ImageBuffer) -> float:
    """Mean per-channel histogram intersection of the 256-bin normalized
    channel histograms. Gray vs RGB pairs are compared in RGB."""
    if candidate.channels != reference.channels:
        c_arr, r_arr = to_rgb(candidate), to_rgb(reference)
    else:
        c_arr, r_arr = candidate.pixels, reference.pixels
    total = 0.0
    channels = c_arr.shape[2]
    for ch in range(channels):
        h_c = np.bincount(c_arr[:, :, ch].ravel(), minlength=256).astype(np.float64)
        h_r = np.bincount(r_arr[:, :, ch].ravel(), minlength=256).astype(np.float64)
        h_c /= h_c.sum()
        h_r /= h_r.sum()
        total += float(np.minimum(h_c, h_r).sum())
    return total / channels


def audio_snr_score(candidate: AudioBuffer, reference: AudioBuffer) -> float:
    """Signal-to-noise ratio of the reference against the residual
    (reference - candidate), clamped to [0, 50] dB and scaled to [0, 1]."""
    if candidate.sample_rate != reference.sample_rate:
        raise SampleRateMismatchError(candidate.sample_rate, reference.sample_rate)
    n = min(len(candidate.samples), len(reference.samples))
    if n == 0:
        return 1.0 if len(candidate.samples) == len(reference.samples) else 0.0
    cand = candidate.samples[:n]
    ref = reference.samples[:n]
    noise = ref - cand
    p_noise = float(np.mean(noise * noise))
    if p_noise == 0.0:
        return 1.0
    p_ref = float(np.mean(ref * ref))
    if p_ref == 0.0:
        return 0.0
    snr = 10.0 * math.log10(p_ref / p_noise)
    return min(SNR_CEILING_DB, max(0.0, snr)) / SNR_CEILING_DB


def spectrogram(audio: AudioBuffer) -> np.ndarray:
    """One-sided STFT magnitudes: Hann window of 1024 samples, hop 512,
    yielding (frames, 513). Non-empty signals shorter than one window are
    zero-padded to produce a single frame."""
    samples = audio.samples
    if samples.size == 0:
        return np.zeros((0, STFT_BINS))
    if samples.size < STFT_WINDOW:
        samples = np.pad(samples, (0, STFT_WINDOW - samples.size))
    frames = 1 + (samples.size - STFT_WINDOW) // STFT_HOP
    window = 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(STFT_WINDOW) / STFT_WINDOW)
    starts = np.arange(frames) * STFT_HOP
    segments = samples[starts[:, np.newaxis] + np.arange(STFT_WINDOW)]
    return np.abs(np.fft.rfft(segments * window, axis=1))


def spectrogram_distance_score(candidate: AudioBuffer, reference: AudioBuffer) -> float:
    """1 / (1 + d) where d is the mean absolute difference of the
    log(1 + magnitude) spectrograms over the common frame count."""
    if candidate.sample_rate != reference.sample_rate:
        raise SampleRateMismatchError(candidate.sample_rate, reference.sample_rate)
    c_empty = candidate.samples.size == 0
    r_empty = reference.samples.size == 0
    if c_empty or r_empty:
        return 1.0 if c_empty and r_empty else 0.0
    spec_c = spectrogram(candidate)
    spec_r = spectrogram(reference)
    frames = min(spec_c.shape[0], spec_r.shape[0])
    d = float(np.mean(np.abs(np.log1p(spec_c[:frames]) - np.log1p(spec_r[:frames]))))
    return 1.0 / (1.0 + d)
