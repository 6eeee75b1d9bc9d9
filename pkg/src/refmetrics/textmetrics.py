"""Textual similarity metrics over tokenized strings.

All metrics return similarities in [0, 1]. Shared degenerate rules: two
empty inputs are vacuously identical (1.0) and an empty/non-empty pair
scores 0.0, unless a metric's own formula already yields that.
"""

from __future__ import annotations

import difflib
import hashlib
import math
import unicodedata
from collections import Counter
from typing import Protocol, Sequence

import numpy as np

TokenSequence = Sequence[str]


def _strip_punct(token: str) -> str:
    start, end = 0, len(token)
    while start < end and unicodedata.category(token[start]).startswith("P"):
        start += 1
    while end > start and unicodedata.category(token[end - 1]).startswith("P"):
        end -= 1
    return token[start:end]


def tokenize(text: str) -> list[str]:
    """Canonical tokenizer: lowercase, split on whitespace, strip edge
    punctuation from each token (internal punctuation is kept)."""
    tokens = []
    for raw in text.lower().split():
        tok = _strip_punct(raw)
        if tok:
            tokens.append(tok)
    return tokens


def _as_tokens(value: str | TokenSequence) -> list[str]:
    if isinstance(value, str):
        return tokenize(value)
    return list(value)


def _ngram_counts(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def lcs_length(a: Sequence, b: Sequence) -> int:
    """Length of the longest common subsequence (classic two-row DP)."""
    if len(a) < len(b):
        a, b = b, a
    prev = [0] * (len(b) + 1)
    for x in a:
        curr = [0]
        for j, y in enumerate(b):
            curr.append(prev[j] + 1 if x == y else max(prev[j + 1], curr[j]))
        prev = curr
    return prev[-1]


def bleu(candidate: str | TokenSequence, reference: str | TokenSequence) -> float:
    """BLEU-4 with uniform weights and clipped modified precisions.

    Zero numerators for n >= 2 are smoothed add-one (numerator and
    denominator); a zero unigram precision forces 0.0. Brevity penalty
    exp(1 - r/c) applies when the candidate is shorter.
    """
    cand, ref = _as_tokens(candidate), _as_tokens(reference)
    if not cand and not ref:
        return 1.0
    if not cand or not ref:
        return 0.0
    log_sum = 0.0
    for n in range(1, 5):
        c_counts = _ngram_counts(cand, n)
        r_counts = _ngram_counts(ref, n)
        clipped = sum(min(count, r_counts[g]) for g, count in c_counts.items())
        total = sum(c_counts.values())
        if n == 1:
            if clipped == 0:
                return 0.0
            p = clipped / total
        elif clipped == 0:
            p = (clipped + 1) / (total + 1)
        else:
            p = clipped / total
        log_sum += math.log(p)
    brevity = 1.0 if len(cand) >= len(ref) else math.exp(1.0 - len(ref) / len(cand))
    return brevity * math.exp(log_sum / 4.0)


ROUGE_VARIANTS = ("rouge1", "rouge2", "rougeL")


def rouge(
    candidate: str | TokenSequence,
    reference: str | TokenSequence,
    variant: str = "rougeL",
) -> float:
    """ROUGE F1: n-gram multiset overlap (rouge1/rouge2) or LCS (rougeL)."""
    if variant not in ROUGE_VARIANTS:
        raise ValueError(
            f"unknown ROUGE variant {variant!r}; expected one of {', '.join(ROUGE_VARIANTS)}"
        )
    cand, ref = _as_tokens(candidate), _as_tokens(reference)
    if not cand and not ref:
        return 1.0
    if not cand or not ref:
        return 0.0
    if variant == "rougeL":
        overlap = lcs_length(cand, ref)
        c_total, r_total = len(cand), len(ref)
    else:
        n = 1 if variant == "rouge1" else 2
        c_counts = _ngram_counts(cand, n)
        r_counts = _ngram_counts(ref, n)
        overlap = sum(min(count, r_counts[g]) for g, count in c_counts.items())
        c_total = sum(c_counts.values())
        r_total = sum(r_counts.values())
    if c_total == 0 or r_total == 0:
        return 0.0
    precision = overlap / c_total
    recall = overlap / r_total
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def _unigram_distribution(tokens: list[str]) -> dict[str, float]:
    counts = Counter(tokens)
    total = len(tokens)
    return {tok: c / total for tok, c in counts.items()}


def js_divergence_score(
    candidate: str | TokenSequence, reference: str | TokenSequence
) -> float:
    """1 - Jensen-Shannon divergence (base 2) of the unigram distributions."""
    cand, ref = _as_tokens(candidate), _as_tokens(reference)
    if not cand and not ref:
        return 1.0
    if not cand or not ref:
        return 0.0
    p = _unigram_distribution(cand)
    q = _unigram_distribution(ref)
    divergence = 0.0
    for tok in sorted(set(p) | set(q)):
        pi, qi = p.get(tok, 0.0), q.get(tok, 0.0)
        m = 0.5 * (pi + qi)
        if pi > 0.0:
            divergence += 0.5 * pi * math.log2(pi / m)
        if qi > 0.0:
            divergence += 0.5 * qi * math.log2(qi / m)
    return 1.0 - divergence


def jaccard(candidate: str | TokenSequence, reference: str | TokenSequence) -> float:
    """Token-set intersection over union."""
    c_set, r_set = set(_as_tokens(candidate)), set(_as_tokens(reference))
    if not c_set and not r_set:
        return 1.0
    return len(c_set & r_set) / len(c_set | r_set)


def cosine_tfidf(
    candidate: str | TokenSequence, reference: str | TokenSequence
) -> float:
    """Cosine of TF-IDF vectors over the two-document corpus {candidate,
    reference}, with smoothed idf = ln((1+N)/(1+df)) + 1 and raw-count tf."""
    cand, ref = _as_tokens(candidate), _as_tokens(reference)
    if not cand and not ref:
        return 1.0
    if not cand or not ref:
        return 0.0
    c_counts, r_counts = Counter(cand), Counter(ref)
    dot = c_norm = r_norm = 0.0
    for tok in sorted(set(c_counts) | set(r_counts)):
        df = (tok in c_counts) + (tok in r_counts)
        idf = math.log(3.0 / (1.0 + df)) + 1.0
        wc = c_counts[tok] * idf
        wr = r_counts[tok] * idf
        dot += wc * wr
        c_norm += wc * wc
        r_norm += wr * wr
    if c_norm == 0.0 or r_norm == 0.0:
        return 0.0
    return dot / (math.sqrt(c_norm) * math.sqrt(r_norm))


def levenshtein_score(candidate: str, reference: str) -> float:
    """1 - edit_distance / max_length over raw character strings."""
    if candidate == reference:
        return 1.0
    longest = max(len(candidate), len(reference))
    return 1.0 - _edit_distance(candidate, reference) / longest


def _edit_distance(a: str, b: str) -> int:
    # Unit-cost insert/delete/substitute, two-row DP.
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ch_a in enumerate(a, start=1):
        curr = [i]
        for j, ch_b in enumerate(b):
            cost = 0 if ch_a == ch_b else 1
            curr.append(min(prev[j] + cost, prev[j + 1] + 1, curr[j] + 1))
        prev = curr
    return prev[-1]


def sequence_matcher_score(candidate: str, reference: str) -> float:
    """Ratcliff/Obershelp ratio 2M/(len_c + len_r), no junk heuristic."""
    if not candidate and not reference:
        return 1.0
    return difflib.SequenceMatcher(None, candidate, reference, autojunk=False).ratio()


class EmbeddingProvider(Protocol):
    """Maps a token sequence to one unit-norm vector per token."""

    def embed(self, tokens: Sequence[str]) -> np.ndarray: ...


class HashEmbedding:
    """Deterministic stand-in provider: each token's vector is a
    pseudorandom unit vector seeded from a stable hash of the token, so
    identical tokens embed identically across runs and processes.

    Safe for concurrent embed calls: cache races at worst recompute the
    same vector.
    """

    def __init__(self, dim: int = 32):
        if dim < 8:
            raise ValueError("embedding dimension must be at least 8")
        self.dim = dim
        self._cache: dict[str, np.ndarray] = {}

    def _vector(self, token: str) -> np.ndarray:
        vec = self._cache.get(token)
        if vec is None:
            seed = int.from_bytes(hashlib.sha256(token.encode("utf-8")).digest()[:8], "big")
            raw = np.random.default_rng(seed).standard_normal(self.dim)
            vec = raw / np.linalg.norm(raw)
            self._cache[token] = vec
        return vec

    def embed(self, tokens: Sequence[str]) -> np.ndarray:
        if not tokens:
            return np.zeros((0, self.dim))
        return np.stack([self._vector(tok) for tok in tokens])


def embedding_score(
    candidate: str | TokenSequence,
    reference: str | TokenSequence,
    provider: EmbeddingProvider,
) -> float:
    """Greedy-matching embedding F1: precision/recall are the means of the
    per-token best cosines, clamped to [0, 1] before averaging."""
    cand, ref = _as_tokens(candidate), _as_tokens(reference)
    if not cand and not ref:
        return 1.0
    if not cand or not ref:
        return 0.0
    try:
        c_vecs = np.asarray(provider.embed(cand), dtype=float)
        r_vecs = np.asarray(provider.embed(ref), dtype=float)
    except Exception as exc:
        raise RuntimeError(
            f"embedding provider failed on tokens {cand[:3] + ref[:3]}: {exc}"
        ) from exc
    cosines = np.clip(c_vecs @ r_vecs.T, 0.0, 1.0)
    precision = float(cosines.max(axis=1).mean())
    recall = float(cosines.max(axis=0).mean())
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)
