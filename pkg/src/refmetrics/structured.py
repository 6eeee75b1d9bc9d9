"""Plan-string and time-series parsing plus the structured-data metrics.

Plan format: steps separated by top-level commas; concurrent actions
within one step separated by top-level "|"; commas and pipes inside
parentheses do not split. Series format: "key: value" pairs separated by
commas/newlines, or a bare comma-separated numeric list.
"""

from __future__ import annotations

import re
import warnings
from typing import Sequence

from .textmetrics import lcs_length

PlanSequence = list[frozenset[str]]
TimeSeries = list[tuple[str, float]]


class PlanParseError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (character offset {offset})")
        self.offset = offset


class SeriesParseError(ValueError):
    def __init__(self, message: str, key: str):
        super().__init__(message)
        self.key = key


class DuplicateKeyWarning(UserWarning):
    pass


def _split_top_level(text: str, separator: str) -> list[str]:
    parts: list[str] = []
    depth = 0
    open_stack: list[int] = []
    start = 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
            open_stack.append(i)
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise PlanParseError("unbalanced ')'", i)
            open_stack.pop()
        elif ch == separator and depth == 0:
            parts.append(text[start:i])
            start = i + 1
    if depth > 0:
        raise PlanParseError("unbalanced '('", open_stack[0])
    parts.append(text[start:])
    return parts


def _normalize_action(raw: str) -> str:
    return " ".join(raw.lower().split())


def parse_plan(text: str) -> PlanSequence:
    """Parse an action-sequence string into ordered steps of action sets.

    Actions are normalized (lowercased, surrounding and repeated
    whitespace collapsed); segments that normalize to nothing are
    dropped, so no parsed step is empty.
    """
    plan: PlanSequence = []
    if not text.strip():
        return plan
    for segment in _split_top_level(text, ","):
        actions = {
            norm
            for part in _split_top_level(segment, "|")
            if (norm := _normalize_action(part))
        }
        if actions:
            plan.append(frozenset(actions))
    return plan


def serialize_plan(plan: Sequence[frozenset[str]]) -> str:
    """Inverse of parse_plan up to normalization; actions sorted per step."""
    return ", ".join(" | ".join(sorted(step)) for step in plan)


def _as_plan(value: str | Sequence[frozenset[str]]) -> PlanSequence:
    if isinstance(value, str):
        return parse_plan(value)
    return [frozenset(step) for step in value]


def planning_lcs(
    candidate: str | Sequence[frozenset[str]], reference: str | Sequence[frozenset[str]]
) -> float:
    """Ordered-plan similarity: LCS over steps (steps match only when
    their action sets are equal) divided by the longer plan length."""
    cand, ref = _as_plan(candidate), _as_plan(reference)
    if not cand and not ref:
        return 1.0
    if not cand or not ref:
        return 0.0
    return lcs_length(cand, ref) / max(len(cand), len(ref))


def planning_jaccard(
    candidate: str | Sequence[frozenset[str]], reference: str | Sequence[frozenset[str]]
) -> float:
    """Order-free action coverage: Jaccard over the flattened action sets."""
    cand, ref = _as_plan(candidate), _as_plan(reference)
    c_actions = frozenset().union(*cand) if cand else frozenset()
    r_actions = frozenset().union(*ref) if ref else frozenset()
    if not c_actions and not r_actions:
        return 1.0
    if not c_actions or not r_actions:
        return 0.0
    return len(c_actions & r_actions) / len(c_actions | r_actions)


_NUMBER_RE = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)$")


def _parse_value(raw: str, key: str) -> float:
    token = raw.strip()
    if not _NUMBER_RE.match(token):
        raise SeriesParseError(
            f"non-numeric value {raw.strip()!r} for key {key!r}", key
        )
    return float(token)


def parse_timeseries(text: str) -> TimeSeries:
    """Parse keyed pairs ("mon: 120, tue: 135") or a bare numeric list
    ("1, 2.5, -3", keys become "0", "1", ...). Duplicate keys keep the
    last value and emit a DuplicateKeyWarning."""
    items = [s.strip() for s in re.split(r"[,\n]", text) if s.strip()]
    if not items:
        return []
    keyed = any(":" in item for item in items)
    points: dict[str, float] = {}
    order: list[str] = []
    for index, item in enumerate(items):
        if keyed:
            key, sep, value = item.partition(":")
            key = key.strip()
            if not sep:
                raise SeriesParseError(f"missing ':' in pair {item!r}", item)
        else:
            key, value = str(index), item
        if key in points:
            warnings.warn(
                f"duplicate series key {key!r}: keeping the last value",
                DuplicateKeyWarning,
                stacklevel=2,
            )
        else:
            order.append(key)
        points[key] = _parse_value(value, key)
    return [(key, points[key]) for key in order]


def _as_series(value: str | Sequence[tuple[str, float]]) -> TimeSeries:
    if isinstance(value, str):
        return parse_timeseries(value)
    return [(str(k), float(v)) for k, v in value]


def timeseries_element_diff(
    candidate: str | Sequence[tuple[str, float]],
    reference: str | Sequence[tuple[str, float]],
) -> float:
    """Keyed comparison: per shared key, 1 - |c-r|/max(|c|,|r|) (clamped at
    0; 1 when both values are 0); keys present on one side only score 0;
    the result is the mean over the key union."""
    cand = dict(_as_series(candidate))
    ref = dict(_as_series(reference))
    if not cand and not ref:
        return 1.0
    total = 0.0
    keys = sorted(set(cand) | set(ref))
    for key in keys:
        if key in cand and key in ref:
            c, r = cand[key], ref[key]
            scale = max(abs(c), abs(r))
            if scale == 0.0:
                total += 1.0
            else:
                total += max(0.0, 1.0 - abs(c - r) / scale)
    return total / len(keys)


def timeseries_dtw(
    candidate: str | Sequence[tuple[str, float]],
    reference: str | Sequence[tuple[str, float]],
) -> float:
    """Dynamic-time-warping similarity over the value vectors (keys are
    ignored): 1 / (1 + D/L) where D is the minimal warping-path cost under
    |c_i - r_j| and L is the shortest length among minimal-cost paths."""
    c_vals = [v for _, v in _as_series(candidate)]
    r_vals = [v for _, v in _as_series(reference)]
    if not c_vals and not r_vals:
        return 1.0
    if not c_vals or not r_vals:
        return 0.0
    cost, length = dtw_path_cost(c_vals, r_vals)
    return 1.0 / (1.0 + cost / length)


def dtw_path_cost(candidate: Sequence[float], reference: Sequence[float]) -> tuple[float, int]:
    """Minimal cumulative |c_i - r_j| path cost over the standard
    three-neighbor recurrence, plus the shortest path length achieving it."""
    n, m = len(candidate), len(reference)
    inf = float("inf")
    acc = [[inf] * m for _ in range(n)]
    plen = [[0] * m for _ in range(n)]
    for i in range(n):
        for j in range(m):
            cell = abs(candidate[i] - reference[j])
            if i == 0 and j == 0:
                acc[i][j] = cell
                plen[i][j] = 1
                continue
            best = inf
            best_len = 0
            for pi, pj in ((i - 1, j - 1), (i - 1, j), (i, j - 1)):
                if pi < 0 or pj < 0:
                    continue
                prev_cost, prev_len = acc[pi][pj], plen[pi][pj]
                if prev_cost < best or (prev_cost == best and prev_len < best_len):
                    best, best_len = prev_cost, prev_len
            acc[i][j] = best + cell
            plen[i][j] = best_len + 1
    return acc[n - 1][m - 1], plen[n - 1][m - 1]
