"""Jaro and Jaro-Winkler similarity between token surfaces.

Both inputs are case-folded before comparison, so a lowercase English word
and its uppercase gloss compare as equal.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class JaroWinklerConfig:
    prefix_scale: float = 0.1
    max_prefix: int = 4

    def __post_init__(self):
        if not 0 < self.prefix_scale <= 0.25:
            raise ValueError(f"prefix_scale must lie in (0, 0.25], got {self.prefix_scale}")
        if self.max_prefix < 0:
            raise ValueError(f"max_prefix must be >= 0, got {self.max_prefix}")


DEFAULT_JW = JaroWinklerConfig()


@dataclass(frozen=True)
class MatchStats:
    matches: int
    transpositions: int


def match_window(len1: int, len2: int) -> int:
    return max(max(len1, len2) // 2 - 1, 0)


def match_stats(s1: str, s2: str) -> MatchStats:
    """Count matching characters and transpositions for the Jaro measure.

    A character of ``s1`` matches the first unused equal character of ``s2``
    within the match window. Transpositions are half the number of matched
    positions whose characters disagree when both matched sequences are read
    in order.
    """
    window = match_window(len(s1), len(s2))
    used = [False] * len(s2)
    matched1 = []
    for i, ch in enumerate(s1):
        lo = max(0, i - window)
        hi = min(len(s2), i + window + 1)
        for k in range(lo, hi):
            if not used[k] and s2[k] == ch:
                used[k] = True
                matched1.append(ch)
                break
    matched2 = [ch for ch, u in zip(s2, used) if u]
    half = sum(a != b for a, b in zip(matched1, matched2))
    return MatchStats(len(matched1), half // 2)


def jaro(s1: str, s2: str) -> float:
    s1, s2 = s1.lower(), s2.lower()
    if not s1 and not s2:
        return 1.0
    if not s1 or not s2:
        return 0.0
    st = match_stats(s1, s2)
    m, t = st.matches, st.transpositions
    if m == 0:
        return 0.0
    return (m / len(s1) + m / len(s2) + (m - t) / m) / 3.0


def common_prefix(s1: str, s2: str, cap: int) -> int:
    n = 0
    for a, b in zip(s1.lower(), s2.lower()):
        if a != b or n >= cap:
            break
        n += 1
    return n


def jaro_winkler(s1: str, s2: str, cfg: JaroWinklerConfig = DEFAULT_JW) -> float:
    """Jaro similarity boosted by the length of the shared prefix.

    >>> round(jaro_winkler("piano", "play"), 4)
    0.67
    """
    dj = jaro(s1, s2)
    ell = common_prefix(s1, s2, cfg.max_prefix)
    return dj + ell * cfg.prefix_scale * (1.0 - dj)
