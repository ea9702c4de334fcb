"""Text renderings of word alignments: GIZA-style listings and link matrices."""

from __future__ import annotations

from typing import Iterable

from ..corpus import SentencePair


def format_score(score: float) -> str:
    return f"{score:.7g}"


def format_giza_alignment(
    pair: SentencePair, links: Iterable[tuple[int, int]], score: float | None = None
) -> str:
    """Gloss sentence followed by ``word ({ j ... })`` for NULL and each English word.

    Gloss positions linked to no English word are listed under NULL. With a
    ``score`` the source/target lengths and the score follow, tab separated.
    """
    linked: dict[int, list[int]] = {i: [] for i in range(pair.l_f + 1)}
    covered = set()
    for i, j in links:
        linked[i].append(j)
        covered.add(j)
    linked[0] = [j for j in range(1, pair.l_e + 1) if j not in covered]
    words = ("NULL",) + pair.source
    parts = [" ".join(pair.target)]
    for i, word in enumerate(words):
        pos = " ".join(str(j) for j in sorted(linked[i]))
        parts.append(f"{word} ({{ {pos} }})" if pos else f"{word} ({{ }})")
    line = " ".join(parts)
    if score is not None:
        line += f"\tSource : {pair.l_f} Target : {pair.l_e}\t{format_score(score)}"
    return line


FILLED = "■"
EMPTY = "·"


def render_alignment_matrix(pair: SentencePair, links: Iterable[tuple[int, int]]) -> str:
    """Grid with English words as rows and gloss words as columns.

    Gloss labels are written vertically above their columns so every cell
    is one character wide.
    """
    links = set(links)
    label_w = max(len(w) for w in pair.source)
    height = max(len(w) for w in pair.target)
    lines = []
    for k in range(height):
        chars = [w[k] if k < len(w) else " " for w in pair.target]
        lines.append(" " * label_w + " | " + " ".join(chars).rstrip())
    lines.append("-" * label_w + "-+-" + "-" * (2 * pair.l_e - 1))
    for i, word in enumerate(pair.source, start=1):
        cells = [FILLED if (i, j) in links else EMPTY for j in range(1, pair.l_e + 1)]
        lines.append(f"{word:>{label_w}} | " + " ".join(cells))
    return "\n".join(lines)
