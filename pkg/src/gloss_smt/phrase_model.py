"""Alignment-consistent phrase extraction and relative-frequency phrase tables."""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import ParallelCorpus, SentencePair

DEFAULT_MAX_PHRASE = 4


@dataclass(frozen=True, order=True)
class PhrasePair:
    """Source and target spans (1-based, inclusive) with their tokens."""

    src_span: tuple[int, int]
    tgt_span: tuple[int, int]
    src_tokens: tuple[str, ...]
    tgt_tokens: tuple[str, ...]


def _span_tokens(tokens: Sequence[str], span: tuple[int, int]) -> tuple[str, ...]:
    return tuple(tokens[span[0] - 1 : span[1]])


def extract_phrases(
    pair: SentencePair, links: Iterable[tuple[int, int]], max_len: int = DEFAULT_MAX_PHRASE
) -> set[PhrasePair]:
    """All phrase pairs consistent with ``links`` whose sides are at most ``max_len`` long.

    For each source span the linked target positions fix a minimal target
    span; it is kept if no link leaves the rectangle, then widened over
    unaligned target words on either edge.
    """
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    links = set(links)
    tgt_aligned = {j for _, j in links}
    out: set[PhrasePair] = set()
    for s1 in range(1, pair.l_f + 1):
        for s2 in range(s1, min(pair.l_f, s1 + max_len - 1) + 1):
            tgts = [j for i, j in links if s1 <= i <= s2]
            if not tgts:
                continue
            t1, t2 = min(tgts), max(tgts)
            if t2 - t1 + 1 > max_len:
                continue
            if any(t1 <= j <= t2 and not s1 <= i <= s2 for i, j in links):
                continue
            lo = t1
            while True:
                hi = t2
                while hi <= pair.l_e and hi - lo + 1 <= max_len:
                    out.add(
                        PhrasePair(
                            (s1, s2),
                            (lo, hi),
                            _span_tokens(pair.source, (s1, s2)),
                            _span_tokens(pair.target, (lo, hi)),
                        )
                    )
                    hi += 1
                    if hi in tgt_aligned:
                        break
                lo -= 1
                if lo < 1 or lo in tgt_aligned or t2 - lo + 1 > max_len:
                    break
    return out


@dataclass(frozen=True)
class PhraseOption:
    target: tuple[str, ...]
    p_src_given_tgt: float
    p_tgt_given_src: float
    count: int


class PhraseTable:
    """Phrase pairs keyed by source phrase.

    Each option carries phi(f|e) = c(f,e)/c(e), phi(e|f) = c(f,e)/c(f) and the
    joint count.
    """

    def __init__(self, entries: dict[tuple[str, ...], list[PhraseOption]] | None = None):
        self.entries = entries or {}

    @classmethod
    def from_counts(cls, joint: Counter) -> "PhraseTable":
        src_tot: Counter = Counter()
        tgt_tot: Counter = Counter()
        for (f, e), c in joint.items():
            src_tot[f] += c
            tgt_tot[e] += c
        entries: dict[tuple[str, ...], list[PhraseOption]] = defaultdict(list)
        for (f, e), c in sorted(joint.items()):
            entries[f].append(PhraseOption(e, c / tgt_tot[e], c / src_tot[f], c))
        for f in entries:
            entries[f].sort(key=lambda o: (-o.p_tgt_given_src, o.target))
        return cls(dict(entries))

    def lookup(self, phrase: Sequence[str]) -> list[PhraseOption]:
        return list(self.entries.get(tuple(phrase), ()))

    def __contains__(self, phrase) -> bool:
        return tuple(phrase) in self.entries

    def __len__(self) -> int:
        return sum(len(v) for v in self.entries.values())

    def __iter__(self):
        for f in sorted(self.entries):
            for opt in self.entries[f]:
                yield f, opt

    @property
    def max_source_len(self) -> int:
        return max((len(f) for f in self.entries), default=0)

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for f, opt in self:
                fh.write(
                    f"{' '.join(f)} ||| {' '.join(opt.target)} ||| "
                    f"{opt.p_src_given_tgt!r} {opt.p_tgt_given_src!r} {opt.count}\n"
                )

    @classmethod
    def load(cls, path: str | Path) -> "PhraseTable":
        entries: dict[tuple[str, ...], list[PhraseOption]] = defaultdict(list)
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                parts = [p.strip() for p in line.split("|||")]
                if len(parts) != 3:
                    raise ValueError(f"{path}:{line_no}: expected 'f ||| e ||| scores'")
                scores = parts[2].split()
                entries[tuple(parts[0].split())].append(
                    PhraseOption(tuple(parts[1].split()), float(scores[0]), float(scores[1]), int(scores[2]))
                )
        for f in entries:
            entries[f].sort(key=lambda o: (-o.p_tgt_given_src, o.target))
        return cls(dict(entries))


def build_phrase_table(
    corpus: ParallelCorpus | Sequence[SentencePair],
    alignments: Sequence[Iterable[tuple[int, int]]],
    max_len: int = DEFAULT_MAX_PHRASE,
) -> PhraseTable:
    joint: Counter = Counter()
    for pair, links in zip(corpus, alignments, strict=True):
        for pp in extract_phrases(pair, links, max_len):
            joint[(pp.src_tokens, pp.tgt_tokens)] += 1
    return PhraseTable.from_counts(joint)


def lookup(phrase: Sequence[str], table: PhraseTable) -> list[PhraseOption]:
    """Options for ``phrase``, best phi(e|f) first; empty when unseen."""
    return table.lookup(phrase)
