"""Parallel English / ASL-gloss corpus: tokenization, loading and statistics.

Corpus files are UTF-8 text with one ``english<TAB>gloss`` pair per line.
Lines starting with ``#`` and blank lines are skipped.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

NULL = "<NULL>"
BOS = "<s>"
EOS = "</s>"
RESERVED = frozenset({NULL, BOS, EOS})

SOURCE = "source"
TARGET = "target"

_PUNCT = "?!.,"
_EDGE_PUNCT = re.compile(r"^([?!.,]*)(.*?)([?!.,]*)$", re.S)


class CorpusError(Exception):
    """Base class for corpus problems."""


class EmptySentence(CorpusError):
    def __init__(self, line_no: int | None = None, side: str | None = None):
        self.line_no = line_no
        self.side = side
        where = f"line {line_no}" if line_no is not None else "input"
        msg = f"{where}: empty {side or ''} sentence".replace("  ", " ")
        super().__init__(msg)


class FormatError(CorpusError):
    def __init__(self, line_no: int, message: str = "expected english<TAB>gloss"):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


def tokenize(line: str, side: str = SOURCE) -> list[str]:
    """Split ``line`` into tokens.

    Whitespace separates tokens; ``? ! . ,`` stuck to the start or end of a
    word become tokens of their own, punctuation inside a word (``U.S``,
    ``WHAT?-IS``) is left alone. English is lowercased, glosses are kept as
    written.
    """
    if side not in (SOURCE, TARGET):
        raise ValueError(f"side must be {SOURCE!r} or {TARGET!r}, got {side!r}")
    tokens: list[str] = []
    for chunk in line.split():
        lead, core, trail = _EDGE_PUNCT.match(chunk).groups()
        tokens.extend(lead)
        if core:
            tokens.append(core)
        tokens.extend(trail)
    if side == SOURCE:
        tokens = [t.lower() for t in tokens]
    if not tokens:
        raise EmptySentence(side=side)
    return tokens


class Vocabulary:
    """Bijective token <-> id map with ids assigned in first-occurrence order."""

    def __init__(self, tokens: Iterable[str] = (), with_null: bool = False):
        self._ids: dict[str, int] = {}
        self._tokens: list[str] = []
        self.with_null = with_null
        if with_null:
            self.add(NULL)
        for tok in tokens:
            self.add(tok)

    def add(self, token: str) -> int:
        idx = self._ids.get(token)
        if idx is None:
            idx = len(self._tokens)
            self._ids[token] = idx
            self._tokens.append(token)
        return idx

    def id(self, token: str) -> int:
        return self._ids[token]

    def get(self, token: str, default: int | None = None) -> int | None:
        return self._ids.get(token, default)

    def token(self, idx: int) -> str:
        return self._tokens[idx]

    def encode(self, tokens: Sequence[str]) -> np.ndarray:
        return np.array([self._ids[t] for t in tokens], dtype=np.intp)

    @property
    def tokens(self) -> list[str]:
        return list(self._tokens)

    def __contains__(self, token: object) -> bool:
        return token in self._ids

    def __len__(self) -> int:
        return len(self._tokens)

    def __iter__(self):
        return iter(self._tokens)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Vocabulary) and self._tokens == other._tokens

    def __repr__(self) -> str:
        return f"Vocabulary({len(self)} tokens)"


@dataclass(frozen=True)
class SentencePair:
    source: tuple[str, ...]
    target: tuple[str, ...]
    id: int = 0

    def __post_init__(self):
        object.__setattr__(self, "source", tuple(self.source))
        object.__setattr__(self, "target", tuple(self.target))
        if not self.source:
            raise EmptySentence(side=SOURCE)
        if not self.target:
            raise EmptySentence(side=TARGET)

    @property
    def l_f(self) -> int:
        return len(self.source)

    @property
    def l_e(self) -> int:
        return len(self.target)

    @classmethod
    def from_text(cls, english: str, gloss: str, id: int = 0) -> "SentencePair":
        return cls(tokenize(english, SOURCE), tokenize(gloss, TARGET), id)

    def to_line(self) -> str:
        return " ".join(self.source) + "\t" + " ".join(self.target)

    def reversed(self) -> "SentencePair":
        return SentencePair(self.target, self.source, self.id)


@dataclass
class ParallelCorpus:
    """Immutable-by-convention collection of sentence pairs plus vocabularies.

    ``source_vocab`` reserves id 0 for the NULL token. ``encoded`` holds the
    integer id arrays for each pair, in pair order.
    """

    pairs: list[SentencePair]
    source_vocab: Vocabulary = field(default=None)
    target_vocab: Vocabulary = field(default=None)

    def __post_init__(self):
        if self.source_vocab is None:
            self.source_vocab = Vocabulary(
                (t for p in self.pairs for t in p.source), with_null=True
            )
        if self.target_vocab is None:
            self.target_vocab = Vocabulary(t for p in self.pairs for t in p.target)
        self.encoded = [
            (self.source_vocab.encode(p.source), self.target_vocab.encode(p.target))
            for p in self.pairs
        ]

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, str]]) -> "ParallelCorpus":
        return cls([SentencePair.from_text(f, e, i) for i, (f, e) in enumerate(pairs)])

    def reversed(self) -> "ParallelCorpus":
        """Same corpus with gloss as the source side (for reverse alignment)."""
        return ParallelCorpus([p.reversed() for p in self.pairs])

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def __getitem__(self, idx: int) -> SentencePair:
        return self.pairs[idx]


def parse_corpus(lines: Iterable[str]) -> ParallelCorpus:
    pairs = []
    for line_no, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        if "\t" not in line:
            raise FormatError(line_no)
        english, _, gloss = line.partition("\t")
        if "\t" in gloss:
            raise FormatError(line_no, "more than one TAB separator")
        try:
            src = tokenize(english, SOURCE)
            tgt = tokenize(gloss, TARGET)
        except EmptySentence as exc:
            raise EmptySentence(line_no, exc.side) from None
        pairs.append(SentencePair(src, tgt, len(pairs)))
    return ParallelCorpus(pairs)


def load_parallel_corpus(path: str | Path) -> ParallelCorpus:
    with open(path, encoding="utf-8") as fh:
        return parse_corpus(fh)


def write_parallel_corpus(corpus: ParallelCorpus, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for pair in corpus:
            fh.write(pair.to_line() + "\n")


def bundled_corpus_path(name: str = "mini.tsv") -> Path:
    return Path(resources.files("gloss_smt") / "data" / name)


def load_bundled(name: str = "mini.tsv") -> ParallelCorpus:
    """Load one of the corpora shipped in ``gloss_smt/data``."""
    return load_parallel_corpus(bundled_corpus_path(name))


@dataclass(frozen=True)
class CorpusStats:
    sentence_count: int
    source_token_count: int
    target_token_count: int
    ngram_type_counts: dict[int, int]

    def format(self) -> str:
        grams = " - ".join(f"n-gram {n} = {c}" for n, c in sorted(self.ngram_type_counts.items()))
        return (
            "Language\tSentences\tTokens\n"
            f"English\t{self.sentence_count}\t{self.source_token_count}\n"
            f"ASL\t{self.sentence_count}\t{self.target_token_count}\n"
            f"{grams}\n"
        )


def padded(tokens: Sequence[str], order: int) -> list[str]:
    """Sentence padded with ``order - 1`` start markers and one end marker."""
    return [BOS] * (order - 1) + list(tokens) + [EOS]


def corpus_stats(corpus: ParallelCorpus, max_order: int = 3) -> CorpusStats:
    """Token totals plus distinct gloss n-gram counts for n = 1..max_order.

    N-grams are taken over gloss sentences padded the way the language model
    pads them for ``max_order``, so the counts equal the number of distinct
    k-grams stored in a trigram model of the same data.
    """
    types: dict[int, set] = {n: set() for n in range(1, max_order + 1)}
    for pair in corpus:
        toks = padded(pair.target, max_order)
        for n in types:
            for i in range(len(toks) - n + 1):
                types[n].add(tuple(toks[i : i + n]))
    return CorpusStats(
        sentence_count=len(corpus),
        source_token_count=sum(p.l_f for p in corpus),
        target_token_count=sum(p.l_e for p in corpus),
        ngram_type_counts={n: len(s) for n, s in types.items()},
    )
