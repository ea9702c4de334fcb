"""Count-based n-gram language model over gloss sentences with stupid backoff."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import BOS, EOS, EmptySentence, padded

DEFAULT_ORDER = 3
DEFAULT_BACKOFF = 0.4
DEFAULT_UNK_LOGPROB = math.log(1e-7)


@dataclass
class NGramModel:
    order: int = DEFAULT_ORDER
    counts: Counter = field(default_factory=Counter)
    backoff_factor: float = DEFAULT_BACKOFF
    unk_logprob: float = DEFAULT_UNK_LOGPROB

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("order must be >= 1")
        self._refresh()

    def _refresh(self):
        # Unigram denominator: every predicted token, i.e. everything but <s>.
        self._predicted = sum(c for g, c in self.counts.items() if len(g) == 1 and g[0] != BOS)
        self._log_backoff = math.log(self.backoff_factor)

    def start(self) -> tuple[str, ...]:
        """History at the start of a sentence: ``order - 1`` start markers."""
        return (BOS,) * (self.order - 1)

    def advance(self, history: tuple[str, ...], word: str) -> tuple[str, ...]:
        if self.order == 1:
            return ()
        return (history + (word,))[-(self.order - 1) :]

    def logprob(self, word: str, history: Sequence[str] = ()) -> float:
        """Stupid-backoff score of ``word`` after ``history``.

        ``history`` may be shorter than ``order - 1`` (context-free estimates);
        only its last ``order - 1`` tokens are used.
        """
        hist = tuple(history)[-(self.order - 1) :] if self.order > 1 else ()
        penalty = 0.0
        while hist:
            num = self.counts.get(hist + (word,), 0)
            if num:
                return penalty + math.log(num / self.counts[hist])
            hist = hist[1:]
            penalty += self._log_backoff
        num = self.counts.get((word,), 0)
        if not num or word == BOS:
            return self.unk_logprob
        return penalty + math.log(num / self._predicted)

    def vocabulary(self) -> set[str]:
        return {g[0] for g in self.counts if len(g) == 1} - {BOS, EOS}

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"ngram {self.order} {self.backoff_factor!r}\n")
            for gram in sorted(self.counts):
                fh.write(f"{self.counts[gram]} {' '.join(gram)}\n")

    @classmethod
    def load(cls, path: str | Path) -> "NGramModel":
        with open(path, encoding="utf-8") as fh:
            head = fh.readline().split()
            if len(head) != 3 or head[0] != "ngram":
                raise ValueError(f"{path}: expected 'ngram <n> <backoff>' header")
            counts: Counter = Counter()
            for line in fh:
                parts = line.split()
                if parts:
                    counts[tuple(parts[1:])] = int(parts[0])
        return cls(int(head[1]), counts, float(head[2]))


def train_ngram(
    sentences: Iterable[Sequence[str]], order: int = DEFAULT_ORDER, backoff_factor: float = DEFAULT_BACKOFF
) -> NGramModel:
    """Count every k-gram, k <= order, over sentences padded with start/end markers."""
    counts: Counter = Counter()
    for sent in sentences:
        toks = padded(sent, order)
        for k in range(1, order + 1):
            for i in range(len(toks) - k + 1):
                counts[tuple(toks[i : i + k])] += 1
    return NGramModel(order, counts, backoff_factor)


def ngram_logprob(model: NGramModel, word: str, history: Sequence[str]) -> float:
    return model.logprob(word, history)


def sentence_logprob(model: NGramModel, sentence: Sequence[str]) -> tuple[float, float]:
    """Total log-probability (end marker included) and per-token perplexity."""
    if not sentence:
        raise EmptySentence(side="target")
    hist = model.start()
    total = 0.0
    for word in list(sentence) + [EOS]:
        total += model.logprob(word, hist)
        hist = model.advance(hist, word)
    return total, math.exp(-total / (len(sentence) + 1))
