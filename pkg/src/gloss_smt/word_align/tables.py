"""Parameter tables shared by the IBM alignment models."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ..corpus import NULL, ParallelCorpus, Vocabulary
from ..string_metrics import DEFAULT_JW, JaroWinklerConfig, jaro_winkler

PROB_FLOOR = 1e-12


class AlignmentError(Exception):
    pass


class DegenerateRow(AlignmentError):
    """A target word received zero weight from every candidate source word."""

    def __init__(self, word: str, pair_id: int | None = None):
        self.word = word
        self.pair_id = pair_id
        super().__init__(f"all link weights are zero for target word {word!r} (pair {pair_id})")


@dataclass(frozen=True)
class EmOptions:
    iterations: int = 5
    blend_alpha: float | None = None
    jw_config: JaroWinklerConfig = DEFAULT_JW
    include_null: bool = False

    def __post_init__(self):
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if self.blend_alpha is not None and not 0.0 <= self.blend_alpha <= 1.0:
            raise ValueError(f"blend_alpha must lie in [0, 1], got {self.blend_alpha}")

    @property
    def blending(self) -> bool:
        return self.blend_alpha is not None


class TranslationTable:
    """Lexical probabilities t(e|f) as a dense ``|F| x |E|`` matrix.

    Row 0 belongs to the NULL source token. ``include_null`` records whether
    NULL takes part in alignment for the model that owns this table.
    """

    def __init__(
        self,
        source_vocab: Vocabulary,
        target_vocab: Vocabulary,
        probs: np.ndarray,
        epsilon: float = 1.0,
        include_null: bool = False,
    ):
        probs = np.asarray(probs, dtype=float)
        if probs.shape != (len(source_vocab), len(target_vocab)):
            raise ValueError(f"table shape {probs.shape} does not match vocabularies")
        self.source_vocab = source_vocab
        self.target_vocab = target_vocab
        self.probs = probs
        self.epsilon = epsilon
        self.include_null = include_null

    @classmethod
    def uniform(cls, corpus: ParallelCorpus, include_null: bool = False) -> "TranslationTable":
        nf, ne = len(corpus.source_vocab), len(corpus.target_vocab)
        return cls(
            corpus.source_vocab,
            corpus.target_vocab,
            np.full((nf, ne), 1.0 / ne),
            include_null=include_null,
        )

    def prob(self, e: str, f: str) -> float:
        fi = self.source_vocab.get(f)
        ei = self.target_vocab.get(e)
        if fi is None or ei is None:
            return 0.0
        return float(self.probs[fi, ei])

    def __getitem__(self, key: tuple[str, str]) -> float:
        e, f = key
        return self.prob(e, f)

    def copy(self, include_null: bool | None = None) -> "TranslationTable":
        return TranslationTable(
            self.source_vocab,
            self.target_vocab,
            self.probs.copy(),
            self.epsilon,
            self.include_null if include_null is None else include_null,
        )

    def row_sums(self) -> np.ndarray:
        return self.probs.sum(axis=1)


def source_positions(src_ids: np.ndarray, include_null: bool) -> tuple[np.ndarray, np.ndarray]:
    """Candidate source vocabulary ids and their 0..l_f positions."""
    if include_null:
        ids = np.concatenate(([0], src_ids))
        pos = np.arange(len(src_ids) + 1)
    else:
        ids = src_ids
        pos = np.arange(1, len(src_ids) + 1)
    return ids, pos


@dataclass
class DistortionTable:
    """Alignment probabilities a(i|j, l_e, l_f).

    ``probs[(l_e, l_f)]`` is an ``l_e x (l_f + 1)`` array indexed ``[j - 1, i]``;
    column 0 is the NULL position and stays zero when NULL is excluded.
    """

    probs: dict[tuple[int, int], np.ndarray] = field(default_factory=dict)
    include_null: bool = False

    def uniform_block(self, l_e: int, l_f: int) -> np.ndarray:
        block = np.zeros((l_e, l_f + 1))
        if self.include_null:
            block[:] = 1.0 / (l_f + 1)
        else:
            block[:, 1:] = 1.0 / l_f
        return block

    def block(self, l_e: int, l_f: int) -> np.ndarray:
        got = self.probs.get((l_e, l_f))
        return got if got is not None else self.uniform_block(l_e, l_f)

    def prob(self, i: int, j: int, l_e: int, l_f: int) -> float:
        return float(self.block(l_e, l_f)[j - 1, i])

    @classmethod
    def uniform(cls, corpus: ParallelCorpus, include_null: bool = False) -> "DistortionTable":
        dt = cls(include_null=include_null)
        for pair in corpus:
            key = (pair.l_e, pair.l_f)
            if key not in dt.probs:
                dt.probs[key] = dt.uniform_block(*key)
        return dt

    def copy(self) -> "DistortionTable":
        return DistortionTable({k: v.copy() for k, v in self.probs.items()}, self.include_null)


@dataclass
class Model2Params:
    ttable: TranslationTable
    dtable: DistortionTable


@lru_cache(maxsize=32)
def _similarity(src_tokens: tuple[str, ...], tgt_tokens: tuple[str, ...], cfg: JaroWinklerConfig):
    sim = np.zeros((len(src_tokens), len(tgt_tokens)))
    for fi, f in enumerate(src_tokens):
        if f == NULL:
            continue
        for ei, e in enumerate(tgt_tokens):
            sim[fi, ei] = jaro_winkler(e, f, cfg)
    sim.setflags(write=False)
    return sim


def similarity_matrix(
    source_vocab: Vocabulary, target_vocab: Vocabulary, cfg: JaroWinklerConfig = DEFAULT_JW
) -> np.ndarray:
    """Jaro-Winkler similarity for every (source, target) vocabulary pair; NULL row is 0."""
    return _similarity(tuple(source_vocab), tuple(target_vocab), cfg)


def link_weights(tt: TranslationTable, opts: EmOptions) -> np.ndarray:
    """Per-link E-step weights: t(e|f), or alpha*t + (1-alpha)*d_w when blending."""
    if not opts.blending:
        return tt.probs
    sim = similarity_matrix(tt.source_vocab, tt.target_vocab, opts.jw_config)
    return opts.blend_alpha * tt.probs + (1.0 - opts.blend_alpha) * sim


def blended_link_weight(e: str, f: str, tt: TranslationTable, opts: EmOptions) -> float:
    t = tt.prob(e, f)
    if not opts.blending:
        return t
    dw = 0.0 if f == NULL else jaro_winkler(e, f, opts.jw_config)
    return opts.blend_alpha * t + (1.0 - opts.blend_alpha) * dw


def normalize_rows(counts: np.ndarray, previous: np.ndarray, active: np.ndarray | None = None) -> np.ndarray:
    """Row-normalize ``counts`` with a probability floor.

    Rows without any count keep their ``previous`` values. ``active`` masks the
    columns that may carry mass; inactive columns stay zero.
    """
    totals = counts.sum(axis=1, keepdims=True)
    out = previous.copy()
    live = totals[:, 0] > 0
    if not live.any():
        return out
    rows = counts[live] / totals[live]
    rows = np.maximum(rows, PROB_FLOOR)
    if active is not None:
        rows = np.where(active, rows, 0.0)
    rows /= rows.sum(axis=1, keepdims=True)
    out[live] = rows
    return out
