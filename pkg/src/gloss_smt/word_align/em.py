"""EM training for IBM Models 1 and 2, sentence probabilities and Viterbi links."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ..corpus import ParallelCorpus, SentencePair
from .tables import (
    DegenerateRow,
    DistortionTable,
    EmOptions,
    Model2Params,
    TranslationTable,
    link_weights,
    normalize_rows,
    source_positions,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class AlignmentFunction:
    """Source position (1-based, 0 = NULL) for every target position."""

    a: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(int(i) for i in self.a))

    def links(self, reverse: bool = False) -> set[tuple[int, int]]:
        """Non-NULL links as (source, target) positions.

        With ``reverse=True`` the function is read as coming from a model
        trained in the opposite direction, so its pairs are flipped.
        """
        if reverse:
            return {(j, i) for j, i in enumerate(self.a, start=1) if i}
        return {(i, j) for j, i in enumerate(self.a, start=1) if i}

    def __len__(self):
        return len(self.a)

    def __iter__(self):
        return iter(self.a)


def encode_pair(pair: SentencePair, tt: TranslationTable) -> tuple[np.ndarray, np.ndarray]:
    return tt.source_vocab.encode(pair.source), tt.target_vocab.encode(pair.target)


def _sentence_prob_m1(src, tgt, probs, epsilon, include_null) -> float:
    ids, _ = source_positions(src, include_null)
    per_word = probs[np.ix_(ids, tgt)].sum(axis=0)
    return float(epsilon / len(ids) ** len(tgt) * np.prod(per_word))


def model1_sentence_prob(pair: SentencePair, tt: TranslationTable, opts: EmOptions | None = None) -> float:
    """p(e|f) under Model 1, summing the joint over all alignments."""
    include_null = tt.include_null if opts is None else opts.include_null
    src, tgt = encode_pair(pair, tt)
    return _sentence_prob_m1(src, tgt, tt.probs, tt.epsilon, include_null)


def _sentence_prob_m2(src, tgt, tt: TranslationTable, dt: DistortionTable) -> float:
    ids, pos = source_positions(src, dt.include_null)
    block = dt.block(len(tgt), len(src))
    joint = tt.probs[np.ix_(ids, tgt)] * block[:, pos].T
    return float(tt.epsilon * np.prod(joint.sum(axis=0)))


def model2_sentence_prob(pair: SentencePair, model: Model2Params) -> float:
    src, tgt = encode_pair(pair, model.ttable)
    return _sentence_prob_m2(src, tgt, model.ttable, model.dtable)


def _posterior(weights: np.ndarray, pair: SentencePair, tgt, tt) -> np.ndarray:
    norm = weights.sum(axis=0)
    if np.any(norm <= 0.0):
        j = int(np.flatnonzero(norm <= 0.0)[0])
        raise DegenerateRow(tt.target_vocab.token(tgt[j]), pair.id)
    return weights / norm


def _safe_log(p: float) -> float:
    return math.log(p) if p > 0.0 else -math.inf


def model1_em_iteration(
    corpus: ParallelCorpus, tt: TranslationTable, opts: EmOptions
) -> tuple[TranslationTable, float]:
    """One EM pass for Model 1; returns the new table and the pre-update log-likelihood."""
    weights = link_weights(tt, opts)
    counts = np.zeros_like(tt.probs)
    loglik = 0.0
    for pair, (src, tgt) in zip(corpus.pairs, corpus.encoded):
        ids, _ = source_positions(src, opts.include_null)
        loglik += _safe_log(_sentence_prob_m1(src, tgt, tt.probs, tt.epsilon, opts.include_null))
        delta = _posterior(weights[np.ix_(ids, tgt)], pair, tgt, tt)
        np.add.at(counts, (ids[:, None], tgt[None, :]), delta)
    new = TranslationTable(
        tt.source_vocab,
        tt.target_vocab,
        normalize_rows(counts, tt.probs),
        tt.epsilon,
        opts.include_null,
    )
    return new, loglik


def model2_em_iteration(
    corpus: ParallelCorpus, tt: TranslationTable, dt: DistortionTable, opts: EmOptions
) -> tuple[TranslationTable, DistortionTable, float]:
    weights = link_weights(tt, opts)
    counts = np.zeros_like(tt.probs)
    dcounts: dict[tuple[int, int], np.ndarray] = {}
    loglik = 0.0
    for pair, (src, tgt) in zip(corpus.pairs, corpus.encoded):
        l_e, l_f = len(tgt), len(src)
        ids, pos = source_positions(src, opts.include_null)
        block = dt.block(l_e, l_f)
        align = block[:, pos].T
        loglik += _safe_log(tt.epsilon * np.prod((tt.probs[np.ix_(ids, tgt)] * align).sum(axis=0)))
        delta = _posterior(weights[np.ix_(ids, tgt)] * align, pair, tgt, tt)
        np.add.at(counts, (ids[:, None], tgt[None, :]), delta)
        dc = dcounts.setdefault((l_e, l_f), np.zeros((l_e, l_f + 1)))
        dc[:, pos] += delta.T
    new_tt = TranslationTable(
        tt.source_vocab, tt.target_vocab, normalize_rows(counts, tt.probs), tt.epsilon, opts.include_null
    )
    new_dt = DistortionTable(include_null=opts.include_null)
    for key, old in dt.probs.items():
        new_dt.probs[key] = old.copy()
    for (l_e, l_f), dc in dcounts.items():
        active = np.ones(l_f + 1, dtype=bool)
        active[0] = opts.include_null
        new_dt.probs[(l_e, l_f)] = normalize_rows(dc, dt.block(l_e, l_f), active)
    return new_tt, new_dt, loglik


IterationHook = Callable[[int, object, float], None]


def train_model1(
    corpus: ParallelCorpus,
    opts: EmOptions,
    tt: TranslationTable | None = None,
    on_iteration: IterationHook | None = None,
) -> tuple[TranslationTable, list[float]]:
    """Run ``opts.iterations`` Model 1 EM passes from ``tt`` (uniform if omitted).

    ``on_iteration(k, table, loglik)`` is called with the table after pass
    ``k`` (``k = 0`` is the initial table, with ``nan`` likelihood).
    """
    tt = tt if tt is not None else TranslationTable.uniform(corpus, opts.include_null)
    history = []
    if on_iteration:
        on_iteration(0, tt, math.nan)
    for k in range(1, opts.iterations + 1):
        tt, ll = model1_em_iteration(corpus, tt, opts)
        history.append(ll)
        log.debug("model 1 iteration %d log-likelihood %.6f", k, ll)
        if on_iteration:
            on_iteration(k, tt, ll)
    return tt, history


def train_model2(
    corpus: ParallelCorpus,
    opts: EmOptions,
    tt: TranslationTable,
    dt: DistortionTable | None = None,
    on_iteration: IterationHook | None = None,
) -> tuple[Model2Params, list[float]]:
    """Model 2 EM starting from a (usually Model 1 trained) lexical table."""
    tt = tt.copy(include_null=opts.include_null)
    dt = dt if dt is not None else DistortionTable.uniform(corpus, opts.include_null)
    history = []
    if on_iteration:
        on_iteration(0, tt, math.nan)
    for k in range(1, opts.iterations + 1):
        tt, dt, ll = model2_em_iteration(corpus, tt, dt, opts)
        history.append(ll)
        log.debug("model 2 iteration %d log-likelihood %.6f", k, ll)
        if on_iteration:
            on_iteration(k, tt, ll)
    return Model2Params(tt, dt), history


def _viterbi_m1(src, tgt, tt: TranslationTable) -> tuple[AlignmentFunction, float]:
    ids, pos = source_positions(src, tt.include_null)
    scores = tt.probs[np.ix_(ids, tgt)]
    best = scores.argmax(axis=0)
    score = tt.epsilon / len(ids) ** len(tgt) * float(np.prod(scores[best, np.arange(len(tgt))]))
    return AlignmentFunction(pos[best]), score


def _viterbi_m2(src, tgt, m2: Model2Params) -> tuple[AlignmentFunction, float]:
    tt, dt = m2.ttable, m2.dtable
    ids, pos = source_positions(src, dt.include_null)
    block = dt.block(len(tgt), len(src))
    scores = tt.probs[np.ix_(ids, tgt)] * block[:, pos].T
    best = scores.argmax(axis=0)
    score = tt.epsilon * float(np.prod(scores[best, np.arange(len(tgt))]))
    return AlignmentFunction(pos[best]), score


def viterbi_alignment(pair: SentencePair, model) -> tuple[AlignmentFunction, float]:
    """Most probable alignment and its joint probability p(e, a|f).

    Models 1 and 2 decide each target position independently, taking the
    smallest source position on ties. Model 3 hill-climbs from the Model 2
    Viterbi alignment of its seed model.
    """
    from .model3 import Model3Params, viterbi_model3

    if isinstance(model, Model3Params):
        return viterbi_model3(pair, model)
    tt = model.ttable if isinstance(model, Model2Params) else model
    src, tgt = encode_pair(pair, tt)
    if isinstance(model, Model2Params):
        return _viterbi_m2(src, tgt, model)
    return _viterbi_m1(src, tgt, model)


def corpus_log_likelihood(corpus: ParallelCorpus | Sequence[SentencePair], model) -> float:
    """Sum of log p(e|f) over the corpus.

    For Model 3 the hill-climbed alignment probability stands in for p(e|f).
    Pairs with zero probability make the result ``-inf``; their ids are logged.
    """
    from .model3 import Model3Params

    total = 0.0
    bad = []
    for pair in corpus:
        if isinstance(model, Model3Params):
            p = viterbi_alignment(pair, model)[1]
        elif isinstance(model, Model2Params):
            p = model2_sentence_prob(pair, model)
        else:
            p = model1_sentence_prob(pair, model)
        if p <= 0.0:
            bad.append(pair.id)
        else:
            total += math.log(p)
    if bad:
        log.warning("zero probability for sentence pair(s) %s", bad)
        return -math.inf
    return total
