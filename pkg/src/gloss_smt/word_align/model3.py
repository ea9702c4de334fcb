"""IBM Model 3: fertility, NULL insertion and reverse distortion.

Training is approximate EM. Each sentence pair is hill-climbed from its
Model 2 Viterbi alignment to a local optimum under single-link moves and
swaps, and fractional counts are collected over that optimum's move/swap
neighbourhood.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ..corpus import ParallelCorpus, SentencePair
from .em import AlignmentFunction, _viterbi_m2, encode_pair
from .tables import DegenerateRow, EmOptions, Model2Params, TranslationTable, normalize_rows

log = logging.getLogger(__name__)

PHI_MAX = 5
INITIAL_P0 = 0.9


@dataclass
class Model3Params:
    """Model 3 tables plus the Model 2 model that seeds hill-climbing.

    ``rdist[(l_e, l_f)]`` is an ``(l_f + 1) x l_e`` array holding d(j|i, l_e, l_f)
    at ``[i, j - 1]``; row 0 is unused.
    """

    ttable: TranslationTable
    fertility: np.ndarray
    p0: float
    rdist: dict[tuple[int, int], np.ndarray] = field(default_factory=dict)
    seed: Model2Params | None = None

    @property
    def p1(self) -> float:
        return 1.0 - self.p0

    @property
    def phi_max(self) -> int:
        return self.fertility.shape[1] - 1

    def rdist_block(self, l_e: int, l_f: int) -> np.ndarray:
        got = self.rdist.get((l_e, l_f))
        if got is None:
            got = np.zeros((l_f + 1, l_e))
            got[1:] = 1.0 / l_e
        return got

    def fertility_prob(self, phi: int, f: str) -> float:
        fi = self.ttable.source_vocab.get(f)
        if fi is None or phi > self.phi_max:
            return 0.0
        return float(self.fertility[fi, phi])

    @classmethod
    def from_model2(
        cls,
        m2: Model2Params,
        corpus: ParallelCorpus,
        phi_max: int = PHI_MAX,
        p0: float = INITIAL_P0,
    ) -> "Model3Params":
        """Initial Model 3 tables transferred from Model 2's posteriors.

        Under Model 2 each target word picks its source position
        independently, so a source word's fertility is a sum of independent
        Bernoulli link indicators. Its exact distribution seeds n(phi|f), and
        the link posteriors themselves seed the reverse distortion table.
        """
        tt = m2.ttable.copy(include_null=True)
        f_counts = np.zeros((len(tt.source_vocab), phi_max + 1))
        d_counts: dict[tuple[int, int], np.ndarray] = {}
        for src, tgt in corpus.encoded:
            l_e, l_f = len(tgt), len(src)
            joint = m2.ttable.probs[np.ix_(src, tgt)] * m2.dtable.block(l_e, l_f)[:, 1:].T
            total = joint.sum(axis=0)
            delta = np.divide(joint, total, out=np.full_like(joint, 1.0 / l_f), where=total > 0)
            for i in range(l_f):
                f_counts[src[i]] += fertility_distribution(delta[i], phi_max)
            dc = d_counts.setdefault((l_e, l_f), np.zeros((l_f + 1, l_e)))
            dc[1:] += delta
        uniform_n = np.full_like(f_counts, 1.0 / (phi_max + 1))
        params = cls(tt, normalize_rows(f_counts, uniform_n), p0, seed=m2)
        for key, dc in d_counts.items():
            block = params.rdist_block(*key)
            block[1:] = normalize_rows(dc[1:], block[1:])
            params.rdist[key] = block
        return params


def fertility_distribution(link_probs, phi_max: int = PHI_MAX) -> np.ndarray:
    """P(phi = k), k = 0..phi_max, for a sum of independent Bernoulli links.

    Mass above ``phi_max`` is dropped, so the result may sum to less than 1.
    """
    dist = np.zeros(phi_max + 1)
    dist[0] = 1.0
    for p in link_probs:
        dist[1:] = dist[1:] * (1.0 - p) + dist[:-1] * p
        dist[0] *= 1.0 - p
    return dist


def null_generation_prob(l_e: int, phi0: int, p1: float) -> float:
    """Probability of ``phi0`` NULL-generated words among ``l_e`` target words."""
    if phi0 < 0 or 2 * phi0 > l_e:
        return 0.0
    return math.comb(l_e - phi0, phi0) * p1**phi0 * (1.0 - p1) ** (l_e - 2 * phi0)


def _alignment_prob(src: np.ndarray, tgt: np.ndarray, a, params: Model3Params) -> float:
    l_f, l_e = len(src), len(tgt)
    phi = [0] * (l_f + 1)
    for i in a:
        phi[i] += 1
    prob = null_generation_prob(l_e, phi[0], params.p1)
    if prob == 0.0:
        return 0.0
    fert = params.fertility
    for i in range(1, l_f + 1):
        if phi[i] > params.phi_max:
            return 0.0
        prob *= fert[src[i - 1], phi[i]] * math.factorial(phi[i])
    t = params.ttable.probs
    d = params.rdist_block(l_e, l_f)
    for j, i in enumerate(a):
        f = 0 if i == 0 else src[i - 1]
        prob *= t[f, tgt[j]]
        if i:
            prob *= d[i, j]
    return float(prob)


def model3_alignment_prob(pair: SentencePair, a: AlignmentFunction, params: Model3Params) -> float:
    """p(e, a|f) under Model 3 (0 when NULL generates more than half the words)."""
    src, tgt = encode_pair(pair, params.ttable)
    if len(a) != len(tgt):
        raise ValueError("alignment length differs from target length")
    return _alignment_prob(src, tgt, tuple(a), params)


def neighbours(a: tuple[int, ...], l_f: int):
    """All alignments one move or one swap away from ``a``, in a fixed order."""
    for j, cur in enumerate(a):
        for i in range(l_f + 1):
            if i != cur:
                yield a[:j] + (i,) + a[j + 1 :]
    for j1 in range(len(a)):
        for j2 in range(j1 + 1, len(a)):
            if a[j1] != a[j2]:
                b = list(a)
                b[j1], b[j2] = b[j2], b[j1]
                yield tuple(b)


def hill_climb(src, tgt, start, params: Model3Params) -> tuple[tuple[int, ...], float]:
    """Greedy ascent; takes the first strictly best neighbour until none improves."""
    a = tuple(int(i) for i in start)
    best = _alignment_prob(src, tgt, a, params)
    while True:
        step, step_p = None, best
        for b in neighbours(a, len(src)):
            p = _alignment_prob(src, tgt, b, params)
            if p > step_p:
                step, step_p = b, p
        if step is None:
            return a, best
        a, best = step, step_p


def _repair(src, tgt, a, params: Model3Params) -> tuple[int, ...]:
    """Make a zero-probability start alignment feasible for hill-climbing.

    Model 2 knows nothing about fertility, so its Viterbi point can give a
    source word more than ``phi_max`` links, and then every single move or
    swap still scores zero. Overflowing links are moved, left to right, to
    the free source position with the highest t(e|f).
    """
    if _alignment_prob(src, tgt, a, params) > 0.0:
        return a
    t = params.ttable.probs
    phi = [0] * (len(src) + 1)
    out = []
    for j, i in enumerate(a):
        if i == 0 or phi[i] < params.phi_max:
            phi[i] += 1
            out.append(i)
            continue
        free = [k for k in range(1, len(src) + 1) if phi[k] < params.phi_max]
        if not free:
            out.append(i)
            continue
        k = max(free, key=lambda k: (t[src[k - 1], tgt[j]], -k))
        phi[k] += 1
        out.append(k)
    return tuple(out)


def _seed(src, tgt, params: Model3Params):
    if params.seed is None:
        a = tuple(range(1, len(tgt) + 1)) if len(tgt) <= len(src) else (1,) * len(tgt)
    else:
        a = _viterbi_m2(src, tgt, params.seed)[0].a
    return _repair(src, tgt, tuple(int(i) for i in a), params)


def viterbi_model3(pair: SentencePair, params: Model3Params) -> tuple[AlignmentFunction, float]:
    src, tgt = encode_pair(pair, params.ttable)
    a, p = hill_climb(src, tgt, _seed(src, tgt, params), params)
    return AlignmentFunction(a), p


def model3_em_iteration(
    corpus: ParallelCorpus, params: Model3Params, opts: EmOptions | None = None
) -> tuple[Model3Params, float]:
    """One approximate EM pass; returns new parameters and the summed log of
    the hill-climbed alignment probabilities before the update."""
    tt = params.ttable
    t_counts = np.zeros_like(tt.probs)
    f_counts = np.zeros_like(params.fertility)
    d_counts: dict[tuple[int, int], np.ndarray] = {}
    c0 = c1 = 0.0
    loglik = 0.0
    for pair, (src, tgt) in zip(corpus.pairs, corpus.encoded):
        l_e, l_f = len(tgt), len(src)
        best, best_p = hill_climb(src, tgt, _seed(src, tgt, params), params)
        loglik += math.log(best_p) if best_p > 0 else -math.inf
        hood = [best] + list(dict.fromkeys(neighbours(best, l_f)))
        probs = np.array([_alignment_prob(src, tgt, a, params) for a in hood])
        total = probs.sum()
        if total <= 0.0:
            raise DegenerateRow(" ".join(pair.target), pair.id)
        dc = d_counts.setdefault((l_e, l_f), np.zeros((l_f + 1, l_e)))
        ext = np.concatenate(([0], src))
        cols = np.arange(l_e)
        for a, p in zip(hood, probs / total):
            if p == 0.0:
                continue
            a_arr = np.asarray(a)
            np.add.at(t_counts, (ext[a_arr], tgt), p)
            linked = a_arr > 0
            np.add.at(dc, (a_arr[linked], cols[linked]), p)
            phi = np.bincount(a_arr, minlength=l_f + 1)
            np.add.at(f_counts, (src, phi[1:]), p)
            c1 += phi[0] * p
            c0 += (l_e - 2 * phi[0]) * p
    new_tt = TranslationTable(
        tt.source_vocab, tt.target_vocab, normalize_rows(t_counts, tt.probs), tt.epsilon, True
    )
    new = Model3Params(
        new_tt,
        normalize_rows(f_counts, params.fertility),
        c0 / (c0 + c1) if c0 + c1 > 0 else params.p0,
        {k: v.copy() for k, v in params.rdist.items()},
        params.seed,
    )
    for (l_e, l_f), dc in d_counts.items():
        old = params.rdist_block(l_e, l_f)
        block = old.copy()
        block[1:] = normalize_rows(dc[1:], old[1:])
        new.rdist[(l_e, l_f)] = block
    return new, loglik


def train_model3(
    corpus: ParallelCorpus,
    m2: Model2Params,
    iterations: int,
    phi_max: int = PHI_MAX,
    on_iteration=None,
) -> tuple[Model3Params, list[float]]:
    params = Model3Params.from_model2(m2, corpus, phi_max)
    history = []
    if on_iteration:
        on_iteration(0, params.ttable, math.nan)
    for k in range(1, iterations + 1):
        params, ll = model3_em_iteration(corpus, params)
        history.append(ll)
        log.debug("model 3 iteration %d log proxy %.6f", k, ll)
        if on_iteration:
            on_iteration(k, params.ttable, ll)
    return params, history
