"""Phrase-based stack decoding and an exhaustive reference search.

A translation is scored as the sum, over the phrases used, of
``w_phi * log phi(f|e) + w_d * log d(start - end_prev - 1) + w_lm * log P_LM``
with ``d(x) = eta ** |x|``. The LM is applied word by word as phrases are
appended, and the end-of-sentence transition closes a complete hypothesis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .corpus import EOS
from .ngram_lm import NGramModel
from .phrase_model import PhraseTable

OOV_LOGPROB = math.log(1e-4)
ORACLE_MAX_LEN = 7


class DecodeFailure(Exception):
    def __init__(self, message: str, partial: "Hypothesis | None" = None):
        super().__init__(message)
        self.partial = partial

    @property
    def partial_output(self) -> list[str]:
        return self.partial.output() if self.partial is not None else []


class RefuseOracle(Exception):
    pass


@dataclass(frozen=True)
class DecoderConfig:
    beam_size: int = 100
    distortion_limit: int | None = 6
    distortion_base: float = 0.6
    weight_phi: float = 1.0
    weight_d: float = 1.0
    weight_lm: float = 1.0
    oov_passthrough: bool = True

    def __post_init__(self):
        if self.beam_size < 1:
            raise ValueError("beam_size must be >= 1")
        if not 0.0 < self.distortion_base < 1.0:
            raise ValueError("distortion_base must lie in (0, 1)")
        if self.distortion_limit is not None and self.distortion_limit < 0:
            raise ValueError("distortion_limit must be >= 0 or None")


def distortion_cost(start: int, end_prev: int, eta: float = 0.6) -> float:
    """log d(start - end_prev - 1) with d(x) = eta ** |x|."""
    jump = abs(start - end_prev - 1)
    return jump * math.log(eta) if jump else 0.0


@dataclass(frozen=True)
class Step:
    """One applied phrase: 0-based half-open source span and its score parts."""

    src_span: tuple[int, int]
    source: tuple[str, ...]
    target: tuple[str, ...]
    log_phi: float
    log_d: float
    log_lm: float

    def dump(self) -> str:
        s, e = self.src_span
        return (
            f"[{s + 1},{e}] {' '.join(self.source)} ||| {' '.join(self.target)} ||| "
            f"{self.log_phi:.6f} {self.log_d:.6f} {self.log_lm:.6f}"
        )


@dataclass(frozen=True)
class Hypothesis:
    coverage: int
    last_end: int
    lm_history: tuple[str, ...]
    score: float
    future_cost: float = 0.0
    parent: "Hypothesis | None" = field(default=None, compare=False, repr=False)
    step: Step | None = field(default=None, compare=False)
    text: tuple[str, ...] = ()

    @property
    def state(self):
        return self.coverage, self.lm_history, self.last_end

    def steps(self) -> list[Step]:
        out = []
        h = self
        while h is not None and h.step is not None:
            out.append(h.step)
            h = h.parent
        return out[::-1]

    def output(self) -> list[str]:
        return list(self.text)


@dataclass
class _Option:
    target: tuple[str, ...]
    log_phi: float


def collect_options(
    source: Sequence[str], table: PhraseTable, cfg: DecoderConfig
) -> dict[tuple[int, int], list[_Option]]:
    """Translation options per 0-based half-open source span."""
    n = len(source)
    max_len = max(table.max_source_len, 1)
    opts: dict[tuple[int, int], list[_Option]] = {}
    for s in range(n):
        for e in range(s + 1, min(n, s + max_len) + 1):
            found = table.lookup(source[s:e])
            if found:
                opts[(s, e)] = [_Option(o.target, math.log(o.p_src_given_tgt)) for o in found]
        if (s, s + 1) not in opts and cfg.oov_passthrough:
            opts[(s, s + 1)] = [_Option((source[s],), OOV_LOGPROB)]
    return opts


def _lm_score(lm: NGramModel, history, words) -> tuple[float, tuple[str, ...]]:
    total = 0.0
    for w in words:
        total += lm.logprob(w, history)
        history = lm.advance(history, w)
    return total, history


def future_cost_table(
    source: Sequence[str],
    table: PhraseTable,
    lm: NGramModel | None,
    cfg: DecoderConfig = DecoderConfig(),
    options: dict | None = None,
) -> dict[tuple[int, int], float]:
    """Best log-score estimate for translating each source span in isolation.

    Direct options are scored with their phi plus a context-free LM estimate
    (``lm=None`` leaves the LM out); longer spans also consider every split
    point. Spans with no way to be covered get ``-inf``.
    """
    n = len(source)
    options = options if options is not None else collect_options(source, table, cfg)
    cost: dict[tuple[int, int], float] = {}
    for length in range(1, n + 1):
        for s in range(n - length + 1):
            e = s + length
            best = -math.inf
            for opt in options.get((s, e), ()):
                est = cfg.weight_phi * opt.log_phi
                if lm is not None:
                    est += cfg.weight_lm * _lm_score(lm, (), opt.target)[0]
                best = max(best, est)
            for k in range(s + 1, e):
                best = max(best, cost[(s, k)] + cost[(k, e)])
            cost[(s, e)] = best
    return cost


def _uncovered_spans(coverage: int, n: int):
    s = None
    for i in range(n + 1):
        free = i < n and not coverage >> i & 1
        if free and s is None:
            s = i
        elif not free and s is not None:
            yield s, i
            s = None


def _future(coverage: int, n: int, fc: dict) -> float:
    return sum(fc[span] for span in _uncovered_spans(coverage, n))


def _extend(hyp: Hypothesis, span, opt: _Option, source, lm: NGramModel, cfg: DecoderConfig) -> Hypothesis:
    s, e = span
    log_d = distortion_cost(s, hyp.last_end, cfg.distortion_base)
    log_lm, hist = _lm_score(lm, hyp.lm_history, opt.target)
    coverage = hyp.coverage | ((1 << e) - (1 << s))
    last_end = e - 1
    n = len(source)
    done = coverage == (1 << n) - 1
    if done:
        end_lp = lm.logprob(EOS, hist)
        log_lm += end_lp
    score = hyp.score
    score += cfg.weight_phi * opt.log_phi
    score += cfg.weight_d * log_d
    score += cfg.weight_lm * log_lm
    step = Step(span, tuple(source[s:e]), opt.target, opt.log_phi, log_d, log_lm)
    return Hypothesis(coverage, last_end, hist, score, 0.0, hyp, step, hyp.text + opt.target)


def _allowed(hyp: Hypothesis, s: int, e: int, cfg: DecoderConfig) -> bool:
    """Jump limit, plus the first gap left behind must stay reachable."""
    limit = cfg.distortion_limit
    if limit is None:
        return True
    if abs(s - hyp.last_end - 1) > limit:
        return False
    coverage = hyp.coverage | ((1 << e) - (1 << s))
    gap = 0
    while coverage >> gap & 1:
        gap += 1
    return gap > s or e - gap <= limit


def _better(a: Hypothesis, b: Hypothesis | None) -> bool:
    """Higher score wins; equal scores go to the lexicographically smaller output."""
    if b is None:
        return True
    if a.score != b.score:
        return a.score > b.score
    return " ".join(a.text) < " ".join(b.text)


def _initial(lm: NGramModel) -> Hypothesis:
    return Hypothesis(0, -1, lm.start(), 0.0)


@dataclass
class Translation:
    output: list[str]
    score: float
    derivation: list[Step]

    def __iter__(self):
        return iter((self.output, self.score, self.derivation))

    def dump(self) -> str:
        return "\n".join(step.dump() for step in self.derivation)


def decode(
    source: Sequence[str], table: PhraseTable, lm: NGramModel, cfg: DecoderConfig = DecoderConfig()
) -> Translation:
    """Beam search over coverage stacks with state recombination."""
    source = list(source)
    n = len(source)
    if n == 0:
        return Translation([], 0.0, [])
    options = collect_options(source, table, cfg)
    fc = future_cost_table(source, table, lm, cfg, options)
    full = (1 << n) - 1
    stacks: list[dict] = [dict() for _ in range(n + 1)]
    init = _initial(lm)
    stacks[0][init.state] = init
    spans_by_start: dict[int, list[tuple[int, int]]] = {}
    for span in sorted(options):
        spans_by_start.setdefault(span[0], []).append(span)
    deepest = init
    for k in range(n):
        hyps = sorted(
            stacks[k].values(),
            key=lambda h: (-(h.score + _future(h.coverage, n, fc)), " ".join(h.text)),
        )[: cfg.beam_size]
        if hyps and k > 0:
            deepest = hyps[0]
        for hyp in hyps:
            for s in range(n):
                if hyp.coverage >> s & 1:
                    continue
                for span in spans_by_start.get(s, ()):
                    e = span[1]
                    if hyp.coverage & ((1 << e) - (1 << s)) or not _allowed(hyp, s, e, cfg):
                        continue
                    for opt in options[span]:
                        new = _extend(hyp, span, opt, source, lm, cfg)
                        stack = stacks[bin(new.coverage).count("1")]
                        old = stack.get(new.state)
                        if _better(new, old):
                            stack[new.state] = new
    best = None
    for hyp in stacks[n].values():
        if hyp.coverage == full and _better(hyp, best):
            best = hyp
    if best is None:
        raise DecodeFailure(
            f"no complete translation; best partial covers {bin(deepest.coverage).count('1')}/{n} words",
            deepest,
        )
    return Translation(best.output(), best.score, best.steps())


def exhaustive_decode(
    source: Sequence[str], table: PhraseTable, lm: NGramModel, cfg: DecoderConfig = DecoderConfig()
) -> Translation:
    """True argmax by enumerating every segmentation, order and phrase choice."""
    source = list(source)
    n = len(source)
    if n > ORACLE_MAX_LEN:
        raise RefuseOracle(f"exhaustive search refuses inputs longer than {ORACLE_MAX_LEN} tokens")
    if n == 0:
        return Translation([], 0.0, [])
    options = collect_options(source, table, cfg)
    full = (1 << n) - 1
    best: list[Hypothesis | None] = [None]

    def search(hyp: Hypothesis):
        if hyp.coverage == full:
            if _better(hyp, best[0]):
                best[0] = hyp
            return
        for (s, e), opts in options.items():
            if hyp.coverage & ((1 << e) - (1 << s)) or not _allowed(hyp, s, e, cfg):
                continue
            for opt in opts:
                search(_extend(hyp, (s, e), opt, source, lm, cfg))

    search(_initial(lm))
    if best[0] is None:
        raise DecodeFailure("no complete translation exists")
    return Translation(best[0].output(), best[0].score, best[0].steps())


def derivation_score(derivation: Sequence[Step], cfg: DecoderConfig = DecoderConfig()) -> float:
    """Recompute a translation score from its derivation's parts."""
    return sum(
        cfg.weight_phi * st.log_phi + cfg.weight_d * st.log_d + cfg.weight_lm * st.log_lm
        for st in derivation
    )
