import math

import pytest

from gloss_smt.corpus import ParallelCorpus
from gloss_smt.decoder import (
    OOV_LOGPROB,
    DecodeFailure,
    DecoderConfig,
    RefuseOracle,
    collect_options,
    decode,
    derivation_score,
    distortion_cost,
    exhaustive_decode,
    future_cost_table,
)
from gloss_smt.ngram_lm import train_ngram
from gloss_smt.phrase_model import build_phrase_table

ORACLE_CFG = DecoderConfig(beam_size=10**4, distortion_limit=None)


def short_inputs(corpus, max_len):
    """Whole source sentences up to ``max_len`` plus every shorter window of the longer ones."""
    seen = set()
    for p in corpus:
        for n in range(1, max_len + 1):
            for s in range(len(p.source) - n + 1):
                seen.add(tuple(p.source[s : s + n]))
    return sorted(seen)


def test_distortion_cost():
    assert distortion_cost(3, 2) == 0.0
    assert distortion_cost(5, 2) == pytest.approx(2 * math.log(0.6))
    assert distortion_cost(0, 2) == distortion_cost(6, 2)


def test_config_validation():
    with pytest.raises(ValueError):
        DecoderConfig(beam_size=0)
    with pytest.raises(ValueError):
        DecoderConfig(distortion_base=1.0)


def test_single_phrase_derivation():
    corpus = ParallelCorpus.from_pairs([("are you deaf ?", "DEAF YOU ?")])
    table = build_phrase_table(corpus, [{(2, 2), (3, 1), (4, 3)}])
    lm = train_ngram([("DEAF", "YOU", "?")])
    result = decode(["are", "you", "deaf", "?"], table, lm)
    assert result.output == ["DEAF", "YOU", "?"]
    assert len(result.derivation) == 1
    # "you deaf ?" also yields the target phrase, so phi(f|e) = 1/2; the jump
    # costs nothing and the LM has seen exactly this sentence.
    [opt] = table.lookup(["are", "you", "deaf", "?"])
    assert opt.p_src_given_tgt == 0.5
    assert result.score == pytest.approx(math.log(0.5) + 0.0 + 0.0, abs=1e-12)


def test_bundled_question(trained):
    out = decode(["are", "you", "deaf", "?"], trained["phrases"], trained["lm"])
    assert out.output == ["DEAF", "YOU", "?"]
    assert exhaustive_decode(["are", "you", "deaf", "?"], trained["phrases"], trained["lm"]).output == out.output


def test_matches_exhaustive_on_short_inputs(trained, bundled):
    table, lm = trained["phrases"], trained["lm"]
    for source in short_inputs(bundled, 6):
        beam = decode(source, table, lm, ORACLE_CFG)
        exact = exhaustive_decode(source, table, lm, ORACLE_CFG)
        assert beam.score == pytest.approx(exact.score, abs=1e-9), source
        assert beam.output == exact.output, source


def test_matches_exhaustive_with_distortion_limit(trained, bundled):
    cfg = DecoderConfig(beam_size=10**4, distortion_limit=1)
    for source in short_inputs(bundled, 5):
        beam = decode(source, trained["phrases"], trained["lm"], cfg)
        exact = exhaustive_decode(source, trained["phrases"], trained["lm"], cfg)
        assert beam.score == pytest.approx(exact.score, abs=1e-9), source


def test_score_equals_sum_of_derivation_parts(trained, bundled):
    for p in bundled:
        result = decode(p.source, trained["phrases"], trained["lm"])
        assert derivation_score(result.derivation) == pytest.approx(result.score, abs=1e-9)
        covered = sorted(i for st in result.derivation for i in range(*st.src_span))
        assert covered == list(range(p.l_f))
        assert [w for st in result.derivation for w in st.target] == result.output


def test_larger_beam_never_scores_lower(trained, bundled):
    for p in bundled:
        prev = -math.inf
        for beam in (1, 2, 3, 5, 10, 30, 100, 1000):
            score = decode(p.source, trained["phrases"], trained["lm"], DecoderConfig(beam_size=beam)).score
            assert score >= prev - 1e-9, (p.id, beam)
            prev = score


def test_future_cost_splits(trained, bundled):
    for source in short_inputs(bundled, 4):
        fc = future_cost_table(source, trained["phrases"], trained["lm"])
        for s in range(len(source) - 1):
            assert fc[(s, s + 2)] >= fc[(s, s + 1)] + fc[(s + 1, s + 2)]


def test_single_token_future_cost_is_best_option():
    corpus = ParallelCorpus.from_pairs([("x", "X")])
    table = build_phrase_table(corpus, [{(1, 1)}])
    lm = train_ngram([("X",)])
    fc = future_cost_table(["x"], table, lm)
    assert fc[(0, 1)] == pytest.approx(lm.logprob("X"))
    assert future_cost_table(["x"], table, None)[(0, 1)] == 0.0


def test_translation_model_estimate_bounds_completions(trained, bundled):
    # Without the LM term the estimate is the best achievable phrase score, and
    # distortion and LM terms are never positive.
    for source in short_inputs(bundled, 5):
        fc = future_cost_table(source, trained["phrases"], None, ORACLE_CFG)
        exact = exhaustive_decode(source, trained["phrases"], trained["lm"], ORACLE_CFG)
        assert fc[(0, len(source))] >= sum(st.log_phi for st in exact.derivation) - 1e-9
        assert fc[(0, len(source))] >= exact.score - 1e-9


def test_unknown_words_pass_through(trained):
    result = decode(["are", "you", "zorblax", "?"], trained["phrases"], trained["lm"])
    assert "zorblax" in result.output
    step = next(st for st in result.derivation if st.source == ("zorblax",))
    assert step.log_phi == OOV_LOGPROB


def test_no_options_fails_consistently(trained):
    cfg = DecoderConfig(oov_passthrough=False)
    with pytest.raises(DecodeFailure) as beam_err:
        decode(["you", "you", "zorblax"], trained["phrases"], trained["lm"], cfg)
    assert beam_err.value.partial.coverage == 0b011
    assert beam_err.value.partial_output == ["YOU", "YOU"]
    assert "covers 2/3" in str(beam_err.value)
    with pytest.raises(DecodeFailure):
        exhaustive_decode(["you", "you", "zorblax"], trained["phrases"], trained["lm"], cfg)


def test_oracle_refuses_long_input(trained):
    with pytest.raises(RefuseOracle):
        exhaustive_decode(["you"] * 8, trained["phrases"], trained["lm"])


def test_empty_input():
    table = build_phrase_table(ParallelCorpus.from_pairs([("x", "X")]), [{(1, 1)}])
    assert decode([], table, train_ngram([("X",)])).output == []


def test_options_cover_every_position(trained, bundled):
    for p in bundled:
        opts = collect_options(p.source, trained["phrases"], DecoderConfig())
        assert all((s, s + 1) in opts or any(a <= s < b for a, b in opts) for s in range(p.l_f))


def test_deterministic(trained, bundled):
    a = [decode(p.source, trained["phrases"], trained["lm"]).dump() for p in bundled]
    b = [decode(p.source, trained["phrases"], trained["lm"]).dump() for p in bundled]
    assert a == b


def test_derivation_dump_format(trained):
    dump = decode(["are", "you", "deaf", "?"], trained["phrases"], trained["lm"]).dump()
    first = dump.splitlines()[0]
    span, rest = first.split(" ", 1)
    assert span.startswith("[") and span.endswith("]")
    f, e, scores = rest.split(" ||| ")
    assert len(scores.split()) == 3
