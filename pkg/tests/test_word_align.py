import itertools
import math

import numpy as np
import pytest

from conftest import pair, two_pair_corpus
from gloss_smt.corpus import NULL, ParallelCorpus, load_bundled
from gloss_smt.word_align import (
    AlignmentFunction,
    DegenerateRow,
    DistortionTable,
    EmOptions,
    Model2Params,
    TranslationTable,
    blended_link_weight,
    corpus_log_likelihood,
    format_giza_alignment,
    load_model,
    model1_em_iteration,
    model1_sentence_prob,
    model2_em_iteration,
    model2_sentence_prob,
    render_alignment_matrix,
    save_model,
    symmetrize,
    train_model1,
    train_model2,
    train_model3,
    viterbi_alignment,
)
from gloss_smt.word_align.tables import PROB_FLOOR


def random_corpus(seed: int, n_pairs: int = 6, max_len: int = 4) -> ParallelCorpus:
    """Pairs of every length up to ``max_len`` over tiny vocabularies, so words recur."""
    rng = np.random.default_rng(seed)
    src_words = ["ab", "abc", "x", "yz", "kat"]
    tgt_words = ["AB", "XY", "KAT", "Z"]
    pairs = []
    for _ in range(n_pairs):
        lf, le = rng.integers(1, max_len + 1, size=2)
        pairs.append((" ".join(rng.choice(src_words, lf)), " ".join(rng.choice(tgt_words, le))))
    return ParallelCorpus.from_pairs(pairs)


def random_table(corpus: ParallelCorpus, seed: int) -> TranslationTable:
    rng = np.random.default_rng(seed)
    probs = rng.uniform(0.05, 1.0, size=(len(corpus.source_vocab), len(corpus.target_vocab)))
    probs /= probs.sum(axis=1, keepdims=True)
    return TranslationTable(corpus.source_vocab, corpus.target_vocab, probs)


def oracle_mstep(counts: np.ndarray, previous: np.ndarray) -> np.ndarray:
    out = previous.copy()
    for r in range(counts.shape[0]):
        total = counts[r].sum()
        if total > 0:
            row = np.maximum(counts[r] / total, PROB_FLOOR)
            out[r] = row / row.sum()
    return out


def brute_force_model1(corpus, tt, opts):
    """Enumerate every alignment of every pair and count links by posterior mass."""
    counts = np.zeros_like(tt.probs)
    for p in corpus:
        sources = ([NULL] if opts.include_null else []) + list(p.source)
        weights = {}
        for a in itertools.product(range(len(sources)), repeat=p.l_e):
            weights[a] = math.prod(blended_link_weight(e, sources[i], tt, opts) for e, i in zip(p.target, a))
        z = sum(weights.values())
        for a, w in weights.items():
            for e, i in zip(p.target, a):
                counts[tt.source_vocab.id(sources[i]), tt.target_vocab.id(e)] += w / z
    return oracle_mstep(counts, tt.probs)


def brute_force_model2(corpus, tt, dt, opts):
    counts = np.zeros_like(tt.probs)
    dcounts = {}
    for p in corpus:
        weights = {}
        for a in itertools.product(range(1, p.l_f + 1), repeat=p.l_e):
            w = 1.0
            for j, (e, i) in enumerate(zip(p.target, a), start=1):
                w *= blended_link_weight(e, p.source[i - 1], tt, opts) * dt.prob(i, j, p.l_e, p.l_f)
            weights[a] = w
        z = sum(weights.values())
        dc = dcounts.setdefault((p.l_e, p.l_f), np.zeros((p.l_e, p.l_f + 1)))
        for a, w in weights.items():
            for j, (e, i) in enumerate(zip(p.target, a), start=1):
                counts[tt.source_vocab.id(p.source[i - 1]), tt.target_vocab.id(e)] += w / z
                dc[j - 1, i] += w / z
    new_d = {}
    for key, dc in dcounts.items():
        block = dc.copy()
        block[:, 1:] = oracle_mstep(dc[:, 1:], dt.block(*key)[:, 1:])
        new_d[key] = block
    return oracle_mstep(counts, tt.probs), new_d


# --- sentence probabilities -------------------------------------------------


def test_model1_sentence_prob_uniform():
    corpus = ParallelCorpus.from_pairs([("i understand", "I UNDERSTAND")])
    tt = TranslationTable.uniform(two_pair_corpus())
    assert model1_sentence_prob(corpus[0], tt) == pytest.approx(0.0625, abs=1e-15)


def test_model1_sentence_prob_with_null():
    corpus = two_pair_corpus()
    tt = TranslationTable.uniform(corpus, include_null=True)
    # t(e|NULL) = 0.25 as well: (1/3^2) * 0.75 * 0.75
    assert model1_sentence_prob(corpus[0], tt) == pytest.approx(0.0625, abs=1e-15)


def test_model1_sentence_prob_identity():
    corpus = ParallelCorpus.from_pairs([("x", "X")])
    tt = TranslationTable.uniform(corpus)
    assert model1_sentence_prob(corpus[0], tt) == 1.0


# --- blending -----------------------------------------------------------------


def test_blended_link_weight_examples(two_pairs):
    tt = TranslationTable.uniform(two_pairs)
    opts = EmOptions(blend_alpha=0.5)
    assert blended_link_weight("I", "i", tt, opts) == pytest.approx(0.625)
    assert blended_link_weight("I", "understand", tt, opts) == pytest.approx(0.125)
    assert blended_link_weight("I", NULL, tt, opts) == pytest.approx(0.125)
    assert blended_link_weight("I", "i", tt, EmOptions(blend_alpha=1.0)) == 0.25
    assert blended_link_weight("I", "i", tt, EmOptions()) == 0.25


def test_alpha_one_reproduces_plain_em_exactly():
    corpus = load_bundled()
    tt = TranslationTable.uniform(corpus)
    plain, ll_plain = model1_em_iteration(corpus, tt, EmOptions())
    blended, ll_blend = model1_em_iteration(corpus, tt, EmOptions(blend_alpha=1.0))
    assert np.array_equal(plain.probs, blended.probs)
    assert ll_plain == ll_blend


def test_alpha_zero_posterior_ignores_t():
    corpus = ParallelCorpus.from_pairs([("ab kat", "KAT AB"), ("abc ab", "AB"), ("kat bak", "BA KAT")])
    opts = EmOptions(blend_alpha=0.0)
    a, _ = model1_em_iteration(corpus, random_table(corpus, 1), opts)
    b, _ = model1_em_iteration(corpus, random_table(corpus, 2), opts)
    # row 0 is NULL, which takes no part here and keeps its initial values
    assert np.allclose(a.probs[1:], b.probs[1:], atol=1e-12, rtol=0)


def test_alpha_validation():
    with pytest.raises(ValueError):
        EmOptions(blend_alpha=1.5)


# --- two-pair trajectories ------------------------------------------------------


def test_model1_first_iteration_values(two_pairs):
    tt, _ = train_model1(two_pairs, EmOptions(iterations=1))
    assert tt.prob("I", "i") == pytest.approx(5 / 12, abs=1e-9)
    assert tt.prob("I", "understand") == pytest.approx(0.5, abs=1e-9)
    assert tt.prob("PIANO", "i") == pytest.approx(1 / 6, abs=1e-9)
    assert tt.prob("UNDERSTAND", "i") == pytest.approx(0.25, abs=1e-9)


def test_model1_third_iteration_values(two_pairs):
    tt, _ = train_model1(two_pairs, EmOptions(iterations=3))
    assert tt.prob("I", "i") == pytest.approx(0.64, abs=0.01)
    assert tt.prob("PIANO", "play") == pytest.approx(0.38, abs=0.01)


def test_blended_model1_orderings(two_pairs):
    tt, _ = train_model1(two_pairs, EmOptions(iterations=3, blend_alpha=0.5))
    assert tt.prob("PLAY", "play") > tt.prob("PLAY", "piano")
    assert tt.prob("I", "piano") > tt.prob("I", "play")


def test_model2_first_iteration_from_model1(two_pairs):
    m1, _ = train_model1(two_pairs, EmOptions(iterations=3))
    m2, _ = train_model2(two_pairs, EmOptions(iterations=1), m1)
    assert m2.ttable.prob("I", "i") == pytest.approx(0.7343, abs=5e-5)
    assert m2.ttable.prob("I", "understand") == pytest.approx(0.3258, abs=5e-5)
    assert m2.ttable.prob("PIANO", "piano") == pytest.approx(0.4050, abs=5e-5)


def test_blended_model2_separates_play(two_pairs):
    m1, _ = train_model1(two_pairs, EmOptions(iterations=3))
    m2, _ = train_model2(two_pairs, EmOptions(iterations=2, blend_alpha=0.5), m1)
    assert m2.ttable.prob("PLAY", "piano") < 0.35
    assert m2.ttable.prob("PLAY", "play") > 0.85


# --- brute-force E-step oracles ------------------------------------------------


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("opts", [EmOptions(), EmOptions(blend_alpha=0.5), EmOptions(include_null=True)])
def test_model1_estep_matches_enumeration(seed, opts):
    corpus = random_corpus(seed)
    tt = random_table(corpus, seed + 100)
    got, _ = model1_em_iteration(corpus, tt, opts)
    assert np.allclose(got.probs, brute_force_model1(corpus, tt, opts), atol=1e-9, rtol=0)


def test_model1_estep_matches_enumeration_on_every_small_shape():
    shapes = [(lf, le) for lf in range(1, 5) for le in range(1, 5)]
    words_f, words_e = ["p", "q", "r", "s"], ["P", "Q", "R", "S"]
    corpus = ParallelCorpus.from_pairs(
        [(" ".join(words_f[:lf]), " ".join(words_e[(k % 2) : (k % 2) + le] if k % 2 + le <= 4 else words_e[:le]))
         for k, (lf, le) in enumerate(shapes)]
    )
    tt = random_table(corpus, 7)
    for opts in (EmOptions(), EmOptions(blend_alpha=0.5)):
        got, _ = model1_em_iteration(corpus, tt, opts)
        assert np.allclose(got.probs, brute_force_model1(corpus, tt, opts), atol=1e-9, rtol=0)


@pytest.mark.parametrize("seed", range(4))
@pytest.mark.parametrize("alpha", [None, 0.5])
def test_model2_estep_matches_enumeration(seed, alpha):
    corpus = random_corpus(seed)
    tt = random_table(corpus, seed + 10)
    rng = np.random.default_rng(seed)
    dt = DistortionTable.uniform(corpus)
    for key, block in dt.probs.items():
        block[:, 1:] = rng.uniform(0.1, 1.0, size=block[:, 1:].shape)
        block[:, 1:] /= block[:, 1:].sum(axis=1, keepdims=True)
    opts = EmOptions(blend_alpha=alpha)
    got_t, got_d, _ = model2_em_iteration(corpus, tt, dt, opts)
    want_t, want_d = brute_force_model2(corpus, tt, dt, opts)
    assert np.allclose(got_t.probs, want_t, atol=1e-9, rtol=0)
    for key, block in want_d.items():
        assert np.allclose(got_d.probs[key], block, atol=1e-9, rtol=0)


# --- normalization and likelihood --------------------------------------------


def assert_t_normalized(tt):
    assert np.allclose(tt.row_sums(), 1.0, atol=1e-9, rtol=0)
    assert (tt.probs >= 0).all()


def assert_d_normalized(dt):
    for block in dt.probs.values():
        assert np.allclose(block.sum(axis=1), 1.0, atol=1e-9, rtol=0)


def test_tables_normalized_after_every_mstep(bundled):
    for opts in (EmOptions(iterations=4), EmOptions(iterations=4, blend_alpha=0.5)):
        train_model1(bundled, opts, on_iteration=lambda k, tt, ll: assert_t_normalized(tt))
        m1, _ = train_model1(bundled, opts)
        tt, dt = m1, DistortionTable.uniform(bundled)
        for _ in range(3):
            tt, dt, _ = model2_em_iteration(bundled, tt, dt, opts)
            assert_t_normalized(tt)
            assert_d_normalized(dt)


def test_model1_loglik_monotone_over_50_iterations(bundled):
    _, history = train_model1(bundled, EmOptions(iterations=50))
    assert all(b >= a - 1e-9 for a, b in zip(history, history[1:]))


def test_model2_loglik_monotone(bundled):
    m1, _ = train_model1(bundled, EmOptions(iterations=5))
    _, history = train_model2(bundled, EmOptions(iterations=15), m1)
    assert all(b >= a - 1e-9 for a, b in zip(history, history[1:]))


def test_loglik_is_pre_update(two_pairs):
    tt = TranslationTable.uniform(two_pairs)
    _, ll = model1_em_iteration(two_pairs, tt, EmOptions())
    assert ll == pytest.approx(corpus_log_likelihood(two_pairs, tt), abs=1e-9)
    assert ll == pytest.approx(math.log(0.0625) + math.log((1 / 27) * 0.75**3), abs=1e-9)


def test_corpus_log_likelihood_edge_cases(two_pairs):
    assert corpus_log_likelihood([], TranslationTable.uniform(two_pairs)) == 0.0
    tt = TranslationTable.uniform(two_pairs)
    tt.probs[:, tt.target_vocab.id("I")] = 0.0
    assert corpus_log_likelihood(two_pairs, tt) == -math.inf


def test_degenerate_row_names_the_word(two_pairs):
    tt = TranslationTable.uniform(two_pairs)
    tt.probs[:, tt.target_vocab.id("PLAY")] = 0.0
    with pytest.raises(DegenerateRow) as err:
        model1_em_iteration(two_pairs, tt, EmOptions())
    assert err.value.word == "PLAY"
    assert err.value.pair_id == 1


def test_uniform_distortion_unchanged_on_single_word_pairs():
    corpus = ParallelCorpus.from_pairs([("a", "A"), ("b", "B")])
    dt = DistortionTable.uniform(corpus)
    _, new_dt, _ = model2_em_iteration(corpus, TranslationTable.uniform(corpus), dt, EmOptions())
    assert np.array_equal(new_dt.probs[(1, 1)], dt.probs[(1, 1)])


def test_model2_sentence_prob_matches_model1_under_uniform_distortion(two_pairs):
    tt = random_table(two_pairs, 5)
    m2 = Model2Params(tt, DistortionTable.uniform(two_pairs))
    for p in two_pairs:
        assert model2_sentence_prob(p, m2) == pytest.approx(model1_sentence_prob(p, tt), rel=1e-12)


# --- Viterbi ------------------------------------------------------------------


def test_viterbi_uniform_prefers_first_position(two_pairs):
    tt = TranslationTable.uniform(two_pairs)
    a, score = viterbi_alignment(two_pairs[1], tt)
    assert a.a == (1, 1, 1)
    assert score == pytest.approx((1 / 3) ** 3 * 0.25**3)


def test_viterbi_after_convergence_uses_smallest_position_on_ties(two_pairs):
    tt, _ = train_model1(two_pairs, EmOptions(iterations=50))
    a, _ = viterbi_alignment(two_pairs[1], tt)
    # PLAY and PIANO split evenly between "play" and "piano", so both go to position 2.
    assert a.a == (1, 2, 2)
    a, _ = viterbi_alignment(two_pairs[0], tt)
    assert a.a == (1, 2)


def test_viterbi_score_is_restricted_joint(bundled):
    tt, _ = train_model1(bundled, EmOptions(iterations=3))
    p = bundled[7]
    a, score = viterbi_alignment(p, tt)
    joint = math.prod(tt.prob(e, p.source[i - 1]) for e, i in zip(p.target, a.a)) / p.l_f**p.l_e
    assert score == pytest.approx(joint, rel=1e-12)


# --- symmetrization -------------------------------------------------------------


def test_symmetrize_identical_directions():
    links = {(1, 2), (2, 1), (3, 3)}
    assert symmetrize(links, links) == links


def test_symmetrize_grows_diagonal():
    assert symmetrize({(1, 1)}, {(1, 1), (2, 2)}) == {(1, 1), (2, 2)}


def test_symmetrize_empty():
    assert symmetrize(set(), set()) == set()


def test_symmetrize_final_adds_unaligned_words_only():
    fwd = {(1, 1), (3, 3)}
    rev = {(1, 1), (3, 3), (1, 3)}
    # (1, 3) is not adjacent to anything new and both its words are already aligned.
    assert symmetrize(fwd, rev) == {(1, 1), (3, 3)}
    rev2 = {(1, 1), (3, 3), (2, 3)}
    assert symmetrize(fwd, rev2) == {(1, 1), (2, 3), (3, 3)}


def test_symmetrize_accepts_alignment_functions():
    fwd = AlignmentFunction((2, 1))  # target j -> source i
    rev = AlignmentFunction((2, 1))  # source i -> target j, from the reverse model
    assert symmetrize(fwd, rev) == {(1, 2), (2, 1)}


def test_symmetrized_result_is_subset_of_union(trained, bundled):
    for p, links in zip(bundled, trained["alignments"]):
        a_f, _ = viterbi_alignment(p, trained["fwd"])
        a_r, _ = viterbi_alignment(p.reversed(), trained["rev"])
        union = a_f.links() | a_r.links(reverse=True)
        assert links <= union
        assert a_f.links() & a_r.links(reverse=True) <= links


# --- reports ----------------------------------------------------------------------


def test_giza_format_first_row():
    p = pair("are you deaf ?", "DEAF YOU ?")
    line = format_giza_alignment(p, {(2, 2), (3, 1), (4, 3)})
    assert line == "DEAF YOU ? NULL ({ }) are ({ }) you ({ 2 }) deaf ({ 1 }) ? ({ 3 })"


def test_giza_format_no_links_lists_everything_under_null():
    p = pair("are you deaf ?", "DEAF YOU ?")
    assert format_giza_alignment(p, set()).startswith("DEAF YOU ? NULL ({ 1 2 3 }) are ({ }) you ({ })")


def test_giza_format_multi_link_and_score():
    p = pair("x y", "A B C D")
    line = format_giza_alignment(p, {(1, 4), (1, 1), (2, 2), (2, 3)}, score=2.195e-16)
    assert line == "A B C D NULL ({ }) x ({ 1 4 }) y ({ 2 3 })\tSource : 2 Target : 4\t2.195e-16"
    assert format_giza_alignment(pair("x", "X"), {(1, 1)}, 0.0016781234).endswith("\t0.001678123")


def test_alignment_matrix_layout():
    p = pair("do you", "YOU ASSUMES")
    grid = render_alignment_matrix(p, {(1, 2), (2, 2)}).splitlines()
    assert grid[0] == "    | Y A"
    assert grid[-2] == " do | · ■"
    assert grid[-1] == "you | · ■"
    empty = render_alignment_matrix(pair("x", "X"), set()).splitlines()
    assert empty[-1] == "x | ·"


# --- persistence ----------------------------------------------------------------


def test_model_files_round_trip(tmp_path, bundled):
    opts = EmOptions(iterations=2, blend_alpha=0.5)
    m1, _ = train_model1(bundled, opts)
    m2, _ = train_model2(bundled, opts, m1)
    m3, _ = train_model3(bundled, m2, 1)
    save_model(m1, tmp_path / "m.ibm1.txt", 2, 0.5)
    save_model(m2, tmp_path / "m.ibm2.txt", 2, 0.5)
    save_model(m3, tmp_path / "m.ibm3.txt", 1, None, seed_file="m.ibm2.txt")
    l1 = load_model(tmp_path / "m.ibm1.txt")
    l2 = load_model(tmp_path / "m.ibm2.txt")
    l3 = load_model(tmp_path / "m.ibm3.txt")
    assert np.array_equal(l1.probs, m1.probs)
    assert list(l1.source_vocab.tokens) == list(m1.source_vocab.tokens)
    assert np.array_equal(l2.ttable.probs, m2.ttable.probs)
    for key, block in m2.dtable.probs.items():
        assert np.array_equal(l2.dtable.probs[key], block)
    assert np.array_equal(l3.ttable.probs, m3.ttable.probs)
    assert np.array_equal(l3.fertility, m3.fertility)
    assert l3.p0 == m3.p0
    for key, block in m3.rdist.items():
        assert np.array_equal(l3.rdist[key], block)
    for p in bundled:
        assert viterbi_alignment(p, l3) == viterbi_alignment(p, m3)
