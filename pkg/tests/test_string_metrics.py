import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gloss_smt.string_metrics import JaroWinklerConfig, jaro, jaro_winkler, match_stats


def reference_match_stats(a: str, b: str) -> tuple[int, int]:
    """Plain restatement of greedy in-window matching: for each position of
    ``a`` scan every position of ``b`` and take the leftmost free equal
    character whose distance is within the radius."""
    radius = max(len(a), len(b)) // 2 - 1
    if radius < 0:
        radius = 0
    taken = set()
    pairs = []
    for i in range(len(a)):
        for k in range(len(b)):
            if k in taken or abs(i - k) > radius or a[i] != b[k]:
                continue
            taken.add(k)
            pairs.append(i)
            break
    seq_a = [a[i] for i in pairs]
    seq_b = [b[k] for k in sorted(taken)]
    out_of_order = sum(1 for x, y in zip(seq_a, seq_b) if x != y)
    return len(pairs), out_of_order // 2


def test_matcher_equals_reference_on_all_short_strings():
    strings = ["".join(p) for n in range(7) for p in itertools.product("abc", repeat=n)]
    for a in strings:
        for b in strings:
            got = match_stats(a, b)
            assert (got.matches, got.transpositions) == reference_match_stats(a, b), (a, b)


@pytest.mark.parametrize(
    "s1, s2, expected",
    [("i", "i", 1.0), ("i", "understand", 0.0), ("understand", "understand", 1.0), ("UNDERSTAND", "understand", 1.0)],
)
def test_identity_and_zero_rows(s1, s2, expected):
    assert jaro(s1, s2) == expected
    assert jaro_winkler(s1, s2) == expected


def test_piano_play_by_hand():
    # m = 2 ("p", "a" within radius 1), t = 0: (2/5 + 2/4 + 1) / 3
    assert jaro("piano", "play") == pytest.approx(19 / 30, abs=1e-12)
    # one shared prefix letter
    assert jaro_winkler("piano", "play") == pytest.approx(19 / 30 + 0.1 * (1 - 19 / 30), abs=1e-12)
    assert round(jaro_winkler("PIANO", "play"), 4) == 0.67


def test_i_piano_similarity():
    assert jaro_winkler("i", "piano") == pytest.approx(0.7333, abs=1e-4)
    assert jaro_winkler("i", "play") == 0.0


def test_classic_transposition():
    assert jaro("martha", "marhta") == pytest.approx(0.9444, abs=1e-4)
    assert jaro_winkler("martha", "marhta") == pytest.approx(0.9611, abs=1e-4)


def test_empty_inputs():
    assert jaro("", "") == 1.0
    assert jaro("", "a") == 0.0
    assert jaro_winkler("a", "") == 0.0


def test_prefix_cap():
    cfg = JaroWinklerConfig(prefix_scale=0.1, max_prefix=4)
    d = jaro("abcdefgh", "abcdefxy")
    assert jaro_winkler("abcdefgh", "abcdefxy", cfg) == pytest.approx(d + 4 * 0.1 * (1 - d))


@pytest.mark.parametrize("kwargs", [{"prefix_scale": 0.3}, {"prefix_scale": 0.0}, {"max_prefix": -1}])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        JaroWinklerConfig(**kwargs)


tokens = st.text(alphabet="abcdeABC-", max_size=8)


@given(tokens, tokens)
def test_symmetry(a, b):
    assert jaro(a, b) == pytest.approx(jaro(b, a), abs=1e-12)


@given(tokens, tokens, st.floats(0.01, 0.25), st.integers(0, 4))
def test_boost_bounds(a, b, p, cap):
    d = jaro(a, b)
    w = jaro_winkler(a, b, JaroWinklerConfig(p, cap))
    assert 0.0 <= d <= w <= 1.0 + 1e-12


@given(st.text(alphabet="abcXYZ", min_size=1, max_size=8))
def test_identity(a):
    assert jaro(a, a) == 1.0
    assert jaro_winkler(a, a) == pytest.approx(1.0)


@given(st.text(alphabet="abc", min_size=1, max_size=6), st.text(alphabet="xyz", min_size=1, max_size=6))
def test_disjoint_alphabets(a, b):
    assert jaro(a, b) == 0.0
    assert jaro_winkler(a, b) == 0.0
