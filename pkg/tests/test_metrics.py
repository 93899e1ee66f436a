import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robocmd.metrics import (
    Thresholds,
    Verdict,
    jaccard_distance,
    judge_paraphrase,
    levenshtein,
    word_set,
)


def oracle_levenshtein(a: str, b: str) -> int:
    """Textbook full-matrix dynamic program, kept independent of the
    production implementation."""
    table = [[0] * (len(b) + 1) for _ in range(len(a) + 1)]
    for i in range(len(a) + 1):
        table[i][0] = i
    for j in range(len(b) + 1):
        table[0][j] = j
    for i in range(1, len(a) + 1):
        for j in range(1, len(b) + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            table[i][j] = min(
                table[i - 1][j] + 1, table[i][j - 1] + 1, table[i - 1][j - 1] + cost
            )
    return table[len(a)][len(b)]


def test_levenshtein_basics():
    assert levenshtein("abc", "abc") == 0
    assert levenshtein("", "abc") == 3
    assert levenshtein("kitten", "sitting") == oracle_levenshtein("kitten", "sitting") == 3


def test_levenshtein_token_sequences():
    assert levenshtein(["bring", "an", "umbrella"], ["bring", "an", "umbrella"]) == 0
    assert levenshtein("bring an umbrella to me".split(), "bring an umbrella to bob".split()) == 1


def test_levenshtein_random_against_oracle():
    rng = random.Random(12)
    alphabet = "abcde"
    for _ in range(1000):
        a = "".join(rng.choice(alphabet) for _ in range(rng.randrange(0, 13)))
        b = "".join(rng.choice(alphabet) for _ in range(rng.randrange(0, 13)))
        assert levenshtein(a, b) == oracle_levenshtein(a, b)


def test_jaccard_basics():
    assert jaccard_distance({"a", "b"}, {"a", "b"}) == 0.0
    assert jaccard_distance({"a"}, {"b"}) == 1.0
    assert jaccard_distance(set(), set()) == 0.0
    assert jaccard_distance({"a", "b"}, {"b", "c"}) == pytest.approx(2 / 3)


def test_jaccard_random_against_set_arithmetic():
    rng = random.Random(34)
    universe = [f"w{k}" for k in range(12)]
    for _ in range(1000):
        a = {w for w in universe if rng.random() < 0.4}
        b = {w for w in universe if rng.random() < 0.4}
        expected = 0.0 if not (a | b) else 1 - len(a & b) / len(a | b)
        assert abs(jaccard_distance(a, b) - expected) <= 1e-12


def test_word_set_strips_trailing_punctuation():
    assert word_set("Bring me the apple, please!") == {"bring", "me", "the", "apple", "please"}


def test_judge_identical_too_similar():
    judgment = judge_paraphrase("go to the kitchen", "go to the kitchen")
    assert judgment.verdict is Verdict.TOO_SIMILAR
    assert judgment.levenshtein == 0


def test_judge_disjoint_too_different():
    judgment = judge_paraphrase("go to the kitchen", "purple monkeys dancing wildly")
    assert judgment.verdict is Verdict.TOO_DIFFERENT
    assert judgment.jaccard_distance == 1.0


def test_judge_real_paraphrase_acceptable():
    original = "tell me how many coke there are on the freezer"
    paraphrase = "how many cokes are left in the freezer"
    judgment = judge_paraphrase(original, paraphrase)
    # frozen from the independent oracles: character edits and word-set overlap
    assert judgment.levenshtein == oracle_levenshtein(original, paraphrase) == 17
    assert judgment.jaccard_distance == pytest.approx(1 - 5 / 13)
    assert judgment.verdict is Verdict.ACCEPTABLE


def test_judge_rejects_empty():
    with pytest.raises(ValueError):
        judge_paraphrase("", "x")


def test_custom_thresholds():
    strict = Thresholds(levenshtein_low=100, jaccard_low=1.0, jaccard_high=1.01)
    assert judge_paraphrase("abc def", "abd def", strict).verdict is Verdict.TOO_SIMILAR


@settings(max_examples=300, deadline=None)
@given(st.text(alphabet="abcd", max_size=10), st.text(alphabet="abcd", max_size=10))
def test_levenshtein_symmetry_and_identity(a, b):
    assert levenshtein(a, b) == levenshtein(b, a)
    assert levenshtein(a, a) == 0
    assert levenshtein(a, b) == oracle_levenshtein(a, b)


@settings(max_examples=200, deadline=None)
@given(
    st.text(alphabet="abc", max_size=8),
    st.text(alphabet="abc", max_size=8),
    st.text(alphabet="abc", max_size=8),
)
def test_levenshtein_triangle_inequality(a, b, c):
    assert levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c)


@settings(max_examples=200, deadline=None)
@given(
    st.sets(st.sampled_from("abcdefgh"), max_size=6),
    st.sets(st.sampled_from("abcdefgh"), max_size=6),
)
def test_jaccard_symmetric_bounded(a, b):
    d = jaccard_distance(a, b)
    assert 0.0 <= d <= 1.0
    assert d == jaccard_distance(b, a)
