from __future__ import annotations

import math
import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from botprobe.errors import LengthMismatchError
from botprobe.textmetrics import TfidfScorer, bleu, fuzz_ratio, ibleu, indel_distance, normalize_text


# Full-matrix DP oracle with the explicit three-way recurrence
# (insert/delete cost 1, substitution cost 2); independent of the
# LCS-based production implementation.
def oracle_distance(a: str, b: str) -> int:
    rows = len(a) + 1
    cols = len(b) + 1
    d = [[0] * cols for _ in range(rows)]
    for i in range(rows):
        d[i][0] = i
    for j in range(cols):
        d[0][j] = j
    for i in range(1, rows):
        for j in range(1, cols):
            substitution = d[i - 1][j - 1] + (0 if a[i - 1] == b[j - 1] else 2)
            d[i][j] = min(d[i - 1][j] + 1, d[i][j - 1] + 1, substitution)
    return d[-1][-1]


def oracle_ratio(a: str, b: str) -> int:
    total = len(a) + len(b)
    if total == 0:
        return 100
    return int(round(100 * (total - oracle_distance(a, b)) / total))


def test_identity_scores_100():
    assert fuzz_ratio("abc", "abc") == 100
    assert fuzz_ratio("", "") == 100


def test_total_deletion_scores_zero():
    assert fuzz_ratio("abcd", "") == 0


def test_kitten_sitting_matches_dp_oracle():
    # D = 5 under substitution cost 2 -> round(100 * 8 / 13) = 62
    assert oracle_distance("kitten", "sitting") == 5
    assert fuzz_ratio("kitten", "sitting") == 62
    assert fuzz_ratio("kitten", "sitting") == oracle_ratio("kitten", "sitting")


def test_ratio_agrees_with_oracle_on_random_pairs():
    rng = random.Random(77)
    alphabet = "abcdef xyz"
    for _ in range(500):
        a = "".join(rng.choice(alphabet) for _ in range(rng.randrange(0, 14)))
        b = "".join(rng.choice(alphabet) for _ in range(rng.randrange(0, 14)))
        assert fuzz_ratio(a, b) == oracle_ratio(a, b), (a, b)


@given(st.text(max_size=24), st.text(max_size=24))
@settings(max_examples=200, deadline=None)
def test_ratio_symmetric_and_bounded(a, b):
    left = fuzz_ratio(a, b)
    assert left == fuzz_ratio(b, a)
    assert 0 <= left <= 100
    assert fuzz_ratio(a, a) == 100


def test_indel_distance_triangle_of_lengths():
    assert indel_distance("abc", "abc") == 0
    assert indel_distance("abc", "") == 3
    assert indel_distance("ab", "ba") == 2


def test_normalize_text_folds_case_and_whitespace():
    assert normalize_text("  May   I\tGet your EMAIL? ") == "may i get your email?"


# --- BLEU ------------------------------------------------------------------------


# Straightforward second implementation: per-n clipped counts accumulated
# with dictionaries and the same documented smoothing conventions.
def oracle_bleu(candidates: list[str], references: list[str]) -> float:
    def grams(tokens, n):
        out = {}
        for i in range(len(tokens) - n + 1):
            key = " ".join(tokens[i : i + n])
            out[key] = out.get(key, 0) + 1
        return out

    numerators = {1: 0, 2: 0, 3: 0, 4: 0}
    denominators = {1: 0, 2: 0, 3: 0, 4: 0}
    c_len = 0
    r_len = 0
    for cand, ref in zip(candidates, references):
        c_tokens = cand.lower().split()
        r_tokens = ref.lower().split()
        c_len += len(c_tokens)
        r_len += len(r_tokens)
        for n in (1, 2, 3, 4):
            cg = grams(c_tokens, n)
            rg = grams(r_tokens, n)
            denominators[n] += sum(cg.values())
            numerators[n] += sum(min(v, rg.get(k, 0)) for k, v in cg.items())
    if c_len == 0 or numerators[1] == 0:
        return 0.0
    precisions = [numerators[1] / denominators[1]]
    for n in (2, 3, 4):
        precisions.append((numerators[n] + 1) / (denominators[n] + 1))
    geo_mean = math.exp(sum(math.log(p) for p in precisions) / 4)
    bp = 1.0 if c_len > r_len else math.exp(1 - r_len / c_len)
    return 100.0 * bp * geo_mean


def test_bleu_identity_is_100():
    sentences = ["the quick brown fox jumps", "may i check my order status"]
    assert bleu(sentences, sentences) == pytest.approx(100.0)


def test_bleu_zero_overlap_is_zero():
    assert bleu(["aaa bbb ccc"], ["xxx yyy zzz"]) == 0.0


def test_bleu_matches_independent_oracle_on_toy_corpus():
    candidates = ["the cat sat on the mat", "could i verify my order progress please"]
    references = ["the cat is on the mat", "can i check my order status please"]
    assert bleu(candidates, references) == pytest.approx(oracle_bleu(candidates, references), abs=1e-6)


def test_bleu_matches_oracle_on_random_corpora():
    rng = random.Random(3)
    vocabulary = "alpha beta gamma delta epsilon zeta eta theta".split()
    for _ in range(50):
        size = rng.randrange(1, 5)
        candidates = [" ".join(rng.choices(vocabulary, k=rng.randrange(1, 9))) for _ in range(size)]
        references = [" ".join(rng.choices(vocabulary, k=rng.randrange(1, 9))) for _ in range(size)]
        assert bleu(candidates, references) == pytest.approx(oracle_bleu(candidates, references), abs=1e-9)


def test_bleu_rejects_mismatched_and_empty_corpora():
    with pytest.raises(LengthMismatchError):
        bleu(["a"], ["a", "b"])
    with pytest.raises(LengthMismatchError):
        bleu([], [])


def test_bleu_case_folding():
    assert bleu(["The Cat"], ["the cat"]) == pytest.approx(100.0)


# --- iBLEU ------------------------------------------------------------------------


def test_ibleu_exact_linear_combination():
    assert ibleu(42.7, 42.7) == pytest.approx(25.62)
    assert ibleu(31.4, 55.3) == pytest.approx(14.06)
    assert ibleu(0.0, 0.0) == 0.0


def test_ibleu_monotonicity():
    assert ibleu(50.0, 20.0) > ibleu(49.0, 20.0)
    assert ibleu(50.0, 20.0) > ibleu(50.0, 21.0)


# --- TF-IDF similarity ---------------------------------------------------------------


# Independent reimplementation with explicit loops over a fixed corpus.
def oracle_tfidf_cosine(corpus: list[str], a: str, b: str) -> float:
    def features(text):
        tokens = text.lower().split()
        feats = list(tokens)
        for i in range(len(tokens) - 1):
            feats.append(tokens[i] + " " + tokens[i + 1])
        return feats

    df = Counter()
    for doc in corpus:
        df.update(set(features(doc)))
    n = len(corpus)

    def vector(text):
        counts = Counter(features(text))
        vec = {}
        for term, tf in counts.items():
            idf = math.log((1 + n) / (1 + df.get(term, 0))) + 1.0
            vec[term] = tf * idf
        norm = math.sqrt(sum(v * v for v in vec.values()))
        return {k: v / norm for k, v in vec.items()} if norm else {}

    va, vb = vector(a), vector(b)
    return sum(va[t] * vb.get(t, 0.0) for t in va)


def test_self_similarity_is_one():
    scorer = TfidfScorer(["check my order", "report an issue"])
    assert scorer.score("check my order", "check my order") == 1.0


def test_disjoint_vocabulary_scores_zero():
    scorer = TfidfScorer(["alpha beta", "gamma delta"])
    assert scorer.score("alpha beta", "gamma delta") == 0.0


def test_tfidf_matches_hand_oracle_on_two_doc_corpus():
    corpus = ["check my order status", "what is my order status"]
    scorer = TfidfScorer(corpus)
    value = scorer.score(corpus[0], corpus[1])
    expected = oracle_tfidf_cosine(corpus, corpus[0], corpus[1])
    assert value == pytest.approx(expected, abs=1e-12)
    assert 0.0 < value < 1.0


def test_tfidf_symmetric_and_clamped():
    scorer = TfidfScorer(["one two three", "two three four", "five six"])
    pairs = [("one two", "two three"), ("five", "one"), ("six five", "five six")]
    for a, b in pairs:
        score = scorer.score(a, b)
        assert score == pytest.approx(scorer.score(b, a))
        assert 0.0 <= score <= 1.0
