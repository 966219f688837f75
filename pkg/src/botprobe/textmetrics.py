"""Lexical and semantic text metrics.

fuzz_ratio is the NLU workhorse: a Levenshtein-style similarity on a 0-100
scale where substitutions cost 2 (equivalently, an indel distance), matching
the classic fuzzy-matching ratio.  BLEU here is corpus BLEU-4 with add-one
smoothing on the higher-order precisions; iBLEU combines BLEU against the
reference (fidelity) with BLEU against the source (copying penalty).
"""
from __future__ import annotations

import math
import re
from collections import Counter

import httpx

from .errors import LengthMismatchError, ScorerUnavailableError

_WS = re.compile(r"\s+")


def normalize_text(text: str) -> str:
    """Lowercase and collapse whitespace; applied before fuzzy matching."""
    return _WS.sub(" ", text.strip().lower())


def _lcs_length(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return 0
    prev = [0] * (len(b) + 1)
    for ch_a in a:
        cur = [0]
        for j, ch_b in enumerate(b, 1):
            if ch_a == ch_b:
                cur.append(prev[j - 1] + 1)
            else:
                cur.append(max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def indel_distance(a: str, b: str) -> int:
    """Edit distance with insert/delete cost 1 and substitution cost 2."""
    return len(a) + len(b) - 2 * _lcs_length(a, b)


def fuzz_ratio(a: str, b: str) -> int:
    """Similarity of two strings on a 0-100 scale.

    ratio = round(100 * (|a| + |b| - D) / (|a| + |b|)) with D the indel
    distance; two empty strings score 100 by convention.
    """
    total = len(a) + len(b)
    if total == 0:
        return 100
    if a == b:
        return 100
    return int(round(100 * (total - indel_distance(a, b)) / total))


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu(candidates: list[str], references: list[str]) -> float:
    """Corpus BLEU-4 on a 0-100 scale, one reference per candidate.

    Tokens are case-folded whitespace splits.  Precisions for n >= 2 get
    add-one smoothing; a zero unigram precision pins the score to 0.  The
    brevity penalty is computed corpus-level.
    """
    if len(candidates) != len(references):
        raise LengthMismatchError(f"{len(candidates)} candidates vs {len(references)} references")
    if not candidates:
        raise LengthMismatchError("empty corpus")
    matched = [0] * 5
    total = [0] * 5
    cand_len = 0
    ref_len = 0
    for cand, ref in zip(candidates, references):
        cand_tokens = cand.lower().split()
        ref_tokens = ref.lower().split()
        cand_len += len(cand_tokens)
        ref_len += len(ref_tokens)
        for n in range(1, 5):
            cand_counts = _ngrams(cand_tokens, n)
            ref_counts = _ngrams(ref_tokens, n)
            total[n] += sum(cand_counts.values())
            matched[n] += sum(min(count, ref_counts[gram]) for gram, count in cand_counts.items())
    if cand_len == 0 or matched[1] == 0:
        return 0.0
    log_precision = math.log(matched[1] / total[1])
    for n in range(2, 5):
        log_precision += math.log((matched[n] + 1) / (total[n] + 1))
    brevity = 1.0 if cand_len > ref_len else math.exp(1 - ref_len / cand_len)
    return 100.0 * brevity * math.exp(log_precision / 4)


def ibleu(target_bleu: float, self_bleu: float) -> float:
    """Weighted paraphrase quality: 0.8 * target BLEU - 0.2 * self BLEU."""
    return 0.8 * target_bleu - 0.2 * self_bleu


# --- semantic similarity ----------------------------------------------------


def _tfidf_tokens(text: str) -> list[str]:
    tokens = normalize_text(text).split()
    return tokens + [f"{a} {b}" for a, b in zip(tokens, tokens[1:])]


class TfidfScorer:
    """Default local similarity: cosine over L2-normalized TF-IDF vectors.

    Features are unigrams plus bigrams; IDF is the smoothed variant
    ln((1 + N) / (1 + df)) + 1 over the fitted corpus, so unseen terms still
    carry weight.  This is a lexical stand-in for an embedding model; wire a
    RemoteScorer at a model service for true semantic scores.
    """

    def __init__(self, corpus: list[str] | None = None):
        self._df: Counter = Counter()
        self._n_docs = 0
        if corpus:
            self.fit(corpus)

    def fit(self, corpus: list[str]) -> "TfidfScorer":
        self._df = Counter()
        self._n_docs = len(corpus)
        for doc in corpus:
            self._df.update(set(_tfidf_tokens(doc)))
        return self

    def _idf(self, term: str) -> float:
        return math.log((1 + self._n_docs) / (1 + self._df[term])) + 1.0

    def _vector(self, text: str) -> dict[str, float]:
        counts = Counter(_tfidf_tokens(text))
        vec = {term: tf * self._idf(term) for term, tf in counts.items()}
        norm = math.sqrt(sum(w * w for w in vec.values()))
        if norm == 0:
            return {}
        return {term: w / norm for term, w in vec.items()}

    def score(self, a: str, b: str) -> float:
        if normalize_text(a) == normalize_text(b):
            return 1.0
        va = self._vector(a)
        vb = self._vector(b)
        if len(vb) < len(va):
            va, vb = vb, va
        dot = sum(w * vb.get(term, 0.0) for term, w in va.items())
        return min(max(dot, 0.0), 1.0)

    __call__ = score


class RemoteScorer:
    """Similarity via an external embedding service.

    Wire contract: POST {a, b} -> {"score": float}.
    """

    def __init__(self, url: str, timeout: float = 10.0, retries: int = 1):
        self.url = url
        self.timeout = timeout
        self.retries = retries

    def score(self, a: str, b: str) -> float:
        last_error: Exception | None = None
        for _ in range(self.retries + 1):
            try:
                response = httpx.post(self.url, json={"a": a, "b": b}, timeout=self.timeout)
                response.raise_for_status()
                return float(response.json()["score"])
            except Exception as exc:  # noqa: BLE001 - any transport/format failure
                last_error = exc
        raise ScorerUnavailableError(f"scorer at {self.url} unavailable: {last_error}")

    __call__ = score
