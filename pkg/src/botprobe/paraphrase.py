"""Intent-query paraphrasing: providers, threshold filtering, quality scoring.

Candidates must be semantically close to the source (high similarity) yet
lexically diverse (low fuzz ratio); anything outside the configured band is
discarded as either a noisy or a trivial rewrite.  The built-in provider is a
deterministic synonym/reframe engine so the whole pipeline runs offline; a
remote model service can be wired in through the provider contract.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import httpx

from .errors import EmptyUtteranceError, LengthMismatchError, ProviderUnavailableError
from .seeding import derive_rng
from .textmetrics import bleu, fuzz_ratio, ibleu, normalize_text


@dataclass
class ParaphraseCandidate:
    source: str
    text: str
    provider: str
    rank: int
    sim: float | None = None
    fuzz: int | None = None
    kept: bool | None = None

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "text": self.text,
            "provider": self.provider,
            "rank": self.rank,
            "sim": self.sim,
            "fuzz": self.fuzz,
            "kept": self.kept,
        }


@dataclass
class FilterConfig:
    """Keep candidates with sim in [sim_low, sim_high] and fuzz <= fuzz_max."""

    sim_low: float = 0.50
    sim_high: float = 0.99
    fuzz_max: int = 70

    def __post_init__(self):
        if not (0.0 <= self.sim_low <= self.sim_high <= 1.0):
            raise ValueError("need 0 <= sim_low <= sim_high <= 1")
        if not (0 <= self.fuzz_max <= 100):
            raise ValueError("need 0 <= fuzz_max <= 100")


@dataclass
class ParaphraseEvalReport:
    target_bleu: float
    self_bleu: float
    ibleu: float
    n_pairs: int

    def to_dict(self) -> dict:
        return {
            "target_bleu": self.target_bleu,
            "self_bleu": self.self_bleu,
            "ibleu": self.ibleu,
            "n_pairs": self.n_pairs,
        }


# --- providers ---------------------------------------------------------------

_SYNONYMS: dict[str, list[str]] = {
    "may": ["can", "could"],
    "can": ["could", "may"],
    "check": ["verify", "look up", "review"],
    "status": ["state", "progress", "standing"],
    "latest": ["most recent", "newest", "current"],
    "issue": ["problem", "ticket", "case"],
    "order": ["purchase", "shipment"],
    "want": ["need", "wish", "would like"],
    "help": ["assist", "support"],
    "get": ["receive", "obtain"],
    "give": ["provide", "send"],
    "tell": ["show", "give"],
    "talk": ["speak", "chat"],
    "agent": ["representative", "person", "human"],
    "book": ["reserve", "arrange"],
    "buy": ["purchase", "acquire"],
    "end": ["finish", "close", "stop"],
    "report": ["log", "file", "submit"],
    "make": ["place", "create"],
    "find": ["locate", "look up"],
    "please": [],
    "my": ["the"],
}

_REFRAMES: list[tuple[str, list[str]]] = [
    ("may i ", ["could i ", "is it possible to ", "i would like to "]),
    ("can i ", ["could i ", "am i able to ", "i want to "]),
    ("can you ", ["could you ", "would you be able to ", "please "]),
    ("i want to ", ["i would like to ", "i need to ", "let me "]),
    ("i need to ", ["i have to ", "i would like to "]),
    ("what is ", ["tell me ", "could you tell me ", "i want to know "]),
    ("how do i ", ["what is the way to ", "help me "]),
]


class BuiltinParaphraser:
    """Deterministic offline paraphraser: frame rewrites plus synonym swaps.

    Output is fully determined by (seed, utterance, n); rank follows
    generation order, mimicking a beam.
    """

    provider_id = "builtin"

    def __init__(self, seed: int = 0):
        self.seed = seed

    def generate(self, utterance: str, n: int) -> list[str]:
        base = normalize_text(utterance)
        trailing = "?" if utterance.rstrip().endswith("?") else ""
        if base.endswith("?"):
            base = base[:-1].strip()
        rng = derive_rng(self.seed, "paraphrase", base)

        frames = [base]
        for prefix, alternatives in _REFRAMES:
            if base.startswith(prefix):
                rest = base[len(prefix):]
                frames.extend(alt + rest for alt in alternatives)
                break

        seen: set[str] = set()
        out: list[str] = []

        def emit(text: str) -> None:
            text = normalize_text(text)
            if text and text != base and text not in seen:
                seen.add(text)
                out.append(text + trailing)

        # First pass: pure reframes; then synonym swaps over each frame.
        for frame in frames[1:]:
            emit(frame)
        for frame in frames:
            words = frame.split()
            swappable = [i for i, w in enumerate(words) if _SYNONYMS.get(w)]
            for i in swappable:
                for alt in _SYNONYMS[words[i]]:
                    emit(" ".join(words[:i] + [alt] + words[i + 1 :]))
            # Double swaps add variety for short utterances.
            if len(swappable) >= 2:
                for _ in range(4):
                    i, j = rng.sample(swappable, 2)
                    words2 = list(words)
                    words2[i] = rng.choice(_SYNONYMS[words[i]])
                    words2[j] = rng.choice(_SYNONYMS[words[j]])
                    emit(" ".join(words2))
        return out[:n]


class RemoteParaphraser:
    """Paraphrase service client.

    Wire contract: POST {utterance, n} -> {"paraphrases": [string]}.
    Fails whole (no partial results) with ProviderUnavailableError.
    """

    def __init__(self, url: str, provider_id: str = "remote", timeout: float = 30.0, retries: int = 1):
        self.url = url
        self.provider_id = provider_id
        self.timeout = timeout
        self.retries = retries

    def generate(self, utterance: str, n: int) -> list[str]:
        last_error: Exception | None = None
        for _ in range(self.retries + 1):
            try:
                response = httpx.post(self.url, json={"utterance": utterance, "n": n}, timeout=self.timeout)
                response.raise_for_status()
                texts = response.json()["paraphrases"]
                return [str(t) for t in texts][:n]
            except Exception as exc:  # noqa: BLE001
                last_error = exc
        raise ProviderUnavailableError(f"paraphrase provider at {self.url} unavailable: {last_error}")


class ProviderRegistry:
    """Named providers; the deterministic builtin is always available."""

    def __init__(self, seed: int = 0):
        self._providers: dict[str, object] = {"builtin": BuiltinParaphraser(seed)}

    def register(self, provider) -> None:
        self._providers[provider.provider_id] = provider

    def get(self, provider_id: str):
        if provider_id not in self._providers:
            raise ProviderUnavailableError(f"no provider registered under '{provider_id}'")
        return self._providers[provider_id]

    def ids(self) -> list[str]:
        return sorted(self._providers)


def paraphrase(provider, utterance: str, n: int) -> list[ParaphraseCandidate]:
    """Top-n candidates from one provider, rank-ordered from 1."""
    if not utterance.strip():
        raise EmptyUtteranceError("cannot paraphrase an empty utterance")
    if n < 1:
        raise ValueError("n must be >= 1")
    texts = provider.generate(utterance, n)
    provider_id = getattr(provider, "provider_id", "unknown")
    return [
        ParaphraseCandidate(source=utterance, text=text, provider=provider_id, rank=i + 1)
        for i, text in enumerate(texts)
    ]


def paraphrase_ensemble(providers: list, utterance: str, n: int) -> list[ParaphraseCandidate]:
    """Concatenate providers then drop exact duplicates (case-folded)."""
    merged: list[ParaphraseCandidate] = []
    seen: set[str] = set()
    for provider in providers:
        for cand in paraphrase(provider, utterance, n):
            key = normalize_text(cand.text)
            if key not in seen:
                seen.add(key)
                merged.append(cand)
    return merged


def score_candidates(candidates: list[ParaphraseCandidate], scorer) -> list[ParaphraseCandidate]:
    """Populate sim (semantic) and fuzz (lexical) in place; returns the list."""
    for cand in candidates:
        cand.sim = scorer(cand.source, cand.text)
        cand.fuzz = fuzz_ratio(normalize_text(cand.source), normalize_text(cand.text))
    return candidates


def filter_candidates(candidates: list[ParaphraseCandidate], cfg: FilterConfig) -> list[ParaphraseCandidate]:
    """Keep semantically-close, lexically-diverse candidates; order preserved.

    Drops sim below sim_low (noisy rewrites), sim above sim_high and fuzz
    above fuzz_max (trivial near-copies).  Idempotent.
    """
    kept: list[ParaphraseCandidate] = []
    for cand in candidates:
        if cand.sim is None or cand.fuzz is None:
            raise ValueError(f"candidate '{cand.text}' not scored yet")
        cand.kept = cfg.sim_low <= cand.sim <= cfg.sim_high and cand.fuzz <= cfg.fuzz_max
        if cand.kept:
            kept.append(cand)
    return kept


def evaluate_paraphraser(pairs: list[tuple[str, str, str]]) -> ParaphraseEvalReport:
    """Quality report over (source, top1, reference) triples.

    target BLEU scores the top-1 candidates against references; self BLEU
    against their own sources (lower = more diverse).
    """
    if not pairs:
        raise LengthMismatchError("no pairs to evaluate")
    sources = [p[0] for p in pairs]
    top1 = [p[1] for p in pairs]
    references = [p[2] for p in pairs]
    target = bleu(top1, references)
    self_ = bleu(top1, sources)
    return ParaphraseEvalReport(target_bleu=target, self_bleu=self_, ibleu=ibleu(target, self_), n_pairs=len(pairs))


def dump_candidates(candidates: list[ParaphraseCandidate]) -> str:
    return "".join(json.dumps(c.to_dict(), ensure_ascii=False) + "\n" for c in candidates)
