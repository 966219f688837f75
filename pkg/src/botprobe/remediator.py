"""Turn simulated episodes into health reports and remediation suggestions.

Intent metrics treat the goal's dialog as the true label and the simulator's
routing verdict as the prediction; confidence intervals come from a
percentile bootstrap over resampled (true, pred) pairs.  Misrouted paraphrase
queries are grouped by their original utterance, and each group is distilled
into an advisory action: move the utterance to the intent its paraphrases
actually land on, augment training with the queries the bot called
out-of-domain, or flag for manual review.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .actmaps import REQUEST_PREFIX
from .botdef import BotDefinition
from .errors import (
    EmptySessionError,
    LengthMismatchError,
    MissingProvenanceError,
    UnknownLabelError,
    UnknownSuggestionError,
)
from .simulator import Episode, Outcome, backtrack_root_cause

OOD_LABEL = "none"


@dataclass
class ConfusionMatrix:
    labels: list[str]
    counts: list[list[int]]

    def __post_init__(self):
        if len(self.counts) != len(self.labels) or any(len(row) != len(self.labels) for row in self.counts):
            raise ValueError("confusion matrix must be square in the label count")

    def at(self, true_label: str, pred_label: str) -> int:
        return self.counts[self.labels.index(true_label)][self.labels.index(pred_label)]

    def row_sum(self, true_label: str) -> int:
        return sum(self.counts[self.labels.index(true_label)])

    def to_dict(self) -> dict:
        return {"labels": list(self.labels), "counts": [list(r) for r in self.counts]}

    @classmethod
    def from_dict(cls, doc: dict) -> "ConfusionMatrix":
        return cls(labels=list(doc["labels"]), counts=[list(r) for r in doc["counts"]])


@dataclass
class IntentMetrics:
    precision: float
    recall: float
    f1: float
    ci_low: float
    ci_high: float
    support: int

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "support": self.support,
        }


@dataclass
class SessionReport:
    session_id: str
    counts: dict[str, int]
    goal_success_rate: float
    intent_metrics: dict[str, IntentMetrics]
    ner_error_counts: dict[str, int]
    confusion: ConfusionMatrix
    generated_at: str | None = None

    @property
    def macro_f1(self) -> float:
        if not self.intent_metrics:
            return 0.0
        return sum(m.f1 for m in self.intent_metrics.values()) / len(self.intent_metrics)

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "counts": dict(self.counts),
            "goal_success_rate": self.goal_success_rate,
            "intent_metrics": {k: m.to_dict() for k, m in self.intent_metrics.items()},
            "ner_error_counts": dict(self.ner_error_counts),
            "confusion": self.confusion.to_dict(),
            "generated_at": self.generated_at,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SessionReport":
        return cls(
            session_id=doc["session_id"],
            counts=dict(doc.get("counts", {})),
            goal_success_rate=float(doc["goal_success_rate"]),
            intent_metrics={k: IntentMetrics(**m) for k, m in doc.get("intent_metrics", {}).items()},
            ner_error_counts=dict(doc.get("ner_error_counts", {})),
            confusion=ConfusionMatrix.from_dict(doc["confusion"]),
            generated_at=doc.get("generated_at"),
        )


def predicted_label(episode: Episode) -> str:
    """The routing verdict: the misroute target on intent errors, else the goal dialog."""
    if episode.outcome is Outcome.INTENT_ERROR:
        return episode.intent_predicted or OOD_LABEL
    return episode.goal_name


def confusion_matrix(true_labels: list[str], pred_labels: list[str], labels: list[str]) -> ConfusionMatrix:
    if len(true_labels) != len(pred_labels):
        raise LengthMismatchError(f"{len(true_labels)} true vs {len(pred_labels)} predicted labels")
    index = {label: i for i, label in enumerate(labels)}
    counts = [[0] * len(labels) for _ in labels]
    for true, pred in zip(true_labels, pred_labels):
        if true not in index:
            raise UnknownLabelError(f"true label '{true}' not in label set")
        if pred not in index:
            raise UnknownLabelError(f"predicted label '{pred}' not in label set")
        counts[index[true]][index[pred]] += 1
    return ConfusionMatrix(labels=list(labels), counts=counts)


def _prf(true_labels: list[str], pred_labels: list[str], label: str) -> tuple[float, float, float]:
    tp = sum(1 for t, p in zip(true_labels, pred_labels) if t == label and p == label)
    fp = sum(1 for t, p in zip(true_labels, pred_labels) if t != label and p == label)
    fn = sum(1 for t, p in zip(true_labels, pred_labels) if t == label and p != label)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    # 2tp/(2tp+fp+fn) is the harmonic mean with one rounding step instead of three
    f1 = 2 * tp / (2 * tp + fp + fn) if tp + fp + fn else 0.0
    return precision, recall, f1


def bootstrap_f1_ci(
    true_labels: list[str],
    pred_labels: list[str],
    n_resamples: int = 10_000,
    alpha: float = 0.05,
    seed: int = 0,
) -> dict[str, tuple[float, float, float]]:
    """Per-intent (f1, ci_low, ci_high) from a percentile bootstrap.

    (true, pred) pairs are resampled with replacement n_resamples times;
    resamples where an intent's F1 is undefined (no support or no positive
    prediction) count as 0, keeping the resample count fixed.  Deterministic
    given the seed.
    """
    if len(true_labels) != len(pred_labels):
        raise LengthMismatchError(f"{len(true_labels)} true vs {len(pred_labels)} predicted labels")
    if not true_labels:
        raise LengthMismatchError("empty label lists")
    labels = sorted(set(true_labels))
    encoding = {label: i for i, label in enumerate(sorted(set(true_labels) | set(pred_labels)))}
    true_arr = np.array([encoding[t] for t in true_labels], dtype=np.int32)
    pred_arr = np.array([encoding[p] for p in pred_labels], dtype=np.int32)
    n = len(true_arr)
    rng = np.random.default_rng(seed)

    f1_samples: dict[str, list[np.ndarray]] = {label: [] for label in labels}
    chunk = 2048
    remaining = n_resamples
    while remaining > 0:
        size = min(chunk, remaining)
        remaining -= size
        idx = rng.integers(0, n, size=(size, n))
        resampled_true = true_arr[idx]
        resampled_pred = pred_arr[idx]
        for label in labels:
            code = encoding[label]
            true_hits = resampled_true == code
            pred_hits = resampled_pred == code
            tp = (true_hits & pred_hits).sum(axis=1).astype(np.float64)
            denom = pred_hits.sum(axis=1) + true_hits.sum(axis=1)  # 2tp + fp + fn
            f1 = np.divide(2 * tp, denom, out=np.zeros_like(tp), where=denom > 0)
            f1_samples[label].append(f1)

    out: dict[str, tuple[float, float, float]] = {}
    for label in labels:
        _, _, point = _prf(true_labels, pred_labels, label)
        samples = np.concatenate(f1_samples[label])
        low, high = np.percentile(samples, [100 * alpha / 2, 100 * (1 - alpha / 2)])
        out[label] = (point, float(low), float(high))
    return out


def aggregate_metrics(episodes: list[Episode], session_meta: dict | None = None) -> SessionReport:
    """Recount a session into its health report; equals a brute-force recount.

    session_meta may carry session_id, seed, n_resamples, alpha, generated_at.
    """
    if not episodes:
        raise EmptySessionError("cannot aggregate an empty session")
    meta = dict(session_meta or {})

    true_labels = [e.goal_name for e in episodes]
    pred_labels = [predicted_label(e) for e in episodes]
    intents = sorted(set(true_labels))
    successes = sum(1 for e in episodes if e.outcome is Outcome.SUCCESS)

    ci = bootstrap_f1_ci(
        true_labels,
        pred_labels,
        n_resamples=int(meta.get("n_resamples", 10_000)),
        alpha=float(meta.get("alpha", 0.05)),
        seed=int(meta.get("seed", 0)),
    )
    intent_metrics: dict[str, IntentMetrics] = {}
    for intent in intents:
        precision, recall, f1 = _prf(true_labels, pred_labels, intent)
        _, low, high = ci[intent]
        intent_metrics[intent] = IntentMetrics(
            precision=precision,
            recall=recall,
            f1=f1,
            ci_low=low,
            ci_high=high,
            support=sum(1 for t in true_labels if t == intent),
        )

    ner_error_counts: dict[str, int] = {}
    for episode in episodes:
        if episode.outcome is Outcome.SUCCESS:
            continue
        cause = backtrack_root_cause(episode)
        if cause.kind == "entity_rejected" and cause.slot:
            ner_error_counts[cause.slot] = ner_error_counts.get(cause.slot, 0) + 1

    seen_slots = set(ner_error_counts)
    for episode in episodes:
        for turn in episode.turns:
            if turn.matched_act.startswith(REQUEST_PREFIX):
                seen_slots.add(turn.matched_act[len(REQUEST_PREFIX):])

    labels = intents + sorted(set(pred_labels) - set(intents) - {OOD_LABEL}) + [OOD_LABEL]
    confusion = confusion_matrix(true_labels, pred_labels, labels)

    return SessionReport(
        session_id=str(meta.get("session_id", "session")),
        counts={"episodes": len(episodes), "intents": len(intents), "entities": len(seen_slots)},
        goal_success_rate=successes / len(episodes),
        intent_metrics=intent_metrics,
        ner_error_counts=dict(sorted(ner_error_counts.items())),
        confusion=confusion,
        generated_at=meta.get("generated_at"),
    )


# --- error grouping and suggestions --------------------------------------------


@dataclass
class ErrorGroup:
    original_utterance: str
    true_intent: str
    members: list[dict] = field(default_factory=list)  # {paraphrase, predicted_intent, episode_id}

    @property
    def size(self) -> int:
        return len(self.members)

    def to_dict(self) -> dict:
        return {
            "original_utterance": self.original_utterance,
            "true_intent": self.true_intent,
            "members": [dict(m) for m in self.members],
            "size": self.size,
        }


def group_intent_errors(episodes: list[Episode], provenance: dict[str, str]) -> list[ErrorGroup]:
    """Group misrouted intent queries by their original utterance.

    ``provenance`` maps each paraphrased query to its original utterance
    (identity entries for queries used verbatim).  Sorted by size descending,
    ties by utterance.
    """
    groups: dict[str, ErrorGroup] = {}
    for episode in episodes:
        if episode.outcome is not Outcome.INTENT_ERROR:
            continue
        query = episode.intent_query
        if query not in provenance:
            raise MissingProvenanceError(f"no original utterance recorded for query '{query}'")
        original = provenance[query]
        group = groups.setdefault(original, ErrorGroup(original_utterance=original, true_intent=episode.goal_name))
        group.members.append(
            {
                "paraphrase": query,
                "predicted_intent": episode.intent_predicted or OOD_LABEL,
                "episode_id": episode.goal_id,
            }
        )
    return sorted(groups.values(), key=lambda g: (-g.size, g.original_utterance))


class SuggestionKind(str, Enum):
    AUGMENT_TRAINING = "AugmentTraining"
    MOVE_INTENT = "MoveIntent"
    REVIEW = "Review"


@dataclass
class RemediationConfig:
    move_threshold: float = 0.8
    ood_label: str = OOD_LABEL

    def __post_init__(self):
        if not (0.0 < self.move_threshold <= 1.0):
            raise ValueError("move_threshold must be in (0, 1]")


@dataclass
class RemediationSuggestion:
    id: str
    kind: SuggestionKind
    target_utterance: str
    true_intent: str
    evidence: ErrorGroup
    proposed_intent: str | None = None
    queries: list[str] = field(default_factory=list)
    rationale: str = ""

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind.value,
            "target_utterance": self.target_utterance,
            "true_intent": self.true_intent,
            "evidence": self.evidence.to_dict(),
            "proposed_intent": self.proposed_intent,
            "queries": list(self.queries),
            "rationale": self.rationale,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "RemediationSuggestion":
        evidence = doc.get("evidence", {})
        group = ErrorGroup(
            original_utterance=evidence.get("original_utterance", doc["target_utterance"]),
            true_intent=evidence.get("true_intent", doc.get("true_intent", "")),
            members=[dict(m) for m in evidence.get("members", [])],
        )
        return cls(
            id=doc["id"],
            kind=SuggestionKind(doc["kind"]),
            target_utterance=doc["target_utterance"],
            true_intent=doc.get("true_intent", ""),
            evidence=group,
            proposed_intent=doc.get("proposed_intent"),
            queries=list(doc.get("queries", [])),
            rationale=doc.get("rationale", ""),
        )


def _suggestion_id(kind: SuggestionKind, target: str) -> str:
    digest = hashlib.sha256(f"{kind.value}:{target}".encode("utf-8")).hexdigest()[:10]
    return f"sg-{digest}"


def suggest_remediations(
    groups: list[ErrorGroup],
    total_paraphrases_per_original: dict[str, int],
    cfg: RemediationConfig | None = None,
) -> list[RemediationSuggestion]:
    """Advisory follow-up actions, one per error group.

    If at least move_threshold of an utterance's paraphrases land on one
    single other intent, the utterance itself is probably mislabeled: suggest
    moving it there.  Otherwise queries the bot deemed out-of-domain become
    training-set augmentation candidates; anything else is left for review.
    """
    cfg = cfg or RemediationConfig()
    suggestions: list[RemediationSuggestion] = []
    for group in groups:
        total = total_paraphrases_per_original.get(group.original_utterance, group.size)
        by_intent: dict[str, int] = {}
        for member in group.members:
            predicted = member["predicted_intent"]
            if predicted != cfg.ood_label:
                by_intent[predicted] = by_intent.get(predicted, 0) + 1
        move_target = None
        if by_intent and total > 0:
            top_intent = max(sorted(by_intent), key=lambda k: by_intent[k])
            if by_intent[top_intent] / total >= cfg.move_threshold:
                move_target = top_intent
        if move_target is not None:
            suggestions.append(
                RemediationSuggestion(
                    id=_suggestion_id(SuggestionKind.MOVE_INTENT, group.original_utterance),
                    kind=SuggestionKind.MOVE_INTENT,
                    target_utterance=group.original_utterance,
                    true_intent=group.true_intent,
                    evidence=group,
                    proposed_intent=move_target,
                    rationale=(
                        f"{by_intent[move_target]}/{total} paraphrases of this utterance were routed to "
                        f"'{move_target}'; the utterance itself likely belongs there."
                    ),
                )
            )
            continue
        ood_queries = [m["paraphrase"] for m in group.members if m["predicted_intent"] == cfg.ood_label]
        if ood_queries:
            suggestions.append(
                RemediationSuggestion(
                    id=_suggestion_id(SuggestionKind.AUGMENT_TRAINING, group.original_utterance),
                    kind=SuggestionKind.AUGMENT_TRAINING,
                    target_utterance=group.original_utterance,
                    true_intent=group.true_intent,
                    evidence=group,
                    queries=ood_queries,
                    rationale=(
                        f"{len(ood_queries)} paraphrases fell out of domain; adding them to the "
                        f"'{group.true_intent}' training set teaches the model this phrasing."
                    ),
                )
            )
            continue
        suggestions.append(
            RemediationSuggestion(
                id=_suggestion_id(SuggestionKind.REVIEW, group.original_utterance),
                kind=SuggestionKind.REVIEW,
                target_utterance=group.original_utterance,
                true_intent=group.true_intent,
                evidence=group,
                rationale="Predictions scatter across intents; needs human judgment.",
            )
        )
    return suggestions


def export_augmented_training(
    definition: BotDefinition,
    suggestions: list[RemediationSuggestion],
    acceptances: list[dict],
) -> dict:
    """Apply accepted suggestions to the intent training sets.

    ``acceptances`` entries are {"id": suggestion-id, "queries": [subset]?};
    omitting queries accepts every query the suggestion listed.  Returns
    {"intents": {intent: [utterances]}, "counts": {intent: n}}.
    """
    by_id = {s.id: s for s in suggestions}
    training: dict[str, list[str]] = {i.name: list(i.utterances) for i in definition.intents}

    for acceptance in acceptances:
        suggestion = by_id.get(acceptance.get("id", ""))
        if suggestion is None:
            raise UnknownSuggestionError(f"no suggestion with id '{acceptance.get('id')}'")
        if suggestion.kind is SuggestionKind.MOVE_INTENT and suggestion.proposed_intent:
            source = training.setdefault(suggestion.true_intent, [])
            target = training.setdefault(suggestion.proposed_intent, [])
            if suggestion.target_utterance in source:
                source.remove(suggestion.target_utterance)
            if suggestion.target_utterance not in target:
                target.append(suggestion.target_utterance)
        elif suggestion.kind is SuggestionKind.AUGMENT_TRAINING:
            selected = acceptance.get("queries")
            queries = [q for q in suggestion.queries if selected is None or q in set(selected)]
            bucket = training.setdefault(suggestion.true_intent, [])
            for query in queries:
                if query not in bucket:
                    bucket.append(query)

    return {
        "intents": training,
        "counts": {intent: len(utterances) for intent, utterances in training.items()},
    }


def compare_sessions(reports: list[SessionReport]) -> dict:
    """Time-ordered success-rate and macro-F1 series with per-session deltas."""
    if not reports:
        raise EmptySessionError("need at least one report to build a trend")
    indexed = list(enumerate(reports))
    indexed.sort(key=lambda pair: (pair[1].generated_at is None, pair[1].generated_at or "", pair[0]))
    series = []
    previous: SessionReport | None = None
    for _, report in indexed:
        entry = {
            "session_id": report.session_id,
            "generated_at": report.generated_at,
            "goal_success_rate": report.goal_success_rate,
            "macro_f1": report.macro_f1,
            "delta_success_rate": None if previous is None else report.goal_success_rate - previous.goal_success_rate,
            "delta_macro_f1": None if previous is None else report.macro_f1 - previous.macro_f1,
        }
        series.append(entry)
        previous = report
    return {"sessions": series}


def dump_report(report: SessionReport) -> str:
    return json.dumps(report.to_dict(), indent=2, ensure_ascii=False) + "\n"


def load_report(document: str) -> SessionReport:
    return SessionReport.from_dict(json.loads(document))


def dump_suggestions(suggestions: list[RemediationSuggestion]) -> str:
    return json.dumps([s.to_dict() for s in suggestions], indent=2, ensure_ascii=False) + "\n"


def load_suggestions(document: str) -> list[RemediationSuggestion]:
    return [RemediationSuggestion.from_dict(d) for d in json.loads(document)]
