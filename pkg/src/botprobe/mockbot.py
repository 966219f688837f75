"""Deterministic in-process bot connector scripted from a BotDefinition.

The mock walks the definition's flows message by message: informational
messages stream out in batches, Collect messages wait for a user value
(extracted with an entity-type pattern), Confirm messages wait for an
affirmation, and exhausted dialogs follow their transitions down to a
terminal.  A FaultProfile injects calibrated errors: intent confusion rows
misroute queries, ner_miss probabilities reject collected values (the bot
re-asks), extra reprompts re-ask even on success.

Ground truth for unseen paraphrases comes through the test-only ``bind_goal``
side channel: the bound goal reveals which intent its queries belong to and,
for multi-intent goals, which transition to take at a fork.  A real platform
connector has no such channel — the mock needs it precisely because it must
know the truth to inject errors at known rates.
"""
from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass, field

from .botdef import BotDefinition, BotMessage, DialogSpec, EntityValueType, MessageAction
from .connectors import BotReply
from .errors import ProfileInvalidError, SessionClosedError
from .goals import Goal
from .seeding import derive_rng
from .textmetrics import normalize_text

FALLBACK_TEXT = "Sorry, I didn't understand that. Could you rephrase?"
CONTINUATION_PROMPT = "Is there anything else I can help you with today?"
OOD_LABEL = "none"

_AFFIRM = re.compile(r"\b(yes|yeah|yep|correct|right|sure|ok|okay)\b", re.IGNORECASE)

_PATTERNS: dict[EntityValueType, re.Pattern] = {
    EntityValueType.EMAIL: re.compile(r"[A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,}"),
    EntityValueType.NUMBER: re.compile(r"\d+"),
    EntityValueType.ALPHANUMERIC_ID: re.compile(r"\b[A-Za-z]+\d{3,}[A-Za-z0-9]*\b"),
    EntityValueType.DATE: re.compile(r"\d{4}-\d{2}-\d{2}"),
}


@dataclass
class FaultProfile:
    """Injectable error rates; rows of intent_confusion must sum to 1."""

    intent_confusion: dict[str, dict[str, float]] = field(default_factory=dict)
    ner_miss_prob: dict[str, float] = field(default_factory=dict)
    extra_reprompt_prob: float = 0.0
    seed: int = 0

    @classmethod
    def zero_fault(cls, seed: int = 0) -> "FaultProfile":
        return cls(seed=seed)

    def validate(self, definition: BotDefinition | None = None) -> None:
        valid_targets = None
        if definition is not None:
            valid_targets = set(definition.dialog_names()) | {OOD_LABEL}
        for true_intent, row in self.intent_confusion.items():
            total = sum(row.values())
            if abs(total - 1.0) > 1e-9:
                raise ProfileInvalidError(f"confusion row for '{true_intent}' sums to {total}, not 1")
            for predicted, prob in row.items():
                if not (0.0 <= prob <= 1.0):
                    raise ProfileInvalidError(f"confusion({true_intent}->{predicted}) = {prob} outside [0, 1]")
                if valid_targets is not None and predicted not in valid_targets:
                    raise ProfileInvalidError(f"confusion row for '{true_intent}' predicts unknown dialog '{predicted}'")
        for slot, prob in self.ner_miss_prob.items():
            if not (0.0 <= prob <= 1.0):
                raise ProfileInvalidError(f"ner_miss_prob[{slot}] = {prob} outside [0, 1]")
        if not (0.0 <= self.extra_reprompt_prob <= 1.0):
            raise ProfileInvalidError(f"extra_reprompt_prob = {self.extra_reprompt_prob} outside [0, 1]")

    def to_dict(self) -> dict:
        return {
            "intent_confusion": {k: dict(v) for k, v in self.intent_confusion.items()},
            "ner_miss_prob": dict(self.ner_miss_prob),
            "extra_reprompt_prob": self.extra_reprompt_prob,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "FaultProfile":
        return cls(
            intent_confusion={k: dict(v) for k, v in doc.get("intent_confusion", {}).items()},
            ner_miss_prob=dict(doc.get("ner_miss_prob", {})),
            extra_reprompt_prob=float(doc.get("extra_reprompt_prob", 0.0)),
            seed=int(doc.get("seed", 0)),
        )

    @classmethod
    def load(cls, document: str) -> "FaultProfile":
        return cls.from_dict(json.loads(document))


@dataclass
class _MockSession:
    rng: object
    current: DialogSpec | None = None
    entry_name: str | None = None
    msg_index: int = 0
    pending_collect: BotMessage | None = None
    awaiting_confirm: BotMessage | None = None
    paused_for_intent: bool = False
    done: bool = False
    collected: dict[str, str] = field(default_factory=dict)
    closed: bool = False


class MockBotConnector:
    """Connector test double; behavior fully determined by (definition, profile, seed)."""

    def __init__(self, definition: BotDefinition, profile: FaultProfile | None = None, seed: int = 0):
        profile = profile or FaultProfile.zero_fault()
        profile.validate(definition)
        self.definition = definition
        self.profile = profile
        self.seed = seed
        self._goal: Goal | None = None
        self._query_intents: dict[str, str] = {}
        self._sessions: dict[str, _MockSession] = {}
        self._ids = itertools.count(1)
        self._utterance_intents = {
            normalize_text(u): intent.name
            for intent in definition.intents
            for u in intent.utterances
        }

    # Test-only side channel: reveals ground truth for paraphrased queries and
    # gives path goals their transition guidance.
    def bind_goal(self, goal: Goal) -> None:
        self._goal = goal
        self._query_intents = {}
        queries = goal.intent_queries()
        if goal.path:
            intent_nodes = [n for n in goal.path if self._is_intent_root(n)]
            for query, node in zip(queries, intent_nodes):
                self._query_intents[normalize_text(query)] = node
        elif queries:
            self._query_intents[normalize_text(queries[0])] = goal.goal_name

    def _is_intent_root(self, name: str) -> bool:
        try:
            return self.definition.dialog(name).is_intent_root
        except KeyError:
            return False

    def start_session(self) -> str:
        session_id = f"mock-{next(self._ids)}"
        self._sessions[session_id] = _MockSession(rng=derive_rng(self.profile.seed, self.seed, session_id))
        return session_id

    def close(self, session: str) -> None:
        if session in self._sessions:
            self._sessions[session].closed = True

    def send(self, session: str, user_text: str) -> list[BotReply]:
        sess = self._sessions.get(session)
        if sess is None or sess.closed:
            raise SessionClosedError(f"session '{session}' is not open")
        if sess.current is None or sess.paused_for_intent:
            return self._route(sess, user_text)
        if sess.pending_collect is not None:
            return self._receive_value(sess, user_text)
        if sess.awaiting_confirm is not None:
            if _AFFIRM.search(user_text):
                sess.awaiting_confirm = None
                return self._advance(sess)
            return [BotReply(text=sess.awaiting_confirm.text)]
        if sess.done:
            return [BotReply(text=CONTINUATION_PROMPT)]
        return self._advance(sess)

    # -- intent routing --------------------------------------------------

    def _resolve_true_intent(self, user_text: str) -> str:
        norm = normalize_text(user_text)
        if norm in self._utterance_intents:
            return self._utterance_intents[norm]
        if norm in self._query_intents:
            return self._query_intents[norm]
        return OOD_LABEL

    def _sample_predicted(self, sess: _MockSession, true_intent: str) -> str:
        row = self.profile.intent_confusion.get(true_intent)
        if not row:
            return true_intent
        roll = sess.rng.random()
        cumulative = 0.0
        items = sorted(row.items())
        for predicted, prob in items:
            cumulative += prob
            if roll < cumulative:
                return predicted
        return items[-1][0]

    def _route(self, sess: _MockSession, user_text: str) -> list[BotReply]:
        true_intent = self._resolve_true_intent(user_text)
        if true_intent == OOD_LABEL:
            return [BotReply(text=FALLBACK_TEXT, dialog=OOD_LABEL)]
        predicted = self._sample_predicted(sess, true_intent)
        if predicted == OOD_LABEL:
            return [BotReply(text=FALLBACK_TEXT, dialog=OOD_LABEL)]
        try:
            dialog = self.definition.dialog(predicted)
        except KeyError:
            return [BotReply(text=FALLBACK_TEXT, dialog=OOD_LABEL)]
        sess.current = dialog
        sess.msg_index = 0
        sess.paused_for_intent = False
        if sess.entry_name is None:
            sess.entry_name = predicted
        return self._advance(sess)

    # -- flow walking ----------------------------------------------------

    def _next_dialog_name(self, sess: _MockSession) -> str | None:
        dialog = sess.current
        if dialog is None or not dialog.transitions:
            return None
        if self._goal is not None and self._goal.path and dialog.name in self._goal.path:
            position = self._goal.path.index(dialog.name)
            if position + 1 < len(self._goal.path):
                wanted = self._goal.path[position + 1]
                if any(t.target == wanted for t in dialog.transitions):
                    return wanted
        return dialog.transitions[0].target

    def _advance(self, sess: _MockSession) -> list[BotReply]:
        out: list[BotReply] = []
        for _ in range(len(self.definition.dialogs) * 2 + 4):  # walk guard against malformed flows
            dialog = sess.current
            if dialog is None:
                break
            messages = dialog.messages
            while sess.msg_index < len(messages):
                message = messages[sess.msg_index]
                sess.msg_index += 1
                if message.action is MessageAction.COLLECT and message.slot:
                    if message.slot in sess.collected:
                        continue  # session slot memory: never re-ask a filled slot
                    sess.pending_collect = message
                    out.append(BotReply(text=message.text, dialog=dialog.name))
                    return out
                if message.action is MessageAction.CONFIRM:
                    sess.awaiting_confirm = message
                    out.append(BotReply(text=message.text, dialog=dialog.name))
                    return out
                out.append(BotReply(text=message.text, dialog=dialog.name))
            next_name = self._next_dialog_name(sess)
            if next_name is None:
                sess.done = True
                return out
            next_dialog = self.definition.dialog(next_name)
            sess.current = next_dialog
            sess.msg_index = 0
            if next_dialog.is_intent_root and next_name != sess.entry_name:
                # Mega-agent fork: a fresh intent needs a fresh user query.
                sess.paused_for_intent = True
                out.append(BotReply(text=CONTINUATION_PROMPT, dialog=next_name))
                return out
        sess.done = True
        return out

    def _receive_value(self, sess: _MockSession, user_text: str) -> list[BotReply]:
        message = sess.pending_collect
        assert message is not None and message.slot
        value = self._extract(message, user_text)
        reask = value is None
        if not reask and sess.rng.random() < self.profile.ner_miss_prob.get(message.slot, 0.0):
            reask = True
        if not reask and sess.rng.random() < self.profile.extra_reprompt_prob:
            reask = True
        if reask:
            return [BotReply(text=message.text, dialog=sess.current.name if sess.current else None)]
        sess.collected[message.slot] = value
        sess.pending_collect = None
        return self._advance(sess)

    def _extract(self, message: BotMessage, user_text: str) -> str | None:
        entity = self.definition.entity(message.entity_type or "")
        value_type = entity.value_type if entity else EntityValueType.FREE_TEXT
        if value_type is EntityValueType.ENUMERATED and entity and entity.allowed_values:
            lowered = user_text.lower()
            for allowed in entity.allowed_values:
                if allowed.lower() in lowered:
                    return allowed
            return None
        pattern = _PATTERNS.get(value_type)
        if pattern is None:
            text = user_text.strip()
            return text or None
        found = pattern.search(user_text)
        return found.group(0) if found else None


def new_mock_bot(definition: BotDefinition, profile: FaultProfile | None = None, seed: int = 0) -> MockBotConnector:
    """Build a mock connector; raises ProfileInvalidError on bad profiles."""
    return MockBotConnector(definition, profile, seed)


def mock_connector_factory(definition: BotDefinition, profile: FaultProfile | None = None, seed: int = 0):
    """Per-goal connector factory for run_session; one independent mock per episode."""

    def factory(goal: Goal) -> MockBotConnector:
        return MockBotConnector(definition, profile, seed=f"{seed}:{goal.id}")

    return factory
