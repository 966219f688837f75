"""Dialog-act map inference.

Local maps label each bot message with a dialog act derived from its
action/slot pair ("rule-action-message" heuristic).  Global maps then fold in
the local maps of every dialog reachable on a simple path to a terminal
dialog, so a routing ("mega") dialog knows every act it may encounter
downstream.  The two success acts are inferred heuristically and flagged for
mandatory human review before simulation.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from .botdef import BotDefinition, BotMessage, MessageAction
from .errors import NoMessagesError, UnknownActError
from .graph import ConversationGraph, build_graph, nodes_on_terminal_paths

REQUEST_PREFIX = "request_"
CONFIRM_PREFIX = "confirm_"
INFORM_PREFIX = "inform_"
UNKNOWN_PREFIX = "unknown_"
ACT_TRANSFER = "transfer"
ACT_END = "end"
INTENT_SUCCESS = "intent_success_message"
DIALOG_SUCCESS = "dialog_success_message"
ACT_NO_MATCH = "no_match"


@dataclass
class DialogActMap:
    """Per-dialog mapping from dialog-act names to bot message variants.

    Published maps are treated as immutable; revisions go through
    :func:`apply_revision`, which returns a fresh copy.
    """

    dialog: str
    acts: dict[str, list[str]] = field(default_factory=dict)
    needs_review: list[str] = field(default_factory=list)

    def add_variant(self, act: str, text: str) -> None:
        variants = self.acts.setdefault(act, [])
        if text not in variants:
            variants.append(text)

    def copy(self) -> "DialogActMap":
        return DialogActMap(
            dialog=self.dialog,
            acts={act: list(v) for act, v in self.acts.items()},
            needs_review=list(self.needs_review),
        )

    def to_dict(self) -> dict:
        return {
            "dialog": self.dialog,
            "acts": {act: list(v) for act, v in self.acts.items()},
            "needs_review": list(self.needs_review),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "DialogActMap":
        return cls(
            dialog=doc["dialog"],
            acts={act: list(v) for act, v in doc.get("acts", {}).items()},
            needs_review=list(doc.get("needs_review", [])),
        )

    def content_version(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:12]


@dataclass
class Revision:
    """One human edit to a dialog-act map; appended to an audit log."""

    dialog: str
    act: str
    add_variants: list[str] = field(default_factory=list)
    remove_variants: list[str] = field(default_factory=list)
    author: str = ""
    timestamp: str = ""

    def __post_init__(self):
        if not self.add_variants and not self.remove_variants:
            raise ValueError("revision must add or remove at least one variant")

    def to_dict(self) -> dict:
        return {
            "dialog": self.dialog,
            "act": self.act,
            "add_variants": list(self.add_variants),
            "remove_variants": list(self.remove_variants),
            "author": self.author,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Revision":
        return cls(
            dialog=doc["dialog"],
            act=doc["act"],
            add_variants=list(doc.get("add_variants", [])),
            remove_variants=list(doc.get("remove_variants", [])),
            author=doc.get("author", ""),
            timestamp=doc.get("timestamp", ""),
        )


def infer_local_dialog_act(message: BotMessage, unknown_ordinal: int = 1) -> str:
    """Map one bot message to its dialog-act name.

    Collect/Confirm/Inform messages carry their slot in the act name
    (``request_Email`` asks for the Email slot).  Messages without actionable
    semantics (unknown actions, slotless Confirm/Inform) become numbered
    ``unknown_<n>`` acts so every message stays matchable.
    """
    action = message.action
    if action is MessageAction.COLLECT and message.slot:
        return REQUEST_PREFIX + message.slot
    if action is MessageAction.CONFIRM and message.slot:
        return CONFIRM_PREFIX + message.slot
    if action is MessageAction.INFORM and message.slot:
        return INFORM_PREFIX + message.slot
    if action is MessageAction.TRANSFER:
        return ACT_TRANSFER
    if action is MessageAction.END:
        return ACT_END
    return f"{UNKNOWN_PREFIX}{unknown_ordinal}"


def build_local_maps(definition: BotDefinition) -> dict[str, DialogActMap]:
    """Infer the local act map of every dialog; variant order follows message order."""
    maps: dict[str, DialogActMap] = {}
    for dialog in definition.dialogs:
        act_map = DialogActMap(dialog=dialog.name)
        unknown_ordinal = 1
        for message in dialog.messages:
            act = infer_local_dialog_act(message, unknown_ordinal)
            if act.startswith(UNKNOWN_PREFIX):
                unknown_ordinal += 1
            act_map.add_variant(act, message.text)
        maps[dialog.name] = act_map
    return maps


def _merge(target: DialogActMap, source: DialogActMap) -> None:
    for act, variants in source.acts.items():
        for text in variants:
            target.add_variant(act, text)


def build_global_maps(
    local_maps: dict[str, DialogActMap],
    graph: ConversationGraph,
) -> dict[str, DialogActMap]:
    """Fold downstream local maps into each dialog's global map.

    For dialog ``d`` the contributing set is ``d`` plus every dialog on some
    simple path from ``d`` to a terminal dialog.  Variant lists merge
    de-duplicated in a canonical order: ``d`` itself first, then the remaining
    contributors sorted by name, each in message order.
    """
    global_maps: dict[str, DialogActMap] = {}
    for name in local_maps:
        contributors = nodes_on_terminal_paths(graph, name) if name in graph.nodes else {name}
        merged = DialogActMap(dialog=name)
        _merge(merged, local_maps[name])
        for other in sorted(contributors - {name}):
            if other in local_maps:
                _merge(merged, local_maps[other])
        global_maps[name] = merged
    return global_maps


def infer_success_messages(
    definition: BotDefinition,
    graph: ConversationGraph,
    dialog_name: str,
) -> tuple[str, str]:
    """Heuristic golden labels for an intent-root dialog.

    intent_success_message is the dialog's first message (the bot says it as
    soon as the intent routes correctly).  dialog_success_message is the last
    message of the terminal dialog the flow drains into; with several
    reachable terminals the lexicographically-first one that has messages is
    used, which is exactly why both labels ship flagged for review.
    """
    dialog = definition.dialog(dialog_name)
    if not dialog.messages:
        raise NoMessagesError(f"dialog '{dialog_name}' has no messages to label")
    intent_success = dialog.messages[0].text

    terminals = sorted(nodes_on_terminal_paths(graph, dialog_name) & graph.terminals)
    dialog_success = None
    for terminal in terminals:
        messages = definition.dialog(terminal).messages
        if messages:
            dialog_success = messages[-1].text
            break
    if dialog_success is None:
        # No reachable terminal carries messages; fall back to the dialog's own
        # last message (covers self-terminal dialogs).
        dialog_success = dialog.messages[-1].text
    return intent_success, dialog_success


def build_act_maps(
    definition: BotDefinition,
    graph: ConversationGraph | None = None,
) -> dict[str, DialogActMap]:
    """Full inference pipeline: local maps, global folding, success labels.

    Success labels are inserted for every intent-root dialog and flagged
    ``needs_review``; simulation refuses to start until a human clears them
    (or forces past the gate).
    """
    graph = graph or build_graph(definition)
    local = build_local_maps(definition)
    global_maps = build_global_maps(local, graph)
    for dialog in definition.intent_root_dialogs():
        act_map = global_maps[dialog.name]
        intent_success, dialog_success = infer_success_messages(definition, graph, dialog.name)
        act_map.add_variant(INTENT_SUCCESS, intent_success)
        act_map.add_variant(DIALOG_SUCCESS, dialog_success)
        act_map.needs_review = [INTENT_SUCCESS, DIALOG_SUCCESS]
    return global_maps


def apply_revision(act_map: DialogActMap, revision: Revision) -> DialogActMap:
    """Apply one revision copy-on-write; clears needs_review for the touched act.

    Removing the last remaining variant deletes the act.  Removing from an
    act that does not exist raises UnknownActError.
    """
    if revision.dialog != act_map.dialog:
        raise UnknownActError(f"revision targets dialog '{revision.dialog}', map is for '{act_map.dialog}'")
    revised = act_map.copy()
    if revision.remove_variants and revision.act not in revised.acts:
        raise UnknownActError(f"cannot remove variants from unknown act '{revision.act}'")
    for text in revision.add_variants:
        revised.add_variant(revision.act, text)
    if revision.remove_variants:
        variants = [v for v in revised.acts[revision.act] if v not in set(revision.remove_variants)]
        if variants:
            revised.acts[revision.act] = variants
        else:
            del revised.acts[revision.act]
    revised.needs_review = [a for a in revised.needs_review if a != revision.act]
    return revised


def confirm_reviewed(act_map: DialogActMap, acts: list[str] | None = None) -> DialogActMap:
    """Reviewer sign-off without edits: clear needs_review flags copy-on-write."""
    confirmed = act_map.copy()
    if acts is None:
        confirmed.needs_review = []
    else:
        confirmed.needs_review = [a for a in confirmed.needs_review if a not in set(acts)]
    return confirmed


def pending_review(maps: dict[str, DialogActMap]) -> dict[str, list[str]]:
    """Dialog -> acts still awaiting review, for gating and error messages."""
    return {name: list(m.needs_review) for name, m in maps.items() if m.needs_review}


def dump_maps(maps: dict[str, DialogActMap]) -> str:
    return json.dumps({name: m.to_dict() for name, m in maps.items()}, indent=2, ensure_ascii=False) + "\n"


def load_maps(document: str) -> dict[str, DialogActMap]:
    doc = json.loads(document)
    return {name: DialogActMap.from_dict(entry) for name, entry in doc.items()}


def append_audit(path, revision: Revision) -> None:
    """Append one revision record to the line-delimited audit log."""
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(revision.to_dict(), ensure_ascii=False) + "\n")
