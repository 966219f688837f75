"""Universal bot-definition document model, validation, and the adaptor registry.

Every downstream stage (graph building, act-map inference, goal generation,
simulation) consumes the neutral :class:`BotDefinition` built here.  Platform
exports enter through registered adaptors, which are the only place
platform-specific parsing is allowed to live.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

from .errors import AdaptorError, SchemaError, UnknownAdaptorError, ValidationError


class MessageAction(Enum):
    """What a bot message does to the conversation state."""

    COLLECT = "Collect"
    CONFIRM = "Confirm"
    INFORM = "Inform"
    TRANSFER = "Transfer"
    END = "End"
    UNKNOWN = "Unknown"

    @classmethod
    def parse(cls, raw: str) -> "MessageAction":
        # Novel platform constructs degrade to UNKNOWN instead of erroring.
        try:
            return cls(raw)
        except ValueError:
            return cls.UNKNOWN


class EntityValueType(Enum):
    EMAIL = "Email"
    NUMBER = "Number"
    ALPHANUMERIC_ID = "AlphaNumericId"
    DATE = "Date"
    FREE_TEXT = "FreeText"
    ENUMERATED = "Enumerated"


@dataclass
class BotMessage:
    text: str
    action: MessageAction = MessageAction.UNKNOWN
    slot: str | None = None
    entity_type: str | None = None

    def to_dict(self) -> dict:
        out: dict = {"text": self.text, "action": self.action.value}
        if self.slot is not None:
            out["slot"] = self.slot
        if self.entity_type is not None:
            out["entity_type"] = self.entity_type
        return out


@dataclass
class Transition:
    label: str
    target: str

    def to_dict(self) -> dict:
        return {"label": self.label, "target": self.target}


@dataclass
class DialogSpec:
    name: str
    messages: list[BotMessage] = field(default_factory=list)
    transitions: list[Transition] = field(default_factory=list)
    is_intent_root: bool = False
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = dict(self.extras)
        out.update(
            {
                "name": self.name,
                "is_intent_root": self.is_intent_root,
                "messages": [m.to_dict() for m in self.messages],
                "transitions": [t.to_dict() for t in self.transitions],
            }
        )
        return out


@dataclass
class EntitySpec:
    name: str
    value_type: EntityValueType = EntityValueType.FREE_TEXT
    allowed_values: list[str] | None = None

    def to_dict(self) -> dict:
        out: dict = {"name": self.name, "value_type": self.value_type.value}
        if self.allowed_values is not None:
            out["allowed_values"] = list(self.allowed_values)
        return out


@dataclass
class IntentSpec:
    name: str
    utterances: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"name": self.name, "utterances": list(self.utterances)}


@dataclass
class BotDefinition:
    """Platform-neutral bot design.  Treated as immutable once loaded."""

    bot_name: str
    version: str = "1"
    dialogs: list[DialogSpec] = field(default_factory=list)
    entities: list[EntitySpec] = field(default_factory=list)
    intents: list[IntentSpec] = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    def dialog(self, name: str) -> DialogSpec:
        for d in self.dialogs:
            if d.name == name:
                return d
        raise KeyError(name)

    def dialog_names(self) -> list[str]:
        return [d.name for d in self.dialogs]

    def intent_root_dialogs(self) -> list[DialogSpec]:
        return [d for d in self.dialogs if d.is_intent_root]

    def entity(self, name: str) -> EntitySpec | None:
        for e in self.entities:
            if e.name == name:
                return e
        return None

    def to_dict(self) -> dict:
        out = dict(self.extras)
        out.update(
            {
                "bot_name": self.bot_name,
                "version": self.version,
                "dialogs": [d.to_dict() for d in self.dialogs],
                "entities": [e.to_dict() for e in self.entities],
                "intents": [i.to_dict() for i in self.intents],
            }
        )
        return out


@dataclass
class Finding:
    severity: str  # "error" | "warning"
    path: str
    message: str

    def to_dict(self) -> dict:
        return {"severity": self.severity, "path": self.path, "message": self.message}


@dataclass
class ValidationReport:
    findings: list[Finding] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not any(f.severity == "error" for f in self.findings)

    def errors(self) -> list[Finding]:
        return [f for f in self.findings if f.severity == "error"]

    def to_dict(self) -> dict:
        return {"ok": self.ok, "findings": [f.to_dict() for f in self.findings]}


# --- document parsing ------------------------------------------------------

_KNOWN_DIALOG_KEYS = {"name", "is_intent_root", "messages", "transitions"}
_KNOWN_TOP_KEYS = {"bot_name", "version", "dialogs", "entities", "intents"}


def _require(obj: dict, key: str, path: str):
    if key not in obj:
        raise SchemaError(f"missing required key '{key}'", path)
    return obj[key]


def _as_str(value, path: str) -> str:
    if not isinstance(value, str):
        raise SchemaError(f"expected string, got {type(value).__name__}", path)
    return value


def _as_list(value, path: str) -> list:
    if not isinstance(value, list):
        raise SchemaError(f"expected list, got {type(value).__name__}", path)
    return value


def _as_dict(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise SchemaError(f"expected object, got {type(value).__name__}", path)
    return value


def _parse_message(obj, path: str) -> BotMessage:
    obj = _as_dict(obj, path)
    text = _as_str(_require(obj, "text", path), f"{path}.text")
    action = MessageAction.parse(_as_str(obj.get("action", "Unknown"), f"{path}.action"))
    slot = obj.get("slot")
    entity_type = obj.get("entity_type")
    if slot is not None:
        slot = _as_str(slot, f"{path}.slot")
    if entity_type is not None:
        entity_type = _as_str(entity_type, f"{path}.entity_type")
    return BotMessage(text=text, action=action, slot=slot, entity_type=entity_type)


def _parse_dialog(obj, path: str) -> DialogSpec:
    obj = _as_dict(obj, path)
    name = _as_str(_require(obj, "name", path), f"{path}.name")
    messages = [
        _parse_message(m, f"{path}.messages[{i}]")
        for i, m in enumerate(_as_list(obj.get("messages", []), f"{path}.messages"))
    ]
    transitions = []
    for i, t in enumerate(_as_list(obj.get("transitions", []), f"{path}.transitions")):
        t = _as_dict(t, f"{path}.transitions[{i}]")
        transitions.append(
            Transition(
                label=_as_str(t.get("label", ""), f"{path}.transitions[{i}].label"),
                target=_as_str(_require(t, "target", f"{path}.transitions[{i}]"), f"{path}.transitions[{i}].target"),
            )
        )
    extras = {k: v for k, v in obj.items() if k not in _KNOWN_DIALOG_KEYS}
    return DialogSpec(
        name=name,
        messages=messages,
        transitions=transitions,
        is_intent_root=bool(obj.get("is_intent_root", False)),
        extras=extras,
    )


def _parse_entity(obj, path: str) -> EntitySpec:
    obj = _as_dict(obj, path)
    name = _as_str(_require(obj, "name", path), f"{path}.name")
    raw_type = _as_str(obj.get("value_type", "FreeText"), f"{path}.value_type")
    try:
        value_type = EntityValueType(raw_type)
    except ValueError:
        raise SchemaError(f"unknown value_type '{raw_type}'", f"{path}.value_type")
    allowed = obj.get("allowed_values")
    if allowed is not None:
        allowed = [_as_str(v, f"{path}.allowed_values[{i}]") for i, v in enumerate(_as_list(allowed, f"{path}.allowed_values"))]
    return EntitySpec(name=name, value_type=value_type, allowed_values=allowed)


def definition_from_dict(doc: dict) -> BotDefinition:
    """Build a BotDefinition from a parsed document, without validating invariants."""
    doc = _as_dict(doc, "$")
    dialogs = [
        _parse_dialog(d, f"dialogs[{i}]")
        for i, d in enumerate(_as_list(doc.get("dialogs", []), "dialogs"))
    ]
    entities = [
        _parse_entity(e, f"entities[{i}]")
        for i, e in enumerate(_as_list(doc.get("entities", []), "entities"))
    ]
    intents = []
    for i, it in enumerate(_as_list(doc.get("intents", []), "intents")):
        it = _as_dict(it, f"intents[{i}]")
        intents.append(
            IntentSpec(
                name=_as_str(_require(it, "name", f"intents[{i}]"), f"intents[{i}].name"),
                utterances=[
                    _as_str(u, f"intents[{i}].utterances[{j}]")
                    for j, u in enumerate(_as_list(it.get("utterances", []), f"intents[{i}].utterances"))
                ],
            )
        )
    extras = {k: v for k, v in doc.items() if k not in _KNOWN_TOP_KEYS}
    return BotDefinition(
        bot_name=_as_str(doc.get("bot_name", "bot"), "bot_name"),
        version=str(doc.get("version", "1")),
        dialogs=dialogs,
        entities=entities,
        intents=intents,
        extras=extras,
    )


def validate_definition(definition: BotDefinition) -> ValidationReport:
    """Check every structural invariant; findings are data, never raised."""
    findings: list[Finding] = []
    names = definition.dialog_names()
    name_set = set(names)

    seen: set[str] = set()
    for i, name in enumerate(names):
        if name in seen:
            findings.append(Finding("error", f"dialogs[{i}].name", f"duplicate dialog name '{name}'"))
        seen.add(name)

    entity_names = {e.name for e in definition.entities}
    for i, dialog in enumerate(definition.dialogs):
        dpath = f"dialogs[{i}]"
        if dialog.is_intent_root and not dialog.messages:
            findings.append(Finding("error", f"{dpath}.messages", f"intent-root dialog '{dialog.name}' has no messages"))
        targets: set[str] = set()
        for j, tr in enumerate(dialog.transitions):
            tpath = f"{dpath}.transitions[{j}]"
            if tr.target not in name_set:
                findings.append(Finding("error", f"{tpath}.target", f"transition targets unknown dialog '{tr.target}'"))
            if tr.target in targets:
                findings.append(Finding("error", f"{tpath}.target", f"duplicate transition target '{tr.target}'"))
            targets.add(tr.target)
        for j, msg in enumerate(dialog.messages):
            mpath = f"{dpath}.messages[{j}]"
            if msg.action is MessageAction.COLLECT and (msg.slot is None or msg.entity_type is None):
                findings.append(Finding("error", mpath, "Collect message requires both slot and entity_type"))
            if msg.entity_type is not None and msg.entity_type not in entity_names:
                findings.append(Finding("error", f"{mpath}.entity_type", f"references unknown entity '{msg.entity_type}'"))

    for i, entity in enumerate(definition.entities):
        if entity.value_type is EntityValueType.ENUMERATED and not entity.allowed_values:
            findings.append(Finding("error", f"entities[{i}]", f"Enumerated entity '{entity.name}' needs allowed_values"))

    terminals = [d.name for d in definition.dialogs if not d.transitions]
    if not terminals:
        findings.append(Finding("error", "dialogs", "no terminal dialog (every dialog has outgoing transitions)"))

    intent_seen: set[str] = set()
    for i, intent in enumerate(definition.intents):
        if intent.name in intent_seen:
            findings.append(Finding("error", f"intents[{i}].name", f"duplicate intent name '{intent.name}'"))
        intent_seen.add(intent.name)
        if not intent.utterances:
            findings.append(Finding("warning", f"intents[{i}].utterances", f"intent '{intent.name}' has no training utterances"))

    return ValidationReport(findings)


def load_bot_definition(document: str | bytes) -> BotDefinition:
    """Parse and validate a native bot-definition document.

    Raises SchemaError for malformed documents (with a field path or line
    number) and ValidationError when an invariant is broken.
    """
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc.msg}", f"line {exc.lineno}") from exc
    definition = definition_from_dict(doc)
    report = validate_definition(definition)
    if not report.ok:
        first = report.errors()[0]
        raise ValidationError(f"{first.path}: {first.message}", report.findings)
    return definition


def dump_bot_definition(definition: BotDefinition) -> str:
    return json.dumps(definition.to_dict(), indent=2, ensure_ascii=False) + "\n"


# --- adaptor registry ------------------------------------------------------

Adaptor = Callable[[bytes], BotDefinition]

_REGISTRY: dict[str, Adaptor] = {}


def register_adaptor(adaptor_id: str, adaptor: Adaptor) -> None:
    """Register a platform converter.  Written once at startup, read-only after."""
    _REGISTRY[adaptor_id] = adaptor


def registered_adaptors() -> list[str]:
    return sorted(_REGISTRY)


def convert(adaptor_id: str, raw: bytes) -> BotDefinition:
    """Convert a platform export to a validated BotDefinition."""
    if adaptor_id not in _REGISTRY:
        raise UnknownAdaptorError(f"no adaptor registered under '{adaptor_id}'")
    try:
        definition = _REGISTRY[adaptor_id](raw)
    except (SchemaError, ValidationError):
        raise
    except Exception as exc:
        raise AdaptorError(f"adaptor '{adaptor_id}' failed: {exc}") from exc
    report = validate_definition(definition)
    if not report.ok:
        first = report.errors()[0]
        raise ValidationError(f"{first.path}: {first.message}", report.findings)
    return definition


def _native_adaptor(raw: bytes) -> BotDefinition:
    return load_bot_definition(raw)


def _csv_flow_adaptor(raw: bytes) -> BotDefinition:
    """Minimal flow-table format: one row per message.

    Columns: dialog, intent_root, text, action, slot, entity_type, transitions.
    ``transitions`` is a ``label>target`` list separated by ``;`` and may appear
    on any row of the dialog.  Entities are auto-declared from the
    entity_type column (typed by name when it matches a known value type).
    """
    reader = csv.DictReader(io.StringIO(raw.decode("utf-8")))
    dialogs: dict[str, DialogSpec] = {}
    entity_names: list[str] = []
    for row in reader:
        name = (row.get("dialog") or "").strip()
        if not name:
            raise SchemaError("row without a dialog name", f"row {reader.line_num}")
        dialog = dialogs.setdefault(
            name,
            DialogSpec(name=name, is_intent_root=(row.get("intent_root", "").strip().lower() in {"1", "true", "yes"})),
        )
        text = (row.get("text") or "").strip()
        if text:
            slot = (row.get("slot") or "").strip() or None
            entity_type = (row.get("entity_type") or "").strip() or None
            dialog.messages.append(
                BotMessage(
                    text=text,
                    action=MessageAction.parse((row.get("action") or "Unknown").strip() or "Unknown"),
                    slot=slot,
                    entity_type=entity_type,
                )
            )
            if entity_type and entity_type not in entity_names:
                entity_names.append(entity_type)
        for part in (row.get("transitions") or "").split(";"):
            part = part.strip()
            if not part:
                continue
            label, _, target = part.partition(">")
            if not target:
                raise SchemaError(f"transition '{part}' is not label>target", f"row {reader.line_num}")
            if target.strip() not in {t.target for t in dialog.transitions}:
                dialog.transitions.append(Transition(label=label.strip(), target=target.strip()))
    known_types = {t.value for t in EntityValueType}
    entities = [
        EntitySpec(name=n, value_type=EntityValueType(n) if n in known_types else EntityValueType.FREE_TEXT)
        for n in entity_names
    ]
    return BotDefinition(
        bot_name="csv-flow-bot",
        version="1",
        dialogs=list(dialogs.values()),
        entities=entities,
        intents=[IntentSpec(name=d.name) for d in dialogs.values() if d.is_intent_root],
    )


register_adaptor("native", _native_adaptor)
register_adaptor("csv-flow", _csv_flow_adaptor)
