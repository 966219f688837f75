"""File-backed persistence for bots, maps, goals, sessions, and reports.

Storage is a directory tree of JSON documents indexed by a single manifest
file.  Every write goes through an atomic rename, so readers only ever see
fully-written versions and a crash can at worst lose the in-flight write.
Dialog-act maps are content-addressed: each revision produces a new version
id, and revising against a stale base fails with VersionConflictError.
"""
from __future__ import annotations

import hashlib
import json
import os
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path

from .actmaps import DialogActMap, Revision, append_audit, apply_revision
from .botdef import BotDefinition, definition_from_dict, validate_definition
from .errors import NotFoundError, ValidationError, VersionConflictError
from .goals import Goal, dump_goals, load_goals
from .remediator import RemediationSuggestion, SessionReport, dump_suggestions, load_suggestions


class SessionStatus(str, Enum):
    DRAFT = "Draft"
    NEEDS_REVIEW = "NeedsReview"
    RUNNING = "Running"
    DONE = "Done"
    FAILED = "Failed"


_ALLOWED_TRANSITIONS = {
    SessionStatus.DRAFT: {SessionStatus.NEEDS_REVIEW},
    SessionStatus.NEEDS_REVIEW: {SessionStatus.RUNNING},
    SessionStatus.RUNNING: {SessionStatus.DONE, SessionStatus.FAILED},
    SessionStatus.DONE: set(),
    SessionStatus.FAILED: set(),
}


@dataclass
class SessionRecord:
    id: str
    bot_id: str
    created_at: str
    status: SessionStatus = SessionStatus.DRAFT
    config: dict = field(default_factory=dict)
    goals_id: str | None = None
    connector: str = "mock"
    artifacts: dict = field(default_factory=dict)  # goals/transcripts/report/suggestions paths
    failure_reason: str | None = None

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "bot_id": self.bot_id,
            "created_at": self.created_at,
            "status": self.status.value,
            "config": dict(self.config),
            "goals_id": self.goals_id,
            "connector": self.connector,
            "artifacts": dict(self.artifacts),
            "failure_reason": self.failure_reason,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SessionRecord":
        return cls(
            id=doc["id"],
            bot_id=doc["bot_id"],
            created_at=doc["created_at"],
            status=SessionStatus(doc.get("status", "Draft")),
            config=dict(doc.get("config", {})),
            goals_id=doc.get("goals_id"),
            connector=doc.get("connector", "mock"),
            artifacts=dict(doc.get("artifacts", {})),
            failure_reason=doc.get("failure_reason"),
        )


def _now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


def _atomic_write(path: Path, data: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(data, encoding="utf-8")
    os.replace(tmp, path)


def _content_id(prefix: str, payload: str) -> str:
    return f"{prefix}-{hashlib.sha256(payload.encode('utf-8')).hexdigest()[:10]}"


class Store:
    """Single-writer-per-entity persistence rooted at a directory.

    Opening a store recovers from crashes: any session left Running is marked
    Failed with reason "interrupted".
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        for sub in ("bots", "maps", "goals", "sessions", "audit"):
            (self.root / sub).mkdir(parents=True, exist_ok=True)
        self._lock = threading.RLock()
        self._manifest_path = self.root / "manifest.json"
        if self._manifest_path.exists():
            self._manifest = json.loads(self._manifest_path.read_text(encoding="utf-8"))
        else:
            self._manifest = {"bots": {}, "goals": {}, "sessions": {}, "map_heads": {}}
            self._flush_manifest()
        self._recover()

    def _flush_manifest(self) -> None:
        _atomic_write(self._manifest_path, json.dumps(self._manifest, indent=2, ensure_ascii=False) + "\n")

    def _recover(self) -> None:
        with self._lock:
            dirty = False
            for session_id in list(self._manifest["sessions"]):
                record = self.load_session(session_id)
                if record.status is SessionStatus.RUNNING:
                    record.status = SessionStatus.FAILED
                    record.failure_reason = "interrupted"
                    self._write_session(record)
                    dirty = True
            if dirty:
                self._flush_manifest()

    # -- bots -------------------------------------------------------------

    def save_bot(self, definition: BotDefinition, bot_id: str | None = None) -> str:
        report = validate_definition(definition)
        if not report.ok:
            first = report.errors()[0]
            raise ValidationError(f"{first.path}: {first.message}", report.findings)
        payload = json.dumps(definition.to_dict(), indent=2, ensure_ascii=False, sort_keys=True)
        bot_id = bot_id or _content_id("bot", payload)
        with self._lock:
            _atomic_write(self.root / "bots" / f"{bot_id}.json", payload + "\n")
            self._manifest["bots"][bot_id] = {"created_at": _now(), "bot_name": definition.bot_name}
            self._flush_manifest()
        return bot_id

    def load_bot(self, bot_id: str) -> BotDefinition:
        path = self.root / "bots" / f"{bot_id}.json"
        if not path.exists():
            raise NotFoundError(f"bot '{bot_id}' not found")
        return definition_from_dict(json.loads(path.read_text(encoding="utf-8")))

    def list_bots(self) -> list[dict]:
        with self._lock:
            entries = [{"id": k, **v} for k, v in self._manifest["bots"].items()]
        return sorted(entries, key=lambda e: e["created_at"], reverse=True)

    # -- dialog-act maps (content-addressed versions) -----------------------

    def save_maps(self, bot_id: str, maps: dict[str, DialogActMap]) -> str:
        doc = {name: m.to_dict() for name, m in maps.items()}
        payload = json.dumps(doc, indent=2, ensure_ascii=False, sort_keys=True)
        version = _content_id("maps", payload)
        with self._lock:
            directory = self.root / "maps" / bot_id
            directory.mkdir(parents=True, exist_ok=True)
            _atomic_write(directory / f"{version}.json", payload + "\n")
            self._manifest["map_heads"][bot_id] = version
            self._flush_manifest()
        return version

    def map_head(self, bot_id: str) -> str:
        head = self._manifest["map_heads"].get(bot_id)
        if head is None:
            raise NotFoundError(f"no dialog-act maps stored for bot '{bot_id}'")
        return head

    def load_maps(self, bot_id: str, version: str | None = None) -> tuple[str, dict[str, DialogActMap]]:
        version = version or self.map_head(bot_id)
        path = self.root / "maps" / bot_id / f"{version}.json"
        if not path.exists():
            raise NotFoundError(f"maps version '{version}' not found for bot '{bot_id}'")
        doc = json.loads(path.read_text(encoding="utf-8"))
        return version, {name: DialogActMap.from_dict(entry) for name, entry in doc.items()}

    def revise_maps(self, bot_id: str, base_version: str, revision: Revision) -> str:
        """Apply one revision against the head; stale bases conflict."""
        with self._lock:
            head = self.map_head(bot_id)
            if base_version != head:
                raise VersionConflictError(
                    f"revision based on '{base_version}' but head is '{head}'"
                )
            _, maps = self.load_maps(bot_id, head)
            if revision.dialog not in maps:
                raise NotFoundError(f"dialog '{revision.dialog}' has no map")
            if not revision.timestamp:
                revision.timestamp = _now()
            maps[revision.dialog] = apply_revision(maps[revision.dialog], revision)
            append_audit(self.root / "audit" / f"{bot_id}.jsonl", revision)
            return self.save_maps(bot_id, maps)

    # -- goals ------------------------------------------------------------

    def save_goals(self, bot_id: str, goals: list[Goal], goals_id: str | None = None) -> str:
        payload = dump_goals(goals)
        goals_id = goals_id or _content_id("goals", payload)
        with self._lock:
            _atomic_write(self.root / "goals" / f"{goals_id}.json", payload)
            self._manifest["goals"][goals_id] = {"created_at": _now(), "bot_id": bot_id, "count": len(goals)}
            self._flush_manifest()
        return goals_id

    def load_goals(self, goals_id: str) -> list[Goal]:
        path = self.root / "goals" / f"{goals_id}.json"
        if not path.exists():
            raise NotFoundError(f"goals '{goals_id}' not found")
        return load_goals(path.read_text(encoding="utf-8"))

    # -- sessions -----------------------------------------------------------

    def _session_dir(self, session_id: str) -> Path:
        return self.root / "sessions" / session_id

    def _write_session(self, record: SessionRecord) -> None:
        directory = self._session_dir(record.id)
        directory.mkdir(parents=True, exist_ok=True)
        _atomic_write(directory / "record.json", json.dumps(record.to_dict(), indent=2, ensure_ascii=False) + "\n")

    def create_session(self, bot_id: str, goals_id: str, config: dict, connector: str = "mock") -> SessionRecord:
        if bot_id not in self._manifest["bots"]:
            raise NotFoundError(f"bot '{bot_id}' not found")
        if goals_id not in self._manifest["goals"]:
            raise NotFoundError(f"goals '{goals_id}' not found")
        record = SessionRecord(
            id=f"sess-{uuid.uuid4().hex[:10]}",
            bot_id=bot_id,
            created_at=_now(),
            status=SessionStatus.DRAFT,
            config=dict(config),
            goals_id=goals_id,
            connector=connector,
        )
        with self._lock:
            self._write_session(record)
            self._manifest["sessions"][record.id] = {"created_at": record.created_at, "bot_id": bot_id}
            self._flush_manifest()
        return record

    def load_session(self, session_id: str) -> SessionRecord:
        path = self._session_dir(session_id) / "record.json"
        if not path.exists():
            raise NotFoundError(f"session '{session_id}' not found")
        return SessionRecord.from_dict(json.loads(path.read_text(encoding="utf-8")))

    def list_sessions(self, bot_id: str | None = None) -> list[SessionRecord]:
        with self._lock:
            ids = [
                session_id
                for session_id, meta in self._manifest["sessions"].items()
                if bot_id is None or meta.get("bot_id") == bot_id
            ]
        records = [self.load_session(session_id) for session_id in ids]
        return sorted(records, key=lambda r: r.created_at, reverse=True)

    def transition_session(self, session_id: str, status: SessionStatus, failure_reason: str | None = None) -> SessionRecord:
        with self._lock:
            record = self.load_session(session_id)
            if status not in _ALLOWED_TRANSITIONS[record.status]:
                raise ValidationError(f"cannot move session from {record.status.value} to {status.value}")
            record.status = status
            record.failure_reason = failure_reason
            self._write_session(record)
            return record

    def attach_artifact(self, session_id: str, kind: str, content: str) -> Path:
        """Persist a session artifact (transcripts, report, suggestions)."""
        with self._lock:
            record = self.load_session(session_id)
            path = self._session_dir(session_id) / f"{kind}.json"
            if kind == "transcripts":
                path = self._session_dir(session_id) / "transcripts.jsonl"
            _atomic_write(path, content)
            record.artifacts[kind] = str(path.relative_to(self.root))
            self._write_session(record)
            return path

    def artifact_path(self, session_id: str, kind: str) -> Path:
        record = self.load_session(session_id)
        if kind not in record.artifacts:
            raise NotFoundError(f"session '{session_id}' has no '{kind}' artifact")
        return self.root / record.artifacts[kind]

    def load_report(self, session_id: str) -> SessionReport:
        path = self.artifact_path(session_id, "report")
        return SessionReport.from_dict(json.loads(path.read_text(encoding="utf-8")))

    def save_suggestions(self, session_id: str, suggestions: list[RemediationSuggestion]) -> None:
        self.attach_artifact(session_id, "suggestions", dump_suggestions(suggestions))

    def load_session_suggestions(self, session_id: str) -> list[RemediationSuggestion]:
        path = self.artifact_path(session_id, "suggestions")
        return load_suggestions(path.read_text(encoding="utf-8"))

    def record_acceptance(self, session_id: str, acceptance: dict) -> list[dict]:
        """Append one suggestion acceptance; returns all acceptances so far."""
        with self._lock:
            path = self._session_dir(session_id) / "acceptances.json"
            existing = json.loads(path.read_text(encoding="utf-8")) if path.exists() else []
            existing.append(acceptance)
            _atomic_write(path, json.dumps(existing, indent=2, ensure_ascii=False) + "\n")
            record = self.load_session(session_id)
            record.artifacts["acceptances"] = str(path.relative_to(self.root))
            self._write_session(record)
            return existing

    def list_acceptances(self, session_id: str) -> list[dict]:
        path = self._session_dir(session_id) / "acceptances.json"
        if not path.exists():
            return []
        return json.loads(path.read_text(encoding="utf-8"))
