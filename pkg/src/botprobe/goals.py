"""Ontology and simulation-goal generation.

A goal is the contract for one simulated conversation: the intent query to
open with, the entity values the user will supply when asked, and the outcome
the user expects.  Entity values are synthetic by construction (never real
user data); an overlay file can swap in real values when testing NER against
production-like inputs.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from .actmaps import DialogActMap, REQUEST_PREFIX
from .botdef import BotDefinition, EntitySpec, EntityValueType
from .errors import MissingOntologyValueError, NeedsReviewError, UnknownNodeError
from .graph import ConversationGraph, Path
from .seeding import derive_rng

INTENT_SLOT = "Intent"
UNFULFILLED = "UNK"

_FIRST_NAMES = [
    "alex", "sam", "jordan", "taylor", "casey", "robin", "jamie", "morgan",
    "riley", "avery", "quinn", "hayden", "dana", "reese", "skyler", "drew",
]
_MAIL_HOSTS = ["ms-mail.com", "example.org", "fastpost.net", "mailbox.io", "inbox.dev"]
_FREE_TEXT_WORDS = [
    "sample", "placeholder", "synthetic", "test", "demo", "generated",
    "fixture", "probe", "mock", "trial",
]


@dataclass
class Ontology:
    """Candidate value pools per slot, plus the seed they were grown from."""

    values: dict[str, list[str]] = field(default_factory=dict)
    seed: int = 0
    synthetic: set[str] = field(default_factory=set)

    def pool(self, slot: str) -> list[str]:
        pool = self.values.get(slot)
        if not pool:
            raise MissingOntologyValueError(f"no ontology values for slot '{slot}'")
        return pool

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "values": {k: list(v) for k, v in self.values.items()},
            "synthetic": sorted(self.synthetic),
        }


@dataclass
class Goal:
    """One simulation target, mirroring the goals-file layout."""

    id: str
    goal_name: str
    inform_slots: dict[str, str] = field(default_factory=dict)
    request_slots: dict[str, str] = field(default_factory=dict)
    path: list[str] | None = None
    source_utterance: str | None = None

    def __post_init__(self):
        if INTENT_SLOT not in self.inform_slots:
            raise ValueError("goal inform_slots must carry the special 'Intent' slot")

    @property
    def intent_query(self) -> str:
        return self.inform_slots[INTENT_SLOT]

    def intent_queries(self) -> list[str]:
        """All intent queries in declaration order (Intent, Intent_2, ...)."""
        return [v for k, v in self.inform_slots.items() if k == INTENT_SLOT or k.startswith(INTENT_SLOT + "_")]

    def entity_slots(self) -> dict[str, str]:
        """inform_slots minus the intent queries."""
        return {
            k: v
            for k, v in self.inform_slots.items()
            if k != INTENT_SLOT and not k.startswith(INTENT_SLOT + "_")
        }

    def to_dict(self) -> dict:
        out: dict = {
            "goal": self.goal_name,
            "inform_slots": dict(self.inform_slots),
            "request_slots": dict(self.request_slots),
        }
        if self.path is not None:
            out["path"] = list(self.path)
        if self.source_utterance is not None:
            out["source_utterance"] = self.source_utterance
        return out

    @classmethod
    def from_dict(cls, goal_id: str, doc: dict) -> "Goal":
        return cls(
            id=goal_id,
            goal_name=doc["goal"],
            inform_slots=dict(doc.get("inform_slots", {})),
            request_slots=dict(doc.get("request_slots", {})),
            path=list(doc["path"]) if doc.get("path") is not None else None,
            source_utterance=doc.get("source_utterance"),
        )


def _synthesize_value(entity: EntitySpec, rng) -> str:
    kind = entity.value_type
    if kind is EntityValueType.EMAIL:
        name = rng.choice(_FIRST_NAMES)
        return f"{name}{rng.randrange(10, 1000)}@{rng.choice(_MAIL_HOSTS)}"
    if kind is EntityValueType.NUMBER:
        return str(rng.randrange(1, 1_000_000))
    if kind is EntityValueType.ALPHANUMERIC_ID:
        letter = rng.choice("ABCDEFGHJKLMNPQRSTUVWXYZ")
        return f"{letter}{rng.randrange(100000, 1000000)}"
    if kind is EntityValueType.DATE:
        year = rng.randrange(2020, 2030)
        month = rng.randrange(1, 13)
        day = rng.randrange(1, 29)
        return f"{year:04d}-{month:02d}-{day:02d}"
    if kind is EntityValueType.ENUMERATED:
        return rng.choice(entity.allowed_values or ["unset"])
    return " ".join(rng.choice(_FREE_TEXT_WORDS) for _ in range(2))


def generate_ontology(definition: BotDefinition, seed: int = 0, pool_size: int = 50) -> Ontology:
    """Grow per-slot value pools from each slot's entity type; deterministic in seed.

    Pools are keyed by slot name (what goals consume).  Entities reachable
    only through the catalog still get a pool under their own name so overlay
    files can address either.
    """
    ontology = Ontology(seed=seed)

    def grow(key: str, entity: EntitySpec) -> None:
        if key in ontology.values:
            return
        rng = derive_rng(seed, "ontology", key)
        pool: list[str] = []
        seen: set[str] = set()
        while len(pool) < pool_size:
            value = _synthesize_value(entity, rng)
            if value not in seen:
                pool.append(value)
                seen.add(value)
            elif entity.value_type is EntityValueType.ENUMERATED and len(seen) == len(set(entity.allowed_values or [])):
                break  # enumerations can be smaller than the pool size
        ontology.values[key] = pool
        ontology.synthetic.add(key)

    for entity in definition.entities:
        grow(entity.name, entity)
    for dialog in definition.dialogs:
        for message in dialog.messages:
            if message.slot and message.entity_type:
                entity = definition.entity(message.entity_type)
                if entity is not None:
                    grow(message.slot, entity)
    return ontology


def apply_overlay(ontology: Ontology, overlay: dict[str, list[str]], definition: BotDefinition | None = None) -> Ontology:
    """Replace synthetic pools with user-supplied values.

    Overlay keys may be slot names or entity names; an entity-name key
    replaces the pools of all slots typed with that entity when a definition
    is given.
    """
    updated = Ontology(values={k: list(v) for k, v in ontology.values.items()}, seed=ontology.seed, synthetic=set(ontology.synthetic))
    for key, values in overlay.items():
        targets = [key]
        if definition is not None and definition.entity(key) is not None:
            targets.extend(
                message.slot
                for dialog in definition.dialogs
                for message in dialog.messages
                if message.slot and message.entity_type == key
            )
        for target in targets:
            updated.values[target] = list(values)
            updated.synthetic.discard(target)
    return updated


def _request_slots_of(act_map: DialogActMap) -> list[str]:
    return [act[len(REQUEST_PREFIX):] for act in act_map.acts if act.startswith(REQUEST_PREFIX)]


def generate_goals(
    global_map: DialogActMap,
    ontology: Ontology,
    intent_queries: list[str],
    per_query: int = 1,
    force: bool = False,
    provenance: dict[str, str] | None = None,
) -> list[Goal]:
    """One goal per (intent query, copy): inform every slot the dialog may request.

    Refuses to run while the map still has acts awaiting review, unless forced.
    ``provenance`` maps paraphrased queries back to their original utterance
    for later error grouping.
    """
    if global_map.needs_review and not force:
        raise NeedsReviewError({global_map.dialog: list(global_map.needs_review)})
    slots = _request_slots_of(global_map)
    goals: list[Goal] = []
    index = 0
    for query in intent_queries:
        for _ in range(per_query):
            rng = derive_rng(ontology.seed, "goal", index)
            inform = {slot: rng.choice(ontology.pool(slot)) for slot in slots}
            inform[INTENT_SLOT] = query
            goals.append(
                Goal(
                    id=f"{global_map.dialog}_{index}",
                    goal_name=global_map.dialog,
                    inform_slots=inform,
                    request_slots={global_map.dialog: UNFULFILLED},
                    source_utterance=(provenance or {}).get(query),
                )
            )
            index += 1
    return goals


def generate_path_goals(
    graph: ConversationGraph,
    local_maps: dict[str, DialogActMap],
    path: Path,
    ontology: Ontology,
    intent_queries_per_node: dict[str, str],
    goal_id: str | None = None,
) -> Goal:
    """One multi-intent goal covering every dialog along a traversal path.

    inform_slots union the request slots of all path nodes; each node with an
    entry in ``intent_queries_per_node`` contributes an intent query, keyed
    Intent, Intent_2, Intent_3... in node order.  Keys are laid out in
    per-node segments (each segment's intent query first, then the slots that
    node introduces) so the agenda can be rebuilt segment by segment.
    """
    for node in path.nodes:
        if node not in graph.nodes:
            raise UnknownNodeError(f"path node '{node}' not in graph")
    rng = derive_rng(ontology.seed, "path-goal", *path.nodes)
    ordered: dict[str, str] = {}
    seen_slots: set[str] = set()
    intent_count = 0
    goal_name = None
    for node in path.nodes:
        if node in intent_queries_per_node:
            intent_count += 1
            key = INTENT_SLOT if intent_count == 1 else f"{INTENT_SLOT}_{intent_count}"
            ordered[key] = intent_queries_per_node[node]
            if goal_name is None:
                goal_name = node
        node_map = local_maps.get(node)
        if node_map is None:
            continue
        for slot in _request_slots_of(node_map):
            if slot not in seen_slots:
                seen_slots.add(slot)
                ordered[slot] = rng.choice(ontology.pool(slot))
    if goal_name is None:
        raise ValueError("path has no intent-bearing node with a query")
    return Goal(
        id=goal_id or f"{goal_name}_path_{'_'.join(path.nodes)}",
        goal_name=goal_name,
        inform_slots=ordered,
        request_slots={goal_name: UNFULFILLED},
        path=list(path.nodes),
    )


def dump_goals(goals: list[Goal]) -> str:
    return json.dumps({g.id: g.to_dict() for g in goals}, indent=2, ensure_ascii=False) + "\n"


def load_goals(document: str) -> list[Goal]:
    doc = json.loads(document)
    return [Goal.from_dict(goal_id, entry) for goal_id, entry in doc.items()]
