"""Agenda-driven user simulation.

Each episode plays one goal against a bot connector: bot messages are mapped
to dialog acts by fuzzy matching against the dialog-act map, a rule table
decides the user act (informing requested slots, affirming confirmations,
re-stating on no-match), and the two golden-label acts decide the outcome —
intent_success_message marks correct routing, dialog_success_message marks a
completed conversation.  Everything is deterministic given the config seed.
"""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

from .actmaps import (
    ACT_END,
    ACT_NO_MATCH,
    ACT_TRANSFER,
    CONFIRM_PREFIX,
    DIALOG_SUCCESS,
    INFORM_PREFIX,
    INTENT_SUCCESS,
    REQUEST_PREFIX,
    UNKNOWN_PREFIX,
    DialogActMap,
    pending_review,
)
from .connectors import BotReply, Connector
from .errors import ConnectorError, NeedsReviewError, RuleMissingError
from .goals import Goal, INTENT_SLOT
from .nlg import NLGTemplates, render_nlg
from .seeding import derive_rng
from .textmetrics import fuzz_ratio, normalize_text


class Outcome(str, Enum):
    SUCCESS = "Success"
    INTENT_ERROR = "IntentError"
    NER_ERROR = "NERError"
    OTHER_ERROR = "OtherError"
    TIMEOUT = "Timeout"


@dataclass
class SimConfig:
    fuzzy_threshold: int = 85
    max_turns: int = 30
    parallelism: int = 1
    seed: int = 0
    repeat_request_limit: int = 2
    no_match_limit: int = 3
    force: bool = False

    def __post_init__(self):
        if not (0 <= self.fuzzy_threshold <= 100):
            raise ValueError("fuzzy_threshold must be in [0, 100]")
        if self.max_turns < 2:
            raise ValueError("max_turns must be >= 2")

    def to_dict(self) -> dict:
        return {
            "fuzzy_threshold": self.fuzzy_threshold,
            "max_turns": self.max_turns,
            "parallelism": self.parallelism,
            "seed": self.seed,
            "repeat_request_limit": self.repeat_request_limit,
            "no_match_limit": self.no_match_limit,
            "force": self.force,
        }


# --- agenda -------------------------------------------------------------------

ACT_INFORM_INTENT = "inform_intent"
ACT_EXPECT_SUCCESS = "expect_dialog_success"


@dataclass
class UserAct:
    act: str
    slot: str | None = None
    value: str | None = None

    def describe(self) -> str:
        if self.slot is not None:
            return f"{self.act}({self.slot}={self.value})"
        if self.value is not None:
            return f"{self.act}({self.value})"
        return self.act


class Agenda:
    """Stack of pending user acts; index -1 is the top."""

    def __init__(self, items: list[UserAct]):
        self._stack = list(items)

    def __len__(self) -> int:
        return len(self._stack)

    @property
    def depth(self) -> int:
        return len(self._stack)

    def peek(self) -> UserAct | None:
        return self._stack[-1] if self._stack else None

    def pop(self) -> UserAct:
        return self._stack.pop()

    def remove_inform(self, slot: str) -> UserAct | None:
        """Remove and return the topmost pending inform for ``slot``."""
        for i in range(len(self._stack) - 1, -1, -1):
            item = self._stack[i]
            if item.act == "inform" and item.slot == slot:
                return self._stack.pop(i)
        return None

    def items(self) -> list[UserAct]:
        return list(self._stack)


def _is_intent_key(key: str) -> bool:
    return key == INTENT_SLOT or key.startswith(INTENT_SLOT + "_")


def init_agenda(goal: Goal) -> Agenda:
    """Build the agenda stack for a goal.

    Bottom is always the terminal expectation.  Informs are pushed in reverse
    declaration order so the first-declared slot is answered first; the intent
    query ends up on top.  Multi-intent goals contribute one segment per path
    node, concatenated in path order (first segment on top).
    """
    # A segment is one intent query plus the informs declared around it.  The
    # plain goal layout lists slots first and the query last; path goals list
    # each query first and its node's slots after it.  Both parse here: a
    # leading slot run attaches to the first query, later slots attach to the
    # query they follow.
    segments: list[dict] = [{"intent": None, "informs": []}]
    for key, value in goal.inform_slots.items():
        if _is_intent_key(key):
            if segments[-1]["intent"] is None:
                segments[-1]["intent"] = UserAct(ACT_INFORM_INTENT, value=value)
            else:
                segments.append({"intent": UserAct(ACT_INFORM_INTENT, value=value), "informs": []})
        else:
            segments[-1]["informs"].append(UserAct("inform", slot=key, value=value))

    stack: list[UserAct] = [UserAct(ACT_EXPECT_SUCCESS)]
    for segment in reversed(segments):
        for item in reversed(segment["informs"]):
            stack.append(item)
        if segment["intent"] is not None:
            stack.append(segment["intent"])
    return Agenda(stack)


# --- NLU ------------------------------------------------------------------------


def match_dialog_act(message: str, act_map: DialogActMap, threshold: int) -> tuple[str, int]:
    """Best-scoring act for a bot message, or ("no_match", best_score).

    The score is the max fuzz ratio over all variants after normalization;
    ties go to the act inserted first.
    """
    norm = normalize_text(message)
    best_act = ACT_NO_MATCH
    best_score = 0
    for act, variants in act_map.acts.items():
        for variant in variants:
            score = fuzz_ratio(norm, normalize_text(variant))
            if score > best_score:
                best_act, best_score = act, score
    if best_score >= threshold:
        return best_act, best_score
    return ACT_NO_MATCH, best_score


def _act_score(message_norm: str, act_map: DialogActMap, act: str) -> int:
    variants = act_map.acts.get(act, [])
    if not variants:
        return 0
    return max(fuzz_ratio(message_norm, normalize_text(v)) for v in variants)


class _MatchCache:
    """Per-session memo for NLU scores.

    Bot-side texts repeat across the episodes of a session while the maps stay
    immutable, so caching turns the fuzzy-match cost from per-episode into
    per-distinct-message.  Safe under the worker pool: worst case two threads
    compute the same entry.
    """

    def __init__(self):
        self._matches: dict = {}
        self._scores: dict = {}

    def match(self, text: str, act_map: DialogActMap, threshold: int) -> tuple[str, int]:
        key = (act_map.dialog, threshold, normalize_text(text))
        hit = self._matches.get(key)
        if hit is None:
            hit = match_dialog_act(text, act_map, threshold)
            self._matches[key] = hit
        return hit

    def act_score(self, message_norm: str, act_map: DialogActMap, act: str) -> int:
        key = (act_map.dialog, act, message_norm)
        hit = self._scores.get(key)
        if hit is None:
            hit = _act_score(message_norm, act_map, act)
            self._scores[key] = hit
        return hit


# --- rule table -----------------------------------------------------------------

RULE_INFORM_SLOT = "inform_slot"
RULE_AFFIRM = "affirm"
RULE_ACKNOWLEDGE = "acknowledge"
RULE_INTENT_MARKER = "intent_marker"
RULE_SUCCESS = "success"
RULE_HANDOFF = "handoff"
RULE_RESTATE = "restate"

DEFAULT_RULES: dict[str, str] = {
    REQUEST_PREFIX: RULE_INFORM_SLOT,
    CONFIRM_PREFIX: RULE_AFFIRM,
    INFORM_PREFIX: RULE_ACKNOWLEDGE,
    UNKNOWN_PREFIX: RULE_ACKNOWLEDGE,
    INTENT_SUCCESS: RULE_INTENT_MARKER,
    DIALOG_SUCCESS: RULE_SUCCESS,
    ACT_TRANSFER: RULE_HANDOFF,
    ACT_END: RULE_HANDOFF,
    ACT_NO_MATCH: RULE_RESTATE,
}


class RuleTable:
    """Act-prefix -> rule id, with optional custom handlers.

    Custom handlers receive (state, act, score) and return a UserResponse or
    None to fall back to an acknowledgment.  Acts that resolve to no rule at
    all raise RuleMissingError, so typos in revised maps surface loudly.
    """

    def __init__(self, rules: dict[str, str] | None = None):
        self.rules: dict[str, str] = dict(rules or DEFAULT_RULES)
        self.handlers: dict[str, Callable] = {}

    def register(self, act_prefix: str, rule_id: str, handler: Callable | None = None) -> None:
        self.rules[act_prefix] = rule_id
        if handler is not None:
            self.handlers[rule_id] = handler

    def rule_for(self, act: str) -> str:
        if act in self.rules:
            return self.rules[act]
        candidates = [prefix for prefix in self.rules if act.startswith(prefix)]
        if not candidates:
            raise RuleMissingError(f"no rule registered for dialog act '{act}'")
        return self.rules[max(candidates, key=len)]


# --- episode state ----------------------------------------------------------------


@dataclass
class UserResponse:
    act: str
    text: str | None
    matched_act: str
    match_score: int
    terminal: Outcome | None = None


@dataclass
class EpisodeState:
    goal: Goal
    act_map: DialogActMap
    all_maps: dict[str, DialogActMap]
    templates: NLGTemplates
    cfg: SimConfig
    rng: object = None
    rules: RuleTable = field(default_factory=RuleTable)
    agenda: Agenda = None  # type: ignore[assignment]
    informed: dict[str, str] = field(default_factory=dict)
    repeat_counts: dict[str, int] = field(default_factory=dict)
    no_match_count: int = 0
    intent_checked: bool = False
    intent_ok: bool = False
    intent_predicted: str | None = None
    last_user_text: str | None = None
    failed_slot: str | None = None
    cache: _MatchCache = field(default_factory=_MatchCache)

    def __post_init__(self):
        if self.agenda is None:
            self.agenda = init_agenda(self.goal)
        if self.rng is None:
            self.rng = derive_rng(self.cfg.seed, self.goal.id, "nlg")


def new_episode_state(
    goal: Goal,
    maps: dict[str, DialogActMap],
    templates: NLGTemplates | None = None,
    cfg: SimConfig | None = None,
    rules: RuleTable | None = None,
    cache: _MatchCache | None = None,
) -> EpisodeState:
    cfg = cfg or SimConfig()
    if goal.goal_name not in maps:
        raise ValueError(f"no dialog-act map for goal dialog '{goal.goal_name}'")
    return EpisodeState(
        goal=goal,
        act_map=maps[goal.goal_name],
        all_maps=maps,
        templates=templates or NLGTemplates(),
        cfg=cfg,
        rules=rules or RuleTable(),
        cache=cache or _MatchCache(),
    )


def _slot_display(slot: str) -> str:
    return slot.replace("_", " ")


def _render(state: EpisodeState, act: str, slots: dict[str, str]) -> str:
    return render_nlg(act, slots, state.templates, state.rng)


def _emit_inform(state: EpisodeState, slot: str, value: str) -> str:
    return _render(
        state,
        INFORM_PREFIX + slot,
        {"value": value, "slot": _slot_display(slot), slot: value},
    )


def _pop_initial_utterance(state: EpisodeState) -> UserResponse:
    """The user opens the conversation by popping the agenda top."""
    item = state.agenda.pop()
    if item.act == ACT_INFORM_INTENT:
        text = _render(state, ACT_INFORM_INTENT, {"value": item.value or ""})
    else:
        state.informed[item.slot or ""] = item.value or ""
        text = _emit_inform(state, item.slot or "", item.value or "")
    return UserResponse(act=item.describe(), text=text, matched_act="", match_score=0)


def _verify_intent(state: EpisodeState, replies: list[BotReply]) -> Outcome | None:
    """First-routed-turn check of the intent golden label.

    Correct routing: the goal dialog's intent_success_message matches some
    reply.  Misrouting: another dialog's intent label (or the connector's
    routing hint, "none" for out-of-domain fallbacks) matches instead.
    """
    state.intent_checked = True
    norms = [normalize_text(r.text) for r in replies]
    threshold = state.cfg.fuzzy_threshold
    own = max((state.cache.act_score(n, state.act_map, INTENT_SUCCESS) for n in norms), default=0)
    if own >= threshold:
        state.intent_ok = True
        state.intent_predicted = state.goal.goal_name
        return None
    best_other = None
    best_score = 0
    for name in sorted(state.all_maps):
        if name == state.goal.goal_name:
            continue
        score = max((state.cache.act_score(n, state.all_maps[name], INTENT_SUCCESS) for n in norms), default=0)
        if score > best_score:
            best_other, best_score = name, score
    if best_other is not None and best_score >= threshold:
        state.intent_predicted = best_other
        return Outcome.INTENT_ERROR
    hints = [r.dialog for r in replies if r.dialog]
    if hints:
        state.intent_predicted = hints[0]
        if hints[0] == state.goal.goal_name:
            state.intent_ok = True
            return None
        return Outcome.INTENT_ERROR
    return None


def step(state: EpisodeState, bot_messages: list[BotReply]) -> UserResponse:
    """One conversation turn: match bot messages to acts, apply the rules.

    Precedence within a turn: dialog success ends the episode no matter what
    else arrived; the first routed turn verifies the intent label; then the
    first actionable act (a request or confirmation) drives the response;
    handoffs without success fail the episode; purely informational turns are
    acknowledged (or used to launch the next queued intent query); a turn
    matching nothing is re-stated until the no-match limit trips.
    """
    threshold = state.cfg.fuzzy_threshold
    norms = [normalize_text(r.text) for r in bot_messages]

    success_score = max((state.cache.act_score(n, state.act_map, DIALOG_SUCCESS) for n in norms), default=0)
    if success_score >= threshold:
        return UserResponse(
            act="none", text=None, matched_act=DIALOG_SUCCESS, match_score=success_score, terminal=Outcome.SUCCESS
        )

    if not state.intent_checked:
        failure = _verify_intent(state, bot_messages)
        if failure is not None:
            return UserResponse(
                act="none",
                text=None,
                matched_act=ACT_NO_MATCH,
                match_score=0,
                terminal=failure,
            )

    matches = [state.cache.match(r.text, state.act_map, threshold) for r in bot_messages]

    for (act, score) in matches:
        if act == ACT_NO_MATCH:
            continue
        rule = state.rules.rule_for(act)
        handler = state.rules.handlers.get(rule)
        if handler is not None:
            response = handler(state, act, score)
            if response is not None:
                return response
            continue
        if rule == RULE_INFORM_SLOT:
            return _respond_to_request(state, act, score)
        if rule == RULE_AFFIRM:
            slot = act[len(CONFIRM_PREFIX):]
            text = _render(state, act, {"value": state.informed.get(slot, ""), "slot": _slot_display(slot)})
            return UserResponse(act=f"affirm({slot})", text=text, matched_act=act, match_score=score)

    for (act, score) in matches:
        if act != ACT_NO_MATCH and state.rules.rule_for(act) == RULE_HANDOFF:
            return UserResponse(act="none", text=None, matched_act=act, match_score=score, terminal=Outcome.OTHER_ERROR)

    informational = next(((a, s) for a, s in matches if a != ACT_NO_MATCH), None)

    top = state.agenda.peek()
    if top is not None and top.act == ACT_INFORM_INTENT:
        state.agenda.pop()
        text = _render(state, ACT_INFORM_INTENT, {"value": top.value or ""})
        matched_act, match_score = informational or (ACT_NO_MATCH, max((s for _, s in matches), default=0))
        return UserResponse(act=top.describe(), text=text, matched_act=matched_act, match_score=match_score)

    if informational is not None:
        act, score = informational
        text = _render(state, "acknowledge", {})
        return UserResponse(act="acknowledge", text=text, matched_act=act, match_score=score)

    state.no_match_count += 1
    best = max((s for _, s in matches), default=0)
    if state.no_match_count >= state.cfg.no_match_limit:
        return UserResponse(act="none", text=None, matched_act=ACT_NO_MATCH, match_score=best, terminal=Outcome.OTHER_ERROR)
    return UserResponse(
        act="restate", text=state.last_user_text or "", matched_act=ACT_NO_MATCH, match_score=best
    )


def _respond_to_request(state: EpisodeState, act: str, score: int) -> UserResponse:
    slot = act[len(REQUEST_PREFIX):]
    if slot in state.informed:
        state.repeat_counts[slot] = state.repeat_counts.get(slot, 0) + 1
        if state.repeat_counts[slot] >= state.cfg.repeat_request_limit:
            state.failed_slot = slot
            return UserResponse(act="none", text=None, matched_act=act, match_score=score, terminal=Outcome.NER_ERROR)
        value = state.informed[slot]
        return UserResponse(
            act=f"inform({slot}={value})", text=_emit_inform(state, slot, value), matched_act=act, match_score=score
        )
    value = state.goal.entity_slots().get(slot, "anything")
    state.agenda.remove_inform(slot)
    state.informed[slot] = value
    return UserResponse(
        act=f"inform({slot}={value})", text=_emit_inform(state, slot, value), matched_act=act, match_score=score
    )


# --- episode / session runners -----------------------------------------------------


@dataclass
class Turn:
    bot_messages: list[BotReply]
    matched_act: str
    match_score: int
    user_act: str
    user_text: str | None

    def to_dict(self) -> dict:
        return {
            "bot_messages": [m.to_dict() for m in self.bot_messages],
            "matched_act": self.matched_act,
            "match_score": self.match_score,
            "user_act": self.user_act,
            "user_text": self.user_text,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Turn":
        return cls(
            bot_messages=[BotReply(text=m["text"], dialog=m.get("dialog")) for m in doc.get("bot_messages", [])],
            matched_act=doc.get("matched_act", ""),
            match_score=int(doc.get("match_score", 0)),
            user_act=doc.get("user_act", ""),
            user_text=doc.get("user_text"),
        )


@dataclass
class Episode:
    goal_id: str
    goal_name: str
    intent_query: str
    turns: list[Turn] = field(default_factory=list)
    outcome: Outcome = Outcome.OTHER_ERROR
    error_turn: int | None = None
    intent_predicted: str | None = None
    error_detail: str | None = None

    def to_dict(self) -> dict:
        return {
            "goal_id": self.goal_id,
            "goal_name": self.goal_name,
            "intent_query": self.intent_query,
            "turns": [t.to_dict() for t in self.turns],
            "outcome": self.outcome.value,
            "error_turn": self.error_turn,
            "intent_predicted": self.intent_predicted,
            "error_detail": self.error_detail,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Episode":
        return cls(
            goal_id=doc["goal_id"],
            goal_name=doc["goal_name"],
            intent_query=doc.get("intent_query", ""),
            turns=[Turn.from_dict(t) for t in doc.get("turns", [])],
            outcome=Outcome(doc["outcome"]),
            error_turn=doc.get("error_turn"),
            intent_predicted=doc.get("intent_predicted"),
            error_detail=doc.get("error_detail"),
        )


@dataclass
class SessionResult:
    episodes: list[Episode]
    counts: dict[str, int]
    seed: int
    config: dict

    @property
    def success_rate(self) -> float:
        if not self.episodes:
            return 0.0
        return self.counts.get(Outcome.SUCCESS.value, 0) / len(self.episodes)


def _gate_needs_review(maps: dict[str, DialogActMap], goal_dialogs: set[str], force: bool) -> None:
    pending = {d: acts for d, acts in pending_review(maps).items() if d in goal_dialogs}
    if pending and not force:
        raise NeedsReviewError(pending)


def run_episode(
    connector: Connector,
    goal: Goal,
    maps: dict[str, DialogActMap],
    templates: NLGTemplates | None = None,
    cfg: SimConfig | None = None,
    rules: RuleTable | None = None,
    cache: _MatchCache | None = None,
) -> Episode:
    """Play one goal against a bot until success, a captured error, or timeout."""
    cfg = cfg or SimConfig()
    _gate_needs_review(maps, {goal.goal_name}, cfg.force)
    state = new_episode_state(goal, maps, templates, cfg, rules, cache)
    episode = Episode(goal_id=goal.id, goal_name=goal.goal_name, intent_query=goal.intent_query)

    if hasattr(connector, "bind_goal"):
        connector.bind_goal(goal)
    session = connector.start_session()

    opening = _pop_initial_utterance(state)
    user_text = opening.text
    state.last_user_text = user_text

    try:
        for turn_index in range(cfg.max_turns):
            try:
                replies = connector.send(session, user_text or "")
            except ConnectorError as exc:
                episode.turns.append(Turn([], ACT_NO_MATCH, 0, "none", None))
                episode.outcome = Outcome.OTHER_ERROR
                episode.error_turn = turn_index
                episode.error_detail = str(exc)
                return episode
            response = step(state, replies)
            episode.turns.append(
                Turn(replies, response.matched_act, response.match_score, response.act, response.text)
            )
            if response.terminal is not None:
                episode.outcome = response.terminal
                episode.intent_predicted = state.intent_predicted
                if response.terminal is not Outcome.SUCCESS:
                    episode.error_turn = turn_index
                return episode
            user_text = response.text
            state.last_user_text = user_text
        episode.outcome = Outcome.TIMEOUT
        episode.error_turn = len(episode.turns) - 1
        episode.intent_predicted = state.intent_predicted
        return episode
    finally:
        try:
            connector.close(session)
        except Exception:  # noqa: BLE001 - closing is best-effort
            pass


def run_session(
    connector_factory: Callable[[Goal], Connector],
    goals: list[Goal],
    maps: dict[str, DialogActMap],
    templates: NLGTemplates | None = None,
    cfg: SimConfig | None = None,
    rules: RuleTable | None = None,
) -> SessionResult:
    """Run every goal as an independent episode; results ordered by goal id.

    Episodes draw their RNG streams from (seed, goal id), so serial and
    parallel execution produce identical transcripts.
    """
    if not goals:
        raise ValueError("goals must be non-empty")
    cfg = cfg or SimConfig()
    _gate_needs_review(maps, {g.goal_name for g in goals}, cfg.force)
    cache = _MatchCache()

    def one(goal: Goal) -> Episode:
        return run_episode(connector_factory(goal), goal, maps, templates, cfg, rules, cache)

    if cfg.parallelism <= 1:
        episodes = [one(goal) for goal in goals]
    else:
        with ThreadPoolExecutor(max_workers=cfg.parallelism) as pool:
            episodes = list(pool.map(one, goals))
    episodes.sort(key=lambda e: e.goal_id)
    counts: dict[str, int] = {outcome.value: 0 for outcome in Outcome}
    for episode in episodes:
        counts[episode.outcome.value] += 1
    counts["episodes"] = len(episodes)
    return SessionResult(episodes=episodes, counts=counts, seed=cfg.seed, config=cfg.to_dict())


# --- root-cause backtracking --------------------------------------------------------


@dataclass
class ErrorCause:
    kind: str  # intent_misroute | entity_rejected | unexpected_transition | no_match_loop | timeout
    turn: int
    expected_act: str
    observed_act: str
    slot: str | None = None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "turn": self.turn,
            "expected_act": self.expected_act,
            "observed_act": self.observed_act,
            "slot": self.slot,
        }


def backtrack_root_cause(episode: Episode) -> ErrorCause:
    """Locate the first divergence between the expected agenda progression
    and what the bot actually did; only defined for failed episodes."""
    if episode.outcome is Outcome.SUCCESS:
        raise ValueError("backtracking is only defined for failed episodes")

    if episode.outcome is Outcome.INTENT_ERROR:
        turn = episode.error_turn if episode.error_turn is not None else 0
        observed = episode.intent_predicted or ACT_NO_MATCH
        return ErrorCause(
            kind="intent_misroute", turn=turn, expected_act=INTENT_SUCCESS, observed_act=observed
        )

    if episode.outcome is Outcome.NER_ERROR:
        seen: set[str] = set()
        for i, turn in enumerate(episode.turns):
            act = turn.matched_act
            if act.startswith(REQUEST_PREFIX):
                if act in seen:
                    slot = act[len(REQUEST_PREFIX):]
                    return ErrorCause(
                        kind="entity_rejected", turn=i, expected_act="progress", observed_act=act, slot=slot
                    )
                seen.add(act)
        turn_index = episode.error_turn if episode.error_turn is not None else len(episode.turns) - 1
        return ErrorCause(kind="entity_rejected", turn=turn_index, expected_act="progress", observed_act=ACT_NO_MATCH)

    if episode.outcome is Outcome.OTHER_ERROR:
        for i, turn in enumerate(episode.turns):
            if turn.matched_act in (ACT_TRANSFER, ACT_END):
                return ErrorCause(
                    kind="unexpected_transition", turn=i, expected_act=DIALOG_SUCCESS, observed_act=turn.matched_act
                )
        if episode.error_detail:
            turn_index = episode.error_turn if episode.error_turn is not None else len(episode.turns) - 1
            return ErrorCause(
                kind="unexpected_transition",
                turn=turn_index,
                expected_act=DIALOG_SUCCESS,
                observed_act="connector_error",
            )
        for i, turn in enumerate(episode.turns):
            if turn.matched_act == ACT_NO_MATCH:
                return ErrorCause(kind="no_match_loop", turn=i, expected_act=DIALOG_SUCCESS, observed_act=ACT_NO_MATCH)
        turn_index = episode.error_turn if episode.error_turn is not None else len(episode.turns) - 1
        return ErrorCause(kind="no_match_loop", turn=turn_index, expected_act=DIALOG_SUCCESS, observed_act=ACT_NO_MATCH)

    turn_index = episode.error_turn if episode.error_turn is not None else max(len(episode.turns) - 1, 0)
    observed = episode.turns[turn_index].matched_act if episode.turns else ACT_NO_MATCH
    return ErrorCause(kind="timeout", turn=turn_index, expected_act=DIALOG_SUCCESS, observed_act=observed)


# --- transcript persistence -----------------------------------------------------------


def dump_transcripts(result: SessionResult) -> str:
    """Line-delimited session export: one manifest line, then one line per episode."""
    lines = [json.dumps({"session": {"seed": result.seed, "config": result.config, "counts": result.counts}}, ensure_ascii=False)]
    lines.extend(json.dumps(e.to_dict(), ensure_ascii=False) for e in result.episodes)
    return "\n".join(lines) + "\n"


def load_transcripts(document: str) -> SessionResult:
    lines = [line for line in document.splitlines() if line.strip()]
    if not lines:
        raise ValueError("empty transcript document")
    head = json.loads(lines[0])["session"]
    episodes = [Episode.from_dict(json.loads(line)) for line in lines[1:]]
    return SessionResult(
        episodes=episodes,
        counts=head.get("counts", {}),
        seed=head.get("seed", 0),
        config=head.get("config", {}),
    )
