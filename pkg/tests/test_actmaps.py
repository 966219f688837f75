from __future__ import annotations

import random

import pytest

from botprobe.actmaps import (
    DIALOG_SUCCESS,
    INTENT_SUCCESS,
    DialogActMap,
    Revision,
    apply_revision,
    build_act_maps,
    build_global_maps,
    build_local_maps,
    confirm_reviewed,
    dump_maps,
    infer_local_dialog_act,
    infer_success_messages,
    load_maps,
    pending_review,
)
from botprobe.botdef import BotDefinition, BotMessage, DialogSpec, MessageAction, Transition
from botprobe.errors import NoMessagesError, UnknownActError
from botprobe.graph import build_graph


def msg(text, action=MessageAction.UNKNOWN, slot=None, entity_type=None):
    return BotMessage(text=text, action=action, slot=slot, entity_type=entity_type)


# --- local act inference -----------------------------------------------------


def test_collect_email_maps_to_request_email():
    message = msg("May I get your email?", MessageAction.COLLECT, "Email", "Email")
    assert infer_local_dialog_act(message) == "request_Email"


@pytest.mark.parametrize(
    "action,slot,expected",
    [
        (MessageAction.CONFIRM, "Email", "confirm_Email"),
        (MessageAction.INFORM, "Case_Status", "inform_Case_Status"),
        (MessageAction.TRANSFER, None, "transfer"),
        (MessageAction.END, None, "end"),
    ],
)
def test_act_name_grammar(action, slot, expected):
    assert infer_local_dialog_act(msg("text", action, slot)) == expected


def test_unknown_action_uses_ordinal():
    assert infer_local_dialog_act(msg("hm", MessageAction.UNKNOWN), unknown_ordinal=2) == "unknown_2"


def test_slotless_inform_falls_back_to_unknown():
    assert infer_local_dialog_act(msg("we are on it", MessageAction.INFORM)) == "unknown_1"


def test_build_local_maps_appends_variants_in_message_order():
    definition = BotDefinition(
        bot_name="b",
        dialogs=[
            DialogSpec(
                name="D",
                messages=[
                    msg("May I get your email?", MessageAction.COLLECT, "Email", "Email"),
                    msg("What's your email address?", MessageAction.COLLECT, "Email", "Email"),
                ],
            )
        ],
    )
    local = build_local_maps(definition)
    assert local["D"].acts == {"request_Email": ["May I get your email?", "What's your email address?"]}


def test_router_dialog_gets_empty_acts():
    definition = BotDefinition(bot_name="b", dialogs=[DialogSpec(name="Router")])
    assert build_local_maps(definition)["Router"].acts == {}


def test_check_issue_fixture_dialog_gets_expected_request_acts(template_bot):
    local = build_local_maps(template_bot)
    acts = local["Check_the_status_of_an_existing_issue"].acts
    # Hand application of the action/slot heuristic to the fixture dialog.
    assert "request_Email_for_Look_Up" in acts
    assert "request_Case_Number" in acts
    assert acts["request_Email_for_Look_Up"] == ["May I get your email address to look up your account?"]
    assert "unknown_1" in acts  # slotless opening message
    assert "inform_Case_Status" in acts


def test_unknown_ordinals_count_per_dialog():
    definition = BotDefinition(
        bot_name="b",
        dialogs=[
            DialogSpec(name="D", messages=[msg("one"), msg("two"), msg("three")]),
            DialogSpec(name="E", messages=[msg("uno")]),
        ],
    )
    local = build_local_maps(definition)
    assert set(local["D"].acts) == {"unknown_1", "unknown_2", "unknown_3"}
    assert set(local["E"].acts) == {"unknown_1"}


# --- global maps (simple-path union) ------------------------------------------


def chain_definition() -> BotDefinition:
    return BotDefinition(
        bot_name="chain",
        dialogs=[
            DialogSpec(
                name="X",
                messages=[msg("email?", MessageAction.COLLECT, "Email", "Email")],
                transitions=[Transition("next", "Y")],
            ),
            DialogSpec(
                name="Y",
                messages=[msg("case number?", MessageAction.COLLECT, "Case_Number", "Case_Id")],
                transitions=[Transition("next", "T")],
            ),
            DialogSpec(name="T", messages=[msg("bye", MessageAction.END)]),
        ],
    )


def test_chain_global_map_unions_all_downstream_acts():
    definition = chain_definition()
    graph = build_graph(definition)
    global_maps = build_global_maps(build_local_maps(definition), graph)
    assert set(global_maps["X"].acts) == {"request_Email", "request_Case_Number", "end"}
    assert set(global_maps["Y"].acts) == {"request_Case_Number", "end"}


def test_terminal_global_equals_local():
    definition = chain_definition()
    graph = build_graph(definition)
    local = build_local_maps(definition)
    global_maps = build_global_maps(local, graph)
    assert global_maps["T"].acts == local["T"].acts


def test_diamond_global_includes_both_branches():
    definition = BotDefinition(
        bot_name="diamond",
        dialogs=[
            DialogSpec(name="A", messages=[msg("a")], transitions=[Transition("1", "B"), Transition("2", "C")]),
            DialogSpec(name="B", messages=[msg("b", MessageAction.COLLECT, "B_Slot", "Free_Text")], transitions=[Transition("3", "D")]),
            DialogSpec(name="C", messages=[msg("c", MessageAction.COLLECT, "C_Slot", "Free_Text")], transitions=[Transition("4", "D")]),
            DialogSpec(name="D", messages=[msg("d", MessageAction.END)]),
        ],
    )
    graph = build_graph(definition)
    global_maps = build_global_maps(build_local_maps(definition), graph)
    assert {"request_B_Slot", "request_C_Slot", "end"} <= set(global_maps["A"].acts)


# Brute-force oracle: enumerate every simple path to every terminal with an
# independent BFS, collect contributing nodes, merge with the documented
# canonical order (the dialog first, then contributors sorted by name).
def oracle_global_map(local_maps, graph, dialog: str) -> DialogActMap:
    contributing: set[str] = {dialog}
    terminals = {n for n in graph.nodes if not graph.adjacency.get(n)}
    frontier = [[dialog]]
    while frontier:
        path = frontier.pop()
        node = path[-1]
        if node in terminals:
            contributing.update(path)
            continue
        for edge in graph.adjacency.get(node, []):
            if edge.target not in path:
                frontier.append(path + [edge.target])
    merged = DialogActMap(dialog=dialog)
    for name in [dialog] + sorted(contributing - {dialog}):
        for act, variants in local_maps[name].acts.items():
            for text in variants:
                merged.add_variant(act, text)
    return merged


def random_definition(rng: random.Random, max_dialogs: int = 8) -> BotDefinition:
    n = rng.randrange(2, max_dialogs + 1)
    names = [f"d{i}" for i in range(n)]
    dialogs = []
    for i, name in enumerate(names):
        messages = []
        for m in range(rng.randrange(0, 3)):
            kind = rng.random()
            if kind < 0.5:
                messages.append(msg(f"{name} asks {m}", MessageAction.COLLECT, f"{name}_s{m}", "Free_Text"))
            elif kind < 0.75:
                messages.append(msg(f"{name} says {m}", MessageAction.INFORM, f"{name}_i{m}", "Free_Text"))
            else:
                messages.append(msg(f"{name} notes {m}"))
        transitions = []
        targets = rng.sample(names, min(len(names), rng.randrange(0, 4)))
        for target in targets:
            if target != name or rng.random() < 0.3:  # the occasional self-loop
                transitions.append(Transition(f"to_{target}", target))
        if i == n - 1:
            transitions = []  # force at least one terminal
        dialogs.append(DialogSpec(name=name, messages=messages, transitions=transitions))
    return BotDefinition(bot_name="rand", dialogs=dialogs)


def test_global_maps_equal_brute_force_oracle_on_random_bots():
    rng = random.Random(2024)
    for _ in range(60):
        definition = random_definition(rng)
        graph = build_graph(definition)
        local = build_local_maps(definition)
        global_maps = build_global_maps(local, graph)
        for dialog in definition.dialog_names():
            expected = oracle_global_map(local, graph, dialog)
            assert global_maps[dialog].acts == expected.acts, f"dialog {dialog}"


def test_global_superset_of_local_everywhere():
    rng = random.Random(5)
    for _ in range(20):
        definition = random_definition(rng)
        graph = build_graph(definition)
        local = build_local_maps(definition)
        global_maps = build_global_maps(local, graph)
        for name in definition.dialog_names():
            for act, variants in local[name].acts.items():
                assert set(variants) <= set(global_maps[name].acts.get(act, []))


def test_inference_is_deterministic_byte_for_byte(template_bot):
    first = dump_maps(build_act_maps(template_bot))
    second = dump_maps(build_act_maps(template_bot))
    assert first == second


# --- success-message inference -------------------------------------------------


def test_self_terminal_dialog_uses_first_and_last_message():
    definition = BotDefinition(
        bot_name="b",
        dialogs=[DialogSpec(name="D", is_intent_root=True, messages=[msg("m1"), msg("m2"), msg("mk")])],
    )
    graph = build_graph(definition)
    assert infer_success_messages(definition, graph, "D") == ("m1", "mk")


def test_single_message_dialog_labels_coincide():
    definition = BotDefinition(
        bot_name="b", dialogs=[DialogSpec(name="D", is_intent_root=True, messages=[msg("only")])]
    )
    graph = build_graph(definition)
    assert infer_success_messages(definition, graph, "D") == ("only", "only")


def test_dialog_success_comes_from_reachable_terminal(template_bot, template_graph):
    intent_success, dialog_success = infer_success_messages(
        template_bot, template_graph, "Check_the_status_of_an_existing_issue"
    )
    assert intent_success == "I can help you check on the status of your issue."
    assert dialog_success == "Thanks for contacting us. Goodbye!"


def test_router_only_intent_dialog_raises_no_messages():
    definition = BotDefinition(
        bot_name="b",
        dialogs=[
            DialogSpec(name="R", is_intent_root=True, transitions=[Transition("x", "T")]),
            DialogSpec(name="T", messages=[msg("bye")]),
        ],
    )
    graph = build_graph(definition)
    with pytest.raises(NoMessagesError):
        infer_success_messages(definition, graph, "R")


def test_build_act_maps_flags_success_acts_for_review(template_bot):
    maps = build_act_maps(template_bot)
    for dialog in template_bot.intent_root_dialogs():
        act_map = maps[dialog.name]
        assert INTENT_SUCCESS in act_map.acts
        assert DIALOG_SUCCESS in act_map.acts
        assert set(act_map.needs_review) == {INTENT_SUCCESS, DIALOG_SUCCESS}
    assert maps["End_Chat"].needs_review == []
    assert pending_review(maps)


# --- revisions -------------------------------------------------------------------


def test_add_variant_grows_list(template_maps):
    act_map = template_maps["Check_the_status_of_an_existing_issue"]
    before = len(act_map.acts[DIALOG_SUCCESS])
    revised = apply_revision(act_map, Revision(act_map.dialog, DIALOG_SUCCESS, add_variants=["Bye now!"]))
    assert len(revised.acts[DIALOG_SUCCESS]) == before + 1
    assert "Bye now!" in revised.acts[DIALOG_SUCCESS]
    # copy-on-write: the original map is untouched
    assert "Bye now!" not in act_map.acts[DIALOG_SUCCESS]


def test_removing_last_variant_deletes_act(template_maps):
    act_map = template_maps["Check_the_status_of_an_existing_issue"]
    only = act_map.acts[INTENT_SUCCESS][0]
    revised = apply_revision(act_map, Revision(act_map.dialog, INTENT_SUCCESS, remove_variants=[only]))
    assert INTENT_SUCCESS not in revised.acts


def test_remove_from_unknown_act_raises(template_maps):
    act_map = template_maps["Check_the_status_of_an_existing_issue"]
    with pytest.raises(UnknownActError):
        apply_revision(act_map, Revision(act_map.dialog, "no_such_act", remove_variants=["x"]))


def test_revision_clears_needs_review(template_maps):
    act_map = template_maps["Check_the_status_of_an_existing_issue"]
    revised = apply_revision(act_map, Revision(act_map.dialog, DIALOG_SUCCESS, add_variants=["Bye now!"]))
    assert DIALOG_SUCCESS not in revised.needs_review
    assert INTENT_SUCCESS in revised.needs_review


def test_inverse_revision_restores_map(template_maps):
    act_map = confirm_reviewed(template_maps["Check_the_status_of_an_existing_issue"])
    forward = Revision(act_map.dialog, DIALOG_SUCCESS, add_variants=["Bye now!"])
    backward = Revision(act_map.dialog, DIALOG_SUCCESS, remove_variants=["Bye now!"])
    round_tripped = apply_revision(apply_revision(act_map, forward), backward)
    assert round_tripped.acts == act_map.acts


def test_revision_requires_some_change():
    with pytest.raises(ValueError):
        Revision("D", "act")


def test_maps_serialization_round_trip(template_maps):
    text = dump_maps(template_maps)
    loaded = load_maps(text)
    assert dump_maps(loaded) == text
    assert loaded["End_Chat"].acts == template_maps["End_Chat"].acts


def test_confirm_reviewed_clears_flags(template_maps):
    act_map = template_maps["Report_an_Issue"]
    assert act_map.needs_review
    assert confirm_reviewed(act_map).needs_review == []
    assert act_map.needs_review  # original untouched
