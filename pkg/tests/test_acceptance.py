"""Acceptance suite: one test per release criterion, each printing a
pass/fail line with its runtime (run with -s to watch them stream)."""
from __future__ import annotations

import json
import random
import time
from contextlib import contextmanager
from pathlib import Path

from click.testing import CliRunner

from botprobe.actmaps import build_act_maps, build_global_maps, build_local_maps, confirm_reviewed
from botprobe.botdef import load_bot_definition
from botprobe.cli import main as cli_main
from botprobe.goals import generate_goals, generate_ontology
from botprobe.graph import build_graph, dump_paths_jsonl, enumerate_simple_paths
from botprobe.mockbot import FaultProfile, mock_connector_factory
from botprobe.paraphrase import FilterConfig, ParaphraseCandidate, filter_candidates
from botprobe.remediator import (
    ErrorGroup,
    SuggestionKind,
    aggregate_metrics,
    bootstrap_f1_ci,
    suggest_remediations,
)
from botprobe.simulator import Outcome, SimConfig, run_session
from botprobe.textmetrics import fuzz_ratio, ibleu

from test_actmaps import oracle_global_map, random_definition
from test_graph import graph_from_edges, oracle_simple_paths
from test_textmetrics import oracle_ratio

FIXTURE = Path(__file__).parent / "fixtures" / "template_bot.json"


@contextmanager
def criterion(name: str, budget_seconds: float):
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"[FAIL] {name}")
        raise
    elapsed = time.perf_counter() - start
    if elapsed >= budget_seconds:
        print(f"[FAIL] {name}: took {elapsed:.2f}s, budget {budget_seconds}s")
        raise AssertionError(f"{name} exceeded runtime budget: {elapsed:.2f}s >= {budget_seconds}s")
    print(f"[PASS] {name} ({elapsed:.2f}s)")


def _fixture_bot():
    return load_bot_definition(FIXTURE.read_text(encoding="utf-8"))


def _reviewed_maps(definition):
    return {name: confirm_reviewed(m) for name, m in build_act_maps(definition).items()}


def test_c1_ibleu_reproduces_published_rows():
    # (target, self, printed) for the benchmark rows whose printed iBLEU is
    # consistent with the 0.8/-0.2 combination; printed values are 1-d.p.
    # roundings, so computed-from-rounded inputs may sit one tick away.
    rows = [
        (31.4, 55.3, 14.0),
        (23.8, 46.0, 9.9),
        (39.5, 33.0, 24.9),
        (30.5, 40.2, 16.4),
        (42.7, 42.7, 25.6),
        (14.9, 20.0, 7.9),
        (32.3, 46.8, 16.5),
        (31.9, 42.7, 17.0),
    ]
    with criterion("C1 iBLEU formula reproduces the 8 consistent benchmark rows", 1.0):
        assert len(rows) == 8
        for target, self_, printed in rows:
            computed = ibleu(target, self_)
            assert abs(round(computed, 1) - printed) <= 0.1 + 1e-9, (target, self_, computed, printed)
        assert abs(ibleu(42.7, 42.7) - 25.62) < 1e-9
        assert abs(ibleu(31.4, 55.3) - 14.06) < 1e-9


def test_c2_global_map_oracle_equivalence_on_200_random_bots():
    with criterion("C2 global-map inference equals brute-force path-union oracle (200 bots)", 30.0):
        rng = random.Random(20_24)
        for _ in range(200):
            definition = random_definition(rng, max_dialogs=8)
            graph = build_graph(definition)
            local = build_local_maps(definition)
            global_maps = build_global_maps(local, graph)
            for dialog in definition.dialog_names():
                expected = oracle_global_map(local, graph, dialog)
                assert global_maps[dialog].acts == expected.acts
                assert global_maps[dialog].dialog == expected.dialog


def test_c3_closed_loop_600_goals_zero_faults():
    with criterion("C3 closed loop: 600 zero-fault episodes all succeed", 60.0):
        definition = _fixture_bot()
        maps = _reviewed_maps(definition)
        ontology = generate_ontology(definition, seed=33)
        goals = []
        for intent in definition.intents:
            goals.extend(generate_goals(maps[intent.name], ontology, intent.utterances, per_query=20))
        assert len(goals) == 600
        result = run_session(
            mock_connector_factory(definition, seed=33),
            goals,
            maps,
            cfg=SimConfig(seed=33, parallelism=1),
        )
        assert len(result.episodes) == 600
        assert result.success_rate == 1.0
        assert result.counts[Outcome.SUCCESS.value] == 600


def test_c4_fault_injection_calibration_2000_goals():
    with criterion("C4 intent-confusion 0.2 lands in [0.17, 0.23] over 2000 episodes", 300.0):
        definition = _fixture_bot()
        maps = _reviewed_maps(definition)
        ontology = generate_ontology(definition, seed=44)
        intent = "Check_the_status_of_an_existing_issue"
        other = "Check_the_status_of_an_order"
        queries = next(i.utterances for i in definition.intents if i.name == intent)
        goals = generate_goals(maps[intent], ontology, queries, per_query=400)
        assert len(goals) == 2000
        profile = FaultProfile(intent_confusion={intent: {intent: 0.8, other: 0.2}}, seed=44)
        result = run_session(
            mock_connector_factory(definition, profile, seed=44),
            goals,
            maps,
            cfg=SimConfig(seed=44, parallelism=4),
        )
        misroutes = sum(1 for e in result.episodes if e.outcome is Outcome.INTENT_ERROR)
        rate = misroutes / len(result.episodes)
        assert 0.17 <= rate <= 0.23, rate
        report = aggregate_metrics(result.episodes, {"seed": 44, "n_resamples": 1000})
        assert abs(report.intent_metrics[intent].recall - (1.0 - rate)) < 1e-9


def test_c5_bootstrap_ci_10k_resamples():
    with criterion("C5 bootstrap CI: exact 0.80 point, stable, shrinking width", 20.0):
        true = ["A"] * 100 + ["B"] * 100
        pred = ["A"] * 80 + ["B"] * 20 + ["A"] * 20 + ["B"] * 80
        first = bootstrap_f1_ci(true, pred, n_resamples=10_000, alpha=0.05, seed=55)
        second = bootstrap_f1_ci(true, pred, n_resamples=10_000, alpha=0.05, seed=55)
        assert first == second
        point, low, high = first["A"]
        assert point == 0.80
        assert low <= 0.80 <= high
        assert low <= high
        big = bootstrap_f1_ci(true * 4, pred * 4, n_resamples=10_000, alpha=0.05, seed=55)
        assert (big["A"][2] - big["A"][1]) <= (high - low)


def test_c6_suggestion_rules_reproduce_the_documented_cases():
    with criterion("C6 remediation rules: unanimous move + OOD augmentation", 5.0):
        unanimous = ErrorGroup(
            original_utterance="Can you give me the status of my order",
            true_intent="check_issue",
            members=[
                {"paraphrase": f"variant {i}", "predicted_intent": "check_order", "episode_id": str(i)}
                for i in range(10)
            ],
        )
        suggestions = suggest_remediations([unanimous], {"Can you give me the status of my order": 10})
        assert suggestions[0].kind is SuggestionKind.MOVE_INTENT
        assert suggestions[0].proposed_intent == "check_order"

        ood_members = [
            {"paraphrase": f"ood variant {i}", "predicted_intent": "none", "episode_id": str(i)} for i in range(4)
        ]
        scattered = [
            {"paraphrase": f"other {i}", "predicted_intent": f"intent_{i}", "episode_id": f"x{i}"} for i in range(2)
        ]
        mixed = ErrorGroup(original_utterance="u", true_intent="A", members=ood_members + scattered)
        suggestions = suggest_remediations([mixed], {"u": 10})
        assert suggestions[0].kind is SuggestionKind.AUGMENT_TRAINING
        assert suggestions[0].queries == [m["paraphrase"] for m in ood_members]


def test_c7_fuzz_oracle_agreement_and_filter_idempotence():
    with criterion("C7 fuzz ratio == DP oracle on 1000 pairs; filter idempotent on 1000 sets", 30.0):
        rng = random.Random(77_77)
        alphabet = "abcdefgh OX?!"
        for _ in range(1000):
            a = "".join(rng.choice(alphabet) for _ in range(rng.randrange(0, 16)))
            b = "".join(rng.choice(alphabet) for _ in range(rng.randrange(0, 16)))
            assert fuzz_ratio(a, b) == oracle_ratio(a, b), (a, b)

        for i in range(1000):
            batch = []
            for j in range(rng.randrange(0, 10)):
                candidate = ParaphraseCandidate(source="s", text=f"c{i}_{j}", provider="p", rank=j + 1)
                candidate.sim = rng.random()
                candidate.fuzz = rng.randrange(0, 101)
                batch.append(candidate)
            cfg = FilterConfig(sim_low=0.3, sim_high=0.97, fuzz_max=80)
            once = filter_candidates(batch, cfg)
            twice = filter_candidates(once, cfg)
            assert twice == once


def test_c8_path_enumeration_matches_dfs_oracle_on_100_dags():
    with criterion("C8 path enumeration equals DFS oracle on 100 random DAGs", 30.0):
        rng = random.Random(88)
        for _ in range(100):
            n = rng.randrange(2, 11)
            names = [f"d{i}" for i in range(n)]
            edges = []
            for i in range(n):
                for j in range(i + 1, n):
                    if rng.random() < 0.45:
                        edges.append((names[i], f"e{i}_{j}", names[j]))
            graph = graph_from_edges(edges, extra_nodes=set(names))
            result = enumerate_simple_paths(graph, "d0", f"d{n-1}", max_depth=20, max_paths=1_000_000)
            oracle = oracle_simple_paths(graph, "d0", f"d{n-1}")
            assert len(result.paths) == len(oracle)
            assert sorted(list(p.nodes) for p in result.paths) == sorted(oracle)
            rerun = enumerate_simple_paths(graph, "d0", f"d{n-1}", max_depth=20, max_paths=1_000_000)
            assert dump_paths_jsonl(rerun.paths) == dump_paths_jsonl(result.paths)


def test_c9_full_pipeline_determinism(tmp_path):
    with criterion("C9 parse -> goals -> simulate -> report is byte-identical across runs", 120.0):
        runner = CliRunner()
        artifacts = []
        queries_path = tmp_path / "queries.json"
        queries_path.write_text(
            json.dumps(
                {
                    "Check_the_status_of_an_existing_issue": [
                        "Can I check the latest status of my reported issue?"
                    ],
                    "Connect_with_Sales": ["I'd like to talk to sales"],
                }
            ),
            encoding="utf-8",
        )
        for run_name in ("one", "two"):
            base = tmp_path / run_name
            parsed = base / "parsed"
            result = runner.invoke(
                cli_main, ["parse", "--bot", str(FIXTURE), "--out", str(parsed)], catch_exceptions=False
            )
            assert result.exit_code == 0, result.output
            maps_doc = json.loads((parsed / "maps.json").read_text(encoding="utf-8"))
            revisions = base / "revisions.jsonl"
            lines = [
                json.dumps({"dialog": dialog, "act": act, "add_variants": [entry["acts"][act][0]]})
                for dialog, entry in maps_doc.items()
                for act in entry["needs_review"]
            ]
            revisions.write_text("\n".join(lines) + "\n", encoding="utf-8")
            reviewed = base / "reviewed"
            result = runner.invoke(
                cli_main,
                ["parse", "--bot", str(FIXTURE), "--revisions", str(revisions), "--out", str(reviewed)],
                catch_exceptions=False,
            )
            assert result.exit_code == 0
            goals_path = base / "goals.json"
            result = runner.invoke(
                cli_main,
                [
                    "goals",
                    "--bot", str(reviewed / "bot.json"),
                    "--maps", str(reviewed / "maps.json"),
                    "--queries", str(queries_path),
                    "--per-query", "5",
                    "--seed", "9",
                    "--out", str(goals_path),
                ],
                catch_exceptions=False,
            )
            assert result.exit_code == 0
            sim_dir = base / "sim"
            result = runner.invoke(
                cli_main,
                [
                    "simulate",
                    "--bot", str(reviewed / "bot.json"),
                    "--maps", str(reviewed / "maps.json"),
                    "--goals", str(goals_path),
                    "--connector", "mock",
                    "--seed", "9",
                    "--out", str(sim_dir),
                ],
                catch_exceptions=False,
            )
            assert result.exit_code == 0
            report_path = base / "report.json"
            result = runner.invoke(
                cli_main,
                [
                    "report",
                    "--transcripts", str(sim_dir / "transcripts.jsonl"),
                    "--seed", "9",
                    "--resamples", "2000",
                    "--out", str(report_path),
                ],
                catch_exceptions=False,
            )
            assert result.exit_code == 0
            artifacts.append(
                (
                    (sim_dir / "transcripts.jsonl").read_bytes(),
                    report_path.read_bytes(),
                    (reviewed / "maps.json").read_bytes(),
                    goals_path.read_bytes(),
                )
            )
        assert artifacts[0][0] == artifacts[1][0], "transcripts differ between runs"
        assert artifacts[0][1] == artifacts[1][1], "reports differ between runs"
        assert artifacts[0][2] == artifacts[1][2], "maps differ between runs"
        assert artifacts[0][3] == artifacts[1][3], "goals differ between runs"
        report = json.loads(artifacts[0][1])
        assert report["goal_success_rate"] == 1.0
