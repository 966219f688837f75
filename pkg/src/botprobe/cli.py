"""Headless pipeline driver: parse | goals | paraphrase | simulate | report |
suggest | export-augmented | paths | serve.

Exit codes: 0 success, 1 validation/contract failure, 2 runtime error.
Errors print to stderr as one JSON line with a machine-readable code.
All randomness hangs off --seed, so identical invocations produce
byte-identical artifact files.
"""
from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click

from .actmaps import Revision, apply_revision, build_act_maps, dump_maps, load_maps, pending_review
from .botdef import convert, dump_bot_definition
from .connectors import HttpConnector
from .errors import BotProbeError, NeedsReviewError, SchemaError, ValidationError
from .goals import apply_overlay, dump_goals, generate_goals, generate_ontology, generate_path_goals, load_goals
from .graph import Path as GraphPath
from .graph import build_graph, dump_paths_jsonl, enumerate_simple_paths
from .mockbot import FaultProfile, MockBotConnector
from .nlg import NLGTemplates
from .paraphrase import (
    BuiltinParaphraser,
    FilterConfig,
    RemoteParaphraser,
    dump_candidates,
    filter_candidates,
    paraphrase as run_provider,
    score_candidates,
)
from .remediator import (
    aggregate_metrics,
    compare_sessions,
    dump_report,
    dump_suggestions,
    export_augmented_training,
    group_intent_errors,
    load_report,
    load_suggestions,
    suggest_remediations,
)
from .simulator import SimConfig, dump_transcripts, load_transcripts, run_session
from .textmetrics import RemoteScorer, TfidfScorer

_VALIDATION_ERRORS = (ValidationError, SchemaError, NeedsReviewError)


def _fail(exc: Exception, exit_code: int) -> None:
    code = getattr(exc, "code", "runtime")
    click.echo(json.dumps({"code": code, "message": str(exc)}), err=True)
    sys.exit(exit_code)


def handled(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except _VALIDATION_ERRORS as exc:
            _fail(exc, 1)
        except BotProbeError as exc:
            _fail(exc, 2)
        except (OSError, KeyError, ValueError) as exc:
            _fail(exc, 2)

    return wrapper


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _write(path: Path, content: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(content, encoding="utf-8")


@click.group()
def main():
    """Simulation-based testing for task-oriented bots."""


@main.command("parse")
@click.option("--bot", "bot_path", required=True, type=click.Path(exists=True), help="Bot definition file.")
@click.option("--adaptor", default="native", show_default=True, help="Registered adaptor for the input format.")
@click.option("--revisions", "revisions_path", type=click.Path(exists=True), help="JSONL revision records to apply.")
@click.option("--out", "out_dir", required=True, type=click.Path(), help="Output directory for maps and graph.")
@handled
def parse_cmd(bot_path, adaptor, revisions_path, out_dir):
    """Convert a bot definition into dialog-act maps and a conversation graph."""
    definition = convert(adaptor, Path(bot_path).read_bytes())
    graph = build_graph(definition)
    maps = build_act_maps(definition, graph)
    if revisions_path:
        for line in _read(revisions_path).splitlines():
            if not line.strip():
                continue
            revision = Revision.from_dict(json.loads(line))
            maps[revision.dialog] = apply_revision(maps[revision.dialog], revision)
    out = Path(out_dir)
    _write(out / "bot.json", dump_bot_definition(definition))
    _write(out / "maps.json", dump_maps(maps))
    _write(out / "graph.json", json.dumps(graph.to_dict(), indent=2, ensure_ascii=False) + "\n")
    pending = pending_review(maps)
    click.echo(
        json.dumps(
            {"dialogs": len(definition.dialogs), "maps": len(maps), "needs_review": pending},
            ensure_ascii=False,
        )
    )


@main.command("goals")
@click.option("--bot", "bot_path", required=True, type=click.Path(exists=True))
@click.option("--maps", "maps_path", required=True, type=click.Path(exists=True))
@click.option("--queries", "queries_path", required=True, type=click.Path(exists=True), help="JSON {dialog: [queries]} or {dialog: {query: original}}.")
@click.option("--per-query", default=1, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--ontology", "overlay_path", type=click.Path(exists=True), help="Ontology overlay {entity_or_slot: [values]}.")
@click.option("--paths-file", "paths_path", type=click.Path(exists=True), help="JSONL paths for multi-intent goals.")
@click.option("--force", is_flag=True, help="Generate even while acts await review.")
@click.option("--out", "out_path", required=True, type=click.Path())
@handled
def goals_cmd(bot_path, maps_path, queries_path, per_query, seed, overlay_path, paths_path, force, out_path):
    """Generate simulation goals from reviewed dialog-act maps."""
    definition = convert("native", Path(bot_path).read_bytes())
    maps = load_maps(_read(maps_path))
    ontology = generate_ontology(definition, seed=seed)
    if overlay_path:
        ontology = apply_overlay(ontology, json.loads(_read(overlay_path)), definition)
    queries_doc = json.loads(_read(queries_path))
    goals = []
    provenance_by_dialog: dict[str, dict[str, str]] = {}
    for dialog, queries in queries_doc.items():
        if isinstance(queries, dict):
            provenance_by_dialog[dialog] = dict(queries)
            queries = list(queries)
        else:
            provenance_by_dialog[dialog] = {q: q for q in queries}
        if dialog not in maps:
            raise ValidationError(f"no dialog-act map for dialog '{dialog}'")
        goals.extend(
            generate_goals(
                maps[dialog],
                ontology,
                list(queries),
                per_query=per_query,
                force=force,
                provenance=provenance_by_dialog[dialog],
            )
        )
    if paths_path:
        from .actmaps import build_local_maps

        graph = build_graph(definition)
        local = build_local_maps(definition)
        first_queries = {d: next(iter(q), None) for d, q in queries_doc.items()}
        for i, line in enumerate(l for l in _read(paths_path).splitlines() if l.strip()):
            doc = json.loads(line)
            path = GraphPath(tuple(doc["nodes"]), tuple(doc.get("edge_labels", [])))
            node_queries = {n: first_queries[n] for n in path.nodes if first_queries.get(n)}
            goals.append(
                generate_path_goals(graph, local, path, ontology, node_queries, goal_id=f"path_{i}_{'__'.join(path.nodes)}")
            )
    _write(Path(out_path), dump_goals(goals))
    click.echo(json.dumps({"goals": len(goals), "out": str(out_path)}))


@main.command("paraphrase")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True), help="JSON {dialog: [utterances]}.")
@click.option("--provider", type=click.Choice(["builtin", "remote"]), default="builtin", show_default=True)
@click.option("--remote-url", envvar="PARAPHRASE_URL", help="Paraphrase service endpoint (or PARAPHRASE_URL).")
@click.option("--scorer-url", envvar="SCORER_URL", help="Similarity service endpoint (or SCORER_URL).")
@click.option("--n", default=5, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--sim-low", default=0.50, show_default=True, type=float)
@click.option("--sim-high", default=0.99, show_default=True, type=float)
@click.option("--fuzz-max", default=70, show_default=True, type=int)
@click.option("--out", "out_dir", required=True, type=click.Path())
@handled
def paraphrase_cmd(in_path, provider, remote_url, scorer_url, n, seed, sim_low, sim_high, fuzz_max, out_dir):
    """Paraphrase intent utterances and keep the diverse-but-faithful ones."""
    utterances_doc = json.loads(_read(in_path))
    if provider == "remote":
        if not remote_url:
            raise ValidationError("remote provider needs --remote-url or PARAPHRASE_URL")
        engine = RemoteParaphraser(remote_url)
    else:
        engine = BuiltinParaphraser(seed=seed)
    corpus = [u for batch in utterances_doc.values() for u in batch]
    all_candidates = []
    per_source = {}
    for dialog, utterances in utterances_doc.items():
        for utterance in utterances:
            candidates = run_provider(engine, utterance, n)
            per_source[(dialog, utterance)] = candidates
            all_candidates.extend(candidates)
    scorer = RemoteScorer(scorer_url) if scorer_url else TfidfScorer(corpus + [c.text for c in all_candidates])
    cfg = FilterConfig(sim_low=sim_low, sim_high=sim_high, fuzz_max=fuzz_max)
    score_candidates(all_candidates, scorer)
    queries: dict[str, dict[str, str]] = {}
    kept_count = 0
    for (dialog, utterance), candidates in per_source.items():
        kept = filter_candidates(candidates, cfg)
        kept_count += len(kept)
        bucket = queries.setdefault(dialog, {})
        for candidate in kept:
            bucket[candidate.text] = utterance
    out = Path(out_dir)
    _write(out / "candidates.jsonl", dump_candidates(all_candidates))
    _write(out / "queries.json", json.dumps(queries, indent=2, ensure_ascii=False) + "\n")
    provenance = {text: original for bucket in queries.values() for text, original in bucket.items()}
    _write(out / "provenance.json", json.dumps(provenance, indent=2, ensure_ascii=False) + "\n")
    click.echo(json.dumps({"candidates": len(all_candidates), "kept": kept_count}))


@main.command("simulate")
@click.option("--bot", "bot_path", required=True, type=click.Path(exists=True))
@click.option("--maps", "maps_path", required=True, type=click.Path(exists=True))
@click.option("--goals", "goals_path", required=True, type=click.Path(exists=True))
@click.option("--connector", type=click.Choice(["mock", "http"]), default="mock", show_default=True)
@click.option("--connector-url", help="Bot endpoint for the http connector.")
@click.option("--faults", "faults_path", type=click.Path(exists=True), help="FaultProfile JSON for the mock connector.")
@click.option("--templates", "templates_path", type=click.Path(exists=True), help="User response templates JSON.")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--threshold", default=85, show_default=True, type=int, help="Fuzzy-match threshold.")
@click.option("--max-turns", default=30, show_default=True, type=int)
@click.option("--parallelism", default=1, show_default=True, type=int)
@click.option("--force", is_flag=True, help="Simulate even while acts await review.")
@click.option("--out", "out_dir", required=True, type=click.Path())
@handled
def simulate_cmd(
    bot_path, maps_path, goals_path, connector, connector_url, faults_path, templates_path,
    seed, threshold, max_turns, parallelism, force, out_dir,
):
    """Run one episode per goal against the chosen connector."""
    definition = convert("native", Path(bot_path).read_bytes())
    maps = load_maps(_read(maps_path))
    goals = load_goals(_read(goals_path))
    templates = NLGTemplates.load(_read(templates_path)) if templates_path else None
    cfg = SimConfig(
        fuzzy_threshold=threshold,
        max_turns=max_turns,
        parallelism=parallelism,
        seed=seed,
        force=force,
    )
    if connector == "http":
        if not connector_url:
            raise ValidationError("http connector needs --connector-url")

        def factory(goal):
            return HttpConnector(connector_url)

    else:
        profile = FaultProfile.load(_read(faults_path)) if faults_path else FaultProfile.zero_fault()

        def factory(goal):
            return MockBotConnector(definition, profile, seed=f"{seed}:{goal.id}")

    result = run_session(factory, goals, maps, templates=templates, cfg=cfg)
    _write(Path(out_dir) / "transcripts.jsonl", dump_transcripts(result))
    click.echo(json.dumps({"episodes": len(result.episodes), "counts": result.counts, "success_rate": result.success_rate}))


@main.command("report")
@click.option("--transcripts", "transcripts_path", type=click.Path(exists=True))
@click.option("--session-id", default="session", show_default=True)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--resamples", default=10000, show_default=True, type=int)
@click.option("--generated-at", default=None, help="Timestamp for the report (omitted = reproducible output).")
@click.option("--trend", is_flag=True, help="Build a trend document from report files instead.")
@click.option("--out", "out_path", required=True, type=click.Path())
@click.argument("report_files", nargs=-1, type=click.Path(exists=True))
@handled
def report_cmd(transcripts_path, session_id, seed, resamples, generated_at, trend, out_path, report_files):
    """Aggregate transcripts into a health report (or reports into a trend)."""
    if trend:
        if not report_files:
            raise ValidationError("--trend needs report files")
        reports = [load_report(_read(p)) for p in report_files]
        _write(Path(out_path), json.dumps(compare_sessions(reports), indent=2, ensure_ascii=False) + "\n")
        click.echo(json.dumps({"sessions": len(reports), "out": str(out_path)}))
        return
    if not transcripts_path:
        raise ValidationError("need --transcripts (or --trend with report files)")
    result = load_transcripts(_read(transcripts_path))
    report = aggregate_metrics(
        result.episodes,
        {"session_id": session_id, "seed": seed, "n_resamples": resamples, "generated_at": generated_at},
    )
    _write(Path(out_path), dump_report(report))
    click.echo(json.dumps({"success_rate": report.goal_success_rate, "macro_f1": report.macro_f1}))


@main.command("suggest")
@click.option("--transcripts", "transcripts_path", required=True, type=click.Path(exists=True))
@click.option("--goals", "goals_path", required=True, type=click.Path(exists=True), help="Goals file (provenance source).")
@click.option("--move-threshold", default=0.8, show_default=True, type=float)
@click.option("--out", "out_path", required=True, type=click.Path())
@handled
def suggest_cmd(transcripts_path, goals_path, move_threshold, out_path):
    """Distill intent errors into remediation suggestions."""
    from .remediator import RemediationConfig

    result = load_transcripts(_read(transcripts_path))
    goals = load_goals(_read(goals_path))
    provenance = {g.intent_query: g.source_utterance or g.intent_query for g in goals}
    totals: dict[str, int] = {}
    for goal in goals:
        original = provenance[goal.intent_query]
        totals[original] = totals.get(original, 0) + 1
    groups = group_intent_errors(result.episodes, provenance)
    suggestions = suggest_remediations(groups, totals, RemediationConfig(move_threshold=move_threshold))
    _write(Path(out_path), dump_suggestions(suggestions))
    click.echo(json.dumps({"groups": len(groups), "suggestions": len(suggestions)}))


@main.command("export-augmented")
@click.option("--bot", "bot_path", required=True, type=click.Path(exists=True))
@click.option("--suggestions", "suggestions_path", required=True, type=click.Path(exists=True))
@click.option("--accept", "accept_path", required=True, type=click.Path(exists=True), help="JSON list of suggestion ids or {id, queries} records.")
@click.option("--out", "out_path", required=True, type=click.Path())
@handled
def export_augmented_cmd(bot_path, suggestions_path, accept_path, out_path):
    """Fold accepted suggestions into the intent training sets."""
    definition = convert("native", Path(bot_path).read_bytes())
    suggestions = load_suggestions(_read(suggestions_path))
    raw = json.loads(_read(accept_path))
    acceptances = [{"id": a} if isinstance(a, str) else dict(a) for a in raw]
    dataset = export_augmented_training(definition, suggestions, acceptances)
    _write(Path(out_path), json.dumps(dataset, indent=2, ensure_ascii=False) + "\n")
    click.echo(json.dumps({"intents": len(dataset["intents"]), "counts": dataset["counts"]}))


@main.command("paths")
@click.option("--bot", "bot_path", required=True, type=click.Path(exists=True))
@click.option("--src", required=True)
@click.option("--dst", required=True)
@click.option("--max-depth", default=20, show_default=True, type=int)
@click.option("--max-paths", default=500, show_default=True, type=int)
@click.option("--out", "out_path", required=True, type=click.Path())
@handled
def paths_cmd(bot_path, src, dst, max_depth, max_paths, out_path):
    """Enumerate simple conversation paths between two dialogs."""
    definition = convert("native", Path(bot_path).read_bytes())
    graph = build_graph(definition)
    result = enumerate_simple_paths(graph, src, dst, max_depth=max_depth, max_paths=max_paths)
    _write(Path(out_path), dump_paths_jsonl(result.paths))
    click.echo(json.dumps({"paths": len(result.paths), "truncated": result.truncated}))


@main.command("serve")
@click.option("--store", "store_dir", envvar="STORE_DIR", required=True, type=click.Path(), help="Store directory (or STORE_DIR).")
@click.option("--bind", "bind_addr", envvar="BIND_ADDR", default="127.0.0.1:8700", show_default=True, help="host:port (or BIND_ADDR).")
@handled
def serve_cmd(store_dir, bind_addr):
    """Serve the HTTP API backed by a store directory."""
    from .api import serve_api

    serve_api(store_dir, bind_addr)


if __name__ == "__main__":
    main()
