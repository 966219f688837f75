"""HTTP API over the store: the surface the dashboard and CLI `serve` expose.

All responses are JSON.  Simulation runs launch on a worker thread and are
pollable through the session record; ``?wait=true`` runs synchronously for
scripted use.  Contract violations surface as 4xx with a machine-readable
code, internal faults as 500; a handler failure never corrupts the store
thanks to its atomic writes.
"""
from __future__ import annotations

import threading

from fastapi import Body, FastAPI, Query, Request
from fastapi.responses import JSONResponse

from . import __version__
from .actmaps import Revision, build_act_maps, pending_review
from .botdef import definition_from_dict, validate_definition
from .connectors import HttpConnector
from .errors import (
    BotProbeError,
    NeedsReviewError,
    NotFoundError,
    SchemaError,
    ValidationError,
    VersionConflictError,
)
from .goals import generate_goals, generate_ontology, apply_overlay
from .graph import build_graph, enumerate_simple_paths
from .mockbot import FaultProfile, MockBotConnector
from .remediator import (
    aggregate_metrics,
    compare_sessions,
    dump_report,
    group_intent_errors,
    suggest_remediations,
)
from .simulator import SimConfig, dump_transcripts, load_transcripts, run_session
from .store import SessionStatus, Store

_STATUS_BY_ERROR = [
    (NotFoundError, 404),
    (VersionConflictError, 409),
    (NeedsReviewError, 409),
    (SchemaError, 400),
    (ValidationError, 400),
]


def _http_status(exc: BotProbeError) -> int:
    for kind, status in _STATUS_BY_ERROR:
        if isinstance(exc, kind):
            return status
    return 500


def _sim_config(config: dict) -> SimConfig:
    known = {
        "fuzzy_threshold",
        "max_turns",
        "parallelism",
        "seed",
        "repeat_request_limit",
        "no_match_limit",
        "force",
    }
    return SimConfig(**{k: v for k, v in config.items() if k in known})


def _provenance_for(goals) -> dict[str, str]:
    return {g.intent_query: g.source_utterance or g.intent_query for g in goals}


def create_app(store: Store, paraphrase_url: str | None = None, scorer_url: str | None = None) -> FastAPI:
    app = FastAPI(title="botprobe", version=__version__)

    @app.exception_handler(BotProbeError)
    async def bot_probe_error_handler(request: Request, exc: BotProbeError):
        body = {"code": exc.code, "message": str(exc)}
        if isinstance(exc, NeedsReviewError):
            body["needs_review"] = exc.pending
        return JSONResponse(status_code=_http_status(exc), content=body)

    @app.get("/")
    def root():
        return {"service": "botprobe", "version": __version__}

    # -- bots --------------------------------------------------------------

    @app.post("/bots", status_code=201)
    def create_bot(payload: dict = Body(...)):
        definition = definition_from_dict(payload)
        report = validate_definition(definition)
        if not report.ok:
            first = report.errors()[0]
            raise ValidationError(f"{first.path}: {first.message}", report.findings)
        bot_id = store.save_bot(definition)
        return {"id": bot_id, "bot_name": definition.bot_name}

    @app.get("/bots")
    def list_bots():
        return {"bots": store.list_bots()}

    @app.get("/bots/{bot_id}")
    def get_bot(bot_id: str):
        return store.load_bot(bot_id).to_dict()

    @app.post("/bots/{bot_id}/parse")
    def parse_bot(bot_id: str):
        definition = store.load_bot(bot_id)
        graph = build_graph(definition)
        maps = build_act_maps(definition, graph)
        version = store.save_maps(bot_id, maps)
        return {
            "maps_version": version,
            "maps": {name: m.to_dict() for name, m in maps.items()},
            "graph": graph.to_dict(),
            "needs_review": pending_review(maps),
        }

    @app.get("/bots/{bot_id}/dialog-act-maps")
    def get_maps(bot_id: str):
        version, maps = store.load_maps(bot_id)
        return {
            "version": version,
            "maps": {name: m.to_dict() for name, m in maps.items()},
            "needs_review": pending_review(maps),
        }

    @app.put("/bots/{bot_id}/dialog-act-maps")
    def put_revision(bot_id: str, payload: dict = Body(...)):
        base_version = payload.get("base_version", "")
        revision = Revision.from_dict(payload.get("revision", {}))
        new_version = store.revise_maps(bot_id, base_version, revision)
        return {"version": new_version}

    @app.get("/bots/{bot_id}/graph/paths")
    def graph_paths(
        bot_id: str,
        src: str = Query(...),
        dst: str = Query(...),
        max_depth: int = Query(20),
        max_paths: int = Query(500),
    ):
        definition = store.load_bot(bot_id)
        graph = build_graph(definition)
        result = enumerate_simple_paths(graph, src, dst, max_depth=max_depth, max_paths=max_paths)
        return {"paths": [p.to_dict() for p in result.paths], "truncated": result.truncated}

    @app.post("/bots/{bot_id}/goals")
    def create_goals(bot_id: str, payload: dict = Body(...)):
        definition = store.load_bot(bot_id)
        _, maps = store.load_maps(bot_id)
        seed = int(payload.get("seed", 0))
        ontology = generate_ontology(definition, seed=seed)
        if payload.get("ontology_overlay"):
            ontology = apply_overlay(ontology, payload["ontology_overlay"], definition)
        force = bool(payload.get("force", False))
        per_query = int(payload.get("per_query", 1))
        provenance = dict(payload.get("provenance") or {})
        queries_by_dialog = {d: list(q) for d, q in payload.get("queries", {}).items()}
        if payload.get("paraphrase"):
            queries_by_dialog = _expand_with_paraphrases(
                queries_by_dialog, dict(payload["paraphrase"]), provenance, seed
            )
        goals = []
        for dialog, queries in queries_by_dialog.items():
            if dialog not in maps:
                raise NotFoundError(f"dialog '{dialog}' has no map")
            goals.extend(
                generate_goals(maps[dialog], ontology, list(queries), per_query=per_query, force=force, provenance=provenance)
            )
        goals_id = store.save_goals(bot_id, goals)
        return {"goals_id": goals_id, "count": len(goals)}

    def _expand_with_paraphrases(
        queries_by_dialog: dict[str, list[str]],
        options: dict,
        provenance: dict[str, str],
        seed: int,
    ) -> dict[str, list[str]]:
        """Replace each utterance with its filtered paraphrases (plus itself)."""
        from .paraphrase import (
            BuiltinParaphraser,
            FilterConfig,
            RemoteParaphraser,
            filter_candidates,
            paraphrase,
            score_candidates,
        )
        from .textmetrics import RemoteScorer, TfidfScorer

        n = int(options.get("n", 5))
        engine = RemoteParaphraser(paraphrase_url) if paraphrase_url else BuiltinParaphraser(seed=seed)
        corpus = [u for batch in queries_by_dialog.values() for u in batch]
        per_source = {}
        everything = []
        for dialog, utterances in queries_by_dialog.items():
            for utterance in utterances:
                candidates = paraphrase(engine, utterance, n)
                per_source[(dialog, utterance)] = candidates
                everything.extend(candidates)
        scorer = RemoteScorer(scorer_url) if scorer_url else TfidfScorer(corpus + [c.text for c in everything])
        score_candidates(everything, scorer)
        cfg = FilterConfig(
            sim_low=float(options.get("sim_low", 0.50)),
            sim_high=float(options.get("sim_high", 0.99)),
            fuzz_max=int(options.get("fuzz_max", 70)),
        )
        expanded: dict[str, list[str]] = {}
        for (dialog, utterance), candidates in per_source.items():
            bucket = expanded.setdefault(dialog, [])
            provenance.setdefault(utterance, utterance)
            if options.get("keep_originals", True):
                bucket.append(utterance)
            for kept in filter_candidates(candidates, cfg):
                bucket.append(kept.text)
                provenance.setdefault(kept.text, utterance)
        return expanded

    # -- sessions -----------------------------------------------------------

    @app.post("/sessions", status_code=201)
    def create_session(payload: dict = Body(...)):
        config = dict(payload.get("config", {}))
        if payload.get("faults"):
            config["faults"] = payload["faults"]
        if payload.get("connector_url"):
            config["connector_url"] = payload["connector_url"]
        record = store.create_session(
            bot_id=payload["bot_id"],
            goals_id=payload["goals_id"],
            config=config,
            connector=payload.get("connector", "mock"),
        )
        store.transition_session(record.id, SessionStatus.NEEDS_REVIEW)
        return store.load_session(record.id).to_dict()

    def _execute_session(session_id: str) -> None:
        record = store.load_session(session_id)
        try:
            definition = store.load_bot(record.bot_id)
            _, maps = store.load_maps(record.bot_id)
            goals = store.load_goals(record.goals_id)
            cfg = _sim_config(record.config)
            if record.connector == "http":
                url = record.config.get("connector_url", "")

                def factory(goal):
                    return HttpConnector(url)

            else:
                profile = FaultProfile.from_dict(record.config.get("faults", {}))
                base_seed = cfg.seed

                def factory(goal):
                    return MockBotConnector(definition, profile, seed=f"{base_seed}:{goal.id}")

            result = run_session(factory, goals, maps, cfg=cfg)
            store.attach_artifact(session_id, "transcripts", dump_transcripts(result))
            report = aggregate_metrics(
                result.episodes,
                {
                    "session_id": session_id,
                    "seed": cfg.seed,
                    "n_resamples": int(record.config.get("n_resamples", 10_000)),
                    "generated_at": record.created_at,
                },
            )
            store.attach_artifact(session_id, "report", dump_report(report))
            provenance = _provenance_for(goals)
            groups = group_intent_errors(result.episodes, provenance)
            totals: dict[str, int] = {}
            for goal in goals:
                original = provenance[goal.intent_query]
                totals[original] = totals.get(original, 0) + 1
            suggestions = suggest_remediations(groups, totals)
            store.save_suggestions(session_id, suggestions)
            store.transition_session(session_id, SessionStatus.DONE)
        except Exception as exc:  # noqa: BLE001 - failure lands in the record
            store.transition_session(session_id, SessionStatus.FAILED, failure_reason=str(exc))

    @app.post("/sessions/{session_id}/run", status_code=202)
    def run_session_endpoint(session_id: str, wait: bool = Query(False)):
        record = store.load_session(session_id)
        if record.status is not SessionStatus.NEEDS_REVIEW:
            raise ValidationError(f"session is {record.status.value}, expected NeedsReview")
        cfg = _sim_config(record.config)
        _, maps = store.load_maps(record.bot_id)
        goals = store.load_goals(record.goals_id)
        pending = {
            dialog: acts
            for dialog, acts in pending_review(maps).items()
            if dialog in {g.goal_name for g in goals}
        }
        if pending and not cfg.force:
            raise NeedsReviewError(pending)
        store.transition_session(session_id, SessionStatus.RUNNING)
        if wait:
            _execute_session(session_id)
        else:
            threading.Thread(target=_execute_session, args=(session_id,), daemon=True).start()
        return store.load_session(session_id).to_dict()

    @app.get("/sessions")
    def list_sessions(bot_id: str | None = Query(None)):
        return {"sessions": [r.to_dict() for r in store.list_sessions(bot_id)]}

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return store.load_session(session_id).to_dict()

    @app.get("/sessions/{session_id}/report")
    def get_report(session_id: str):
        record = store.load_session(session_id)
        if record.status is not SessionStatus.DONE:
            return JSONResponse(
                status_code=404,
                content={"code": "not_ready", "status": record.status.value, "message": "report not available yet"},
            )
        return store.load_report(session_id).to_dict()

    @app.get("/sessions/{session_id}/errors")
    def get_errors(session_id: str, intent: str | None = Query(None)):
        record = store.load_session(session_id)
        path = store.artifact_path(session_id, "transcripts")
        result = load_transcripts(path.read_text(encoding="utf-8"))
        goals = store.load_goals(record.goals_id)
        groups = group_intent_errors(result.episodes, _provenance_for(goals))
        if intent:
            groups = [g for g in groups if g.true_intent == intent]
        failed = [e.to_dict() for e in result.episodes if e.outcome.value != "Success"]
        if intent:
            failed = [e for e in failed if e["goal_name"] == intent]
        return {"groups": [g.to_dict() for g in groups], "failed_episodes": failed}

    @app.get("/sessions/{session_id}/suggestions")
    def get_suggestions(session_id: str):
        suggestions = store.load_session_suggestions(session_id)
        accepted = {a.get("id") for a in store.list_acceptances(session_id)}
        out = []
        for suggestion in suggestions:
            doc = suggestion.to_dict()
            doc["accepted"] = suggestion.id in accepted
            out.append(doc)
        return {"suggestions": out}

    @app.post("/sessions/{session_id}/suggestions/accept")
    def accept_suggestion(session_id: str, payload: dict = Body(...)):
        suggestions = store.load_session_suggestions(session_id)
        known = {s.id for s in suggestions}
        if payload.get("id") not in known:
            raise NotFoundError(f"no suggestion '{payload.get('id')}' in session")
        acceptances = store.record_acceptance(session_id, {"id": payload["id"], "queries": payload.get("queries")})
        return {"accepted": [a["id"] for a in acceptances]}

    @app.get("/trend")
    def trend(bot_id: str = Query(...)):
        reports = []
        for record in store.list_sessions(bot_id):
            if record.status is SessionStatus.DONE:
                reports.append(store.load_report(record.id))
        if not reports:
            return {"sessions": []}
        return compare_sessions(reports)

    return app


def serve_api(store_dir: str, bind_addr: str = "127.0.0.1:8700") -> None:
    """Run the API with uvicorn; honors PARAPHRASE_URL/SCORER_URL when set."""
    import os

    import uvicorn

    host, _, port = bind_addr.partition(":")
    app = create_app(
        Store(store_dir),
        paraphrase_url=os.environ.get("PARAPHRASE_URL"),
        scorer_url=os.environ.get("SCORER_URL"),
    )
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8700), log_level="warning")
