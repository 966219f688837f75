from __future__ import annotations

from pathlib import Path

import pytest

from botprobe.actmaps import build_act_maps, confirm_reviewed
from botprobe.botdef import load_bot_definition
from botprobe.goals import generate_goals, generate_ontology
from botprobe.graph import build_graph

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def template_bot_text() -> str:
    return (FIXTURES / "template_bot.json").read_text(encoding="utf-8")


@pytest.fixture()
def template_bot(template_bot_text):
    return load_bot_definition(template_bot_text)


@pytest.fixture()
def template_graph(template_bot):
    return build_graph(template_bot)


@pytest.fixture()
def template_maps(template_bot, template_graph):
    """Freshly inferred maps, success acts still flagged needs_review."""
    return build_act_maps(template_bot, template_graph)


@pytest.fixture()
def reviewed_maps(template_maps):
    """Maps after the reviewer confirmed every flagged act."""
    return {name: confirm_reviewed(m) for name, m in template_maps.items()}


@pytest.fixture()
def template_ontology(template_bot):
    return generate_ontology(template_bot, seed=7)


def goals_for(definition, maps, ontology, dialog: str, count: int = 1, query_index: int = 0):
    """Helper: goals for one intent dialog using its training utterances as queries."""
    intent = next(i for i in definition.intents if i.name == dialog)
    queries = [intent.utterances[query_index]]
    return generate_goals(maps[dialog], ontology, queries, per_query=count, force=True)


@pytest.fixture()
def goal_factory(template_bot, reviewed_maps, template_ontology):
    def make(dialog: str, count: int = 1, query_index: int = 0):
        return goals_for(template_bot, reviewed_maps, template_ontology, dialog, count, query_index)

    return make
