"""Template NLG: turn user dialog acts into natural-language responses.

Templates are plug-and-play: a JSON document mapping act prefixes to template
lists with ``<placeholder>`` markers.  Lookup tries the exact act name first,
then the prefix before the first underscore, so ``inform_Email`` can carry
dedicated phrasings while plain ``inform`` covers the rest.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .errors import PlaceholderUnfilledError, TemplateMissingError

_PLACEHOLDER = re.compile(r"<([A-Za-z_][A-Za-z0-9_]*)>")

DEFAULT_TEMPLATES: dict[str, list[str]] = {
    "inform_intent": ["<value>"],
    "inform": ["<value>", "it is <value>", "sure, it's <value>"],
    "confirm": ["yes", "yes, that's right", "correct"],
    "acknowledge": ["ok", "alright", "got it"],
    "request": ["what is my <slot>?", "can you tell me my <slot>?"],
}


@dataclass
class NLGTemplates:
    by_prefix: dict[str, list[str]] = field(default_factory=lambda: {k: list(v) for k, v in DEFAULT_TEMPLATES.items()})

    def lookup(self, act: str) -> list[str]:
        if act in self.by_prefix:
            return self.by_prefix[act]
        prefix = act.split("_", 1)[0]
        if prefix in self.by_prefix:
            return self.by_prefix[prefix]
        raise TemplateMissingError(f"no templates for act '{act}'")

    def to_dict(self) -> dict:
        return {k: list(v) for k, v in self.by_prefix.items()}

    @classmethod
    def from_dict(cls, doc: dict) -> "NLGTemplates":
        merged = {k: list(v) for k, v in DEFAULT_TEMPLATES.items()}
        merged.update({k: [str(t) for t in v] for k, v in doc.items()})
        return cls(by_prefix=merged)

    @classmethod
    def load(cls, document: str) -> "NLGTemplates":
        return cls.from_dict(json.loads(document))


def render_nlg(act: str, slots: dict[str, str], templates: NLGTemplates, rng) -> str:
    """Pick a template uniformly at random and fill every placeholder.

    Raises PlaceholderUnfilledError if a template references a placeholder the
    rule did not fill, so broken template files surface immediately.
    """
    options = templates.lookup(act)
    template = rng.choice(options)

    def substitute(match: re.Match) -> str:
        key = match.group(1)
        if key not in slots:
            raise PlaceholderUnfilledError(f"template '{template}' for act '{act}' needs unfilled placeholder '<{key}>'")
        return slots[key]

    return _PLACEHOLDER.sub(substitute, template)
