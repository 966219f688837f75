"""Connector contract: the transport between the simulator and a bot.

A connector owns one conversation channel.  The simulator only ever calls
start_session / send / close, so any bot platform can be plugged in by
implementing these three calls.  Connectors may optionally expose
``bind_goal`` — a test-only side channel the in-process mock uses to learn
ground truth (true intent of unseen paraphrases, path guidance); network
connectors for real platforms must ignore it.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import httpx

from .errors import ConnectorError


@dataclass
class BotReply:
    """One bot message as received over the wire.

    ``dialog`` is an optional routing hint some platforms expose (their
    predicted dialog/intent, with out-of-domain fallbacks mapped to "none").
    """

    text: str
    dialog: str | None = None

    def to_dict(self) -> dict:
        out: dict = {"text": self.text}
        if self.dialog is not None:
            out["dialog"] = self.dialog
        return out


@runtime_checkable
class Connector(Protocol):
    def start_session(self) -> str: ...

    def send(self, session: str, user_text: str) -> list[BotReply]: ...

    def close(self, session: str) -> None: ...


class HttpConnector:
    """Generic JSON-over-HTTP bridge to an external bot.

    Wire contract:
      POST {base}/start  {}                      -> {"session": str}
      POST {base}/send   {session, text}        -> {"messages": [{text, dialog?}]}
      POST {base}/close  {session}              -> {}
    """

    def __init__(self, base_url: str, timeout: float = 30.0):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout

    def _post(self, route: str, payload: dict) -> dict:
        try:
            response = httpx.post(f"{self.base_url}/{route}", json=payload, timeout=self.timeout)
            response.raise_for_status()
            return response.json()
        except Exception as exc:  # noqa: BLE001 - transport failures wrap uniformly
            raise ConnectorError(f"bot endpoint {self.base_url}/{route} failed: {exc}") from exc

    def start_session(self) -> str:
        return str(self._post("start", {})["session"])

    def send(self, session: str, user_text: str) -> list[BotReply]:
        doc = self._post("send", {"session": session, "text": user_text})
        return [BotReply(text=str(m["text"]), dialog=m.get("dialog")) for m in doc.get("messages", [])]

    def close(self, session: str) -> None:
        self._post("close", {"session": session})
