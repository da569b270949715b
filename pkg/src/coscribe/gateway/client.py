"""Provider-agnostic model access with validation and bounded retries."""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field

from ..errors import GatewayError, SchemaParseError
from . import schemas, templates


@dataclass
class ChatExchange:
    template_id: str
    messages: list[dict]
    model_id: str
    raw_response: str | None = None
    parsed: object | None = None
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "template_id": self.template_id,
            "messages": self.messages,
            "model_id": self.model_id,
            "raw_response": self.raw_response,
            "parsed": self.parsed,
            "error": self.error,
        }


class HttpProvider:
    """OpenAI-style chat completions endpoint, configured from the env."""

    def __init__(
        self,
        endpoint: str | None = None,
        api_key: str | None = None,
        model: str | None = None,
        timeout_s: float | None = None,
    ):
        self.endpoint = endpoint or os.environ.get("MODEL_ENDPOINT", "")
        self.api_key = api_key or os.environ.get("MODEL_API_KEY", "")
        self.model = model or os.environ.get("MODEL_NAME", "")
        self.timeout_s = timeout_s if timeout_s is not None else float(os.environ.get("GATEWAY_TIMEOUT_S", "30"))
        if not self.endpoint:
            raise GatewayError("MODEL_ENDPOINT is not configured")

    def send(self, template_id: str, messages: list[dict]) -> str:
        import httpx

        url = self.endpoint.rstrip("/") + "/chat/completions"
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        try:
            resp = httpx.post(
                url,
                headers=headers,
                json={"model": self.model, "messages": messages},
                timeout=self.timeout_s,
            )
            resp.raise_for_status()
            data = resp.json()
            return data["choices"][0]["message"]["content"]
        except (httpx.HTTPError, KeyError, IndexError, json.JSONDecodeError) as e:
            raise GatewayError(f"model call failed: {e}") from e


@dataclass
class Gateway:
    """Renders prompts, calls the provider, validates output.

    Schema failures get one retry with a format reminder appended; transport
    failures retry with backoff up to the configured limit. Failures after
    that are typed errors for the caller, never fabricated content.
    """

    provider: object
    model_id: str = ""
    transport_retries: int = 2
    backoff_s: float = 0.0
    exchanges: list[ChatExchange] = field(default_factory=list)

    def request(self, template_id: str, bindings: dict):
        return self.complete(template_id, templates.render(template_id, bindings))

    def complete(self, template_id: str, messages: list[dict]):
        exchange = ChatExchange(template_id=template_id, messages=messages, model_id=self.model_id)
        self.exchanges.append(exchange)
        try:
            raw = self._send(template_id, messages)
            exchange.raw_response = raw
            try:
                exchange.parsed = schemas.parse(template_id, raw)
            except SchemaParseError:
                reminder = messages + [{"role": "user", "content": schemas.FORMAT_REMINDERS[template_id]}]
                raw = self._send(template_id, reminder)
                exchange.raw_response = raw
                exchange.parsed = schemas.parse(template_id, raw)
            return exchange.parsed
        except (GatewayError, SchemaParseError) as e:
            exchange.error = str(e)
            raise

    def _send(self, template_id: str, messages: list[dict]) -> str:
        last: Exception | None = None
        for attempt in range(self.transport_retries + 1):
            try:
                return self.provider.send(template_id, messages)
            except GatewayError as e:
                last = e
                if attempt < self.transport_retries and self.backoff_s:
                    time.sleep(self.backoff_s * (attempt + 1))
        assert last is not None
        raise last

    def exchange_log(self) -> list[dict]:
        return [e.to_dict() for e in self.exchanges]
