"""Deterministic scripted stand-in for the model provider.

Rules are evaluated in order; the first live rule whose template and matcher
fit the rendered prompt supplies the next canned response. A request nothing
matches raises instead of fabricating output.
"""

from __future__ import annotations

import json
import re
from pathlib import Path

from ..errors import GatewayError, MockScriptError


class MockRule:
    def __init__(self, spec: dict):
        self.template = spec.get("template")
        if not self.template:
            raise MockScriptError(f"mock rule missing 'template': {spec}")
        self.contains = spec.get("contains")
        self.regex = re.compile(spec["regex"]) if spec.get("regex") else None
        self.error = spec.get("error")
        if "responses" in spec:
            self.responses = [self._as_text(r) for r in spec["responses"]]
            self.remaining: int | None = len(self.responses)
        elif "response" in spec:
            self.responses = [self._as_text(spec["response"])]
            self.remaining = spec.get("times")  # None = unlimited
        elif "response_json" in spec:
            self.responses = [json.dumps(spec["response_json"], ensure_ascii=False)]
            self.remaining = spec.get("times")
        elif self.error:
            self.responses = []
            self.remaining = spec.get("times")
        else:
            raise MockScriptError(f"mock rule has no response: {spec}")
        self._cursor = 0

    @staticmethod
    def _as_text(value) -> str:
        return value if isinstance(value, str) else json.dumps(value, ensure_ascii=False)

    def matches(self, template_id: str, prompt: str) -> bool:
        if self.remaining is not None and self.remaining <= 0:
            return False
        if self.template != template_id:
            return False
        if self.contains is not None and self.contains not in prompt:
            return False
        if self.regex is not None and not self.regex.search(prompt):
            return False
        return True

    def consume(self) -> str:
        if self.remaining is not None:
            self.remaining -= 1
        if self.error:
            raise GatewayError(f"scripted failure: {self.error}")
        text = self.responses[min(self._cursor, len(self.responses) - 1)]
        if len(self.responses) > 1:
            self._cursor += 1
        return text


class MockScript:
    def __init__(self, rules: list[dict]):
        self.rules = [MockRule(r) for r in rules]
        self.requests: list[tuple[str, str]] = []

    @classmethod
    def from_file(cls, path: str | Path) -> "MockScript":
        data = json.loads(Path(path).read_text())
        rules = data["rules"] if isinstance(data, dict) else data
        return cls(rules)

    def send(self, template_id: str, messages: list[dict]) -> str:
        prompt = "\n".join(m["content"] for m in messages)
        self.requests.append((template_id, prompt))
        for rule in self.rules:
            if rule.matches(template_id, prompt):
                return rule.consume()
        raise MockScriptError(
            f"no mock rule for template {template_id!r}; prompt starts: {prompt[:160]!r}"
        )
