"""LLM paraphrasing clients and the validation applied to their output.

A client is anything with ``complete(prompt) -> str`` and a ``name``.
:class:`ChatCompletionClient` talks to a chat-completion style HTTP
endpoint; passing ``client=None`` to the higher-level helpers selects the
deterministic offline rewrites instead.
"""
from __future__ import annotations

import json
import os
import re
import urllib.error
import urllib.request
from collections import Counter
from typing import Optional, Protocol

API_KEY_ENV = "SPATIALQA_API_KEY"

CAPTION_PROMPT = (
    "Rewrite the sentences below in fluent, natural English. Keep every fact and the order "
    "of events unchanged and introduce nothing new. Every time, azimuth, elevation, "
    "distance, class name and source ID must appear with exactly the same value.\n"
    "Sentence:\n{text}"
)

QUESTION_PROMPT = (
    "Write {n} linguistically diverse rephrasings of the following question. Keep its "
    "meaning and keep every sound event name exactly as written. Return one rephrasing "
    "per line with no numbering.\nQuestion:\n{text}"
)

_NUMERAL = re.compile(r"-?\d+(?:\.\d+)?")


class RephraseError(RuntimeError):
    pass


class RephraseTransportError(RephraseError):
    """Network or protocol failure; safe to retry."""

    retryable = True


class RephraseValidationError(RephraseError):
    """The paraphrase altered content that must be preserved."""

    retryable = False


class RephraseClient(Protocol):
    name: str

    def complete(self, prompt: str) -> str: ...


class ChatCompletionClient:
    """Minimal client for an OpenAI-compatible ``/chat/completions`` endpoint."""

    def __init__(self, endpoint: str, model: str, api_key: Optional[str] = None, timeout: float = 30.0):
        self.endpoint = endpoint
        self.model = model
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV)
        self.timeout = timeout
        self.name = f"remote:{model}"

    def build_request(self, prompt: str) -> urllib.request.Request:
        body = {"model": self.model, "messages": [{"role": "user", "content": prompt}], "temperature": 0}
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        return urllib.request.Request(
            self.endpoint, data=json.dumps(body).encode("utf-8"), headers=headers, method="POST"
        )

    def complete(self, prompt: str) -> str:
        try:
            with urllib.request.urlopen(self.build_request(prompt), timeout=self.timeout) as resp:
                payload = json.loads(resp.read().decode("utf-8"))
        except (urllib.error.URLError, OSError, ValueError) as exc:
            raise RephraseTransportError(f"rephrase request failed: {exc}") from exc
        return parse_completion(payload)


def parse_completion(payload: dict) -> str:
    try:
        return payload["choices"][0]["message"]["content"].strip()
    except (KeyError, IndexError, TypeError, AttributeError):
        raise RephraseTransportError("malformed chat-completion response") from None


def numerals(text: str) -> Counter:
    return Counter(_NUMERAL.findall(text))


def check_numerals(original: str, paraphrase: str) -> None:
    """Raise unless every numeral of ``original`` survives in ``paraphrase``."""
    missing = numerals(original) - numerals(paraphrase)
    if missing:
        raise RephraseValidationError(f"paraphrase lost or altered numerals: {sorted(missing.elements())}")


def check_terms(paraphrase: str, required_terms) -> None:
    lowered = paraphrase.lower()
    missing = [t for t in required_terms if t.lower() not in lowered]
    if missing:
        raise RephraseValidationError(f"paraphrase dropped required terms: {missing}")
