"""Minimal chat-completion client used by the extraction and chaining layers.

The engine never depends on a particular provider: anything with a
``complete(prompt) -> str`` method works, and tests substitute scripted
fakes.  The HTTP client speaks the common chat-completions JSON shape and
is configured through the environment so credentials stay out of files
and logs.
"""

from __future__ import annotations

import os
from typing import Optional, Protocol

import requests

ENDPOINT_ENV = "SKILLCHAIN_LLM_ENDPOINT"
MODEL_ENV = "SKILLCHAIN_LLM_MODEL"
API_KEY_ENV = "SKILLCHAIN_LLM_API_KEY"


class TransportError(RuntimeError):
    """The model endpoint could not be reached or answered abnormally."""


class LlmClient(Protocol):
    def complete(self, prompt: str) -> str: ...


class HttpLlmClient:
    def __init__(
        self,
        endpoint: Optional[str] = None,
        model: Optional[str] = None,
        api_key: Optional[str] = None,
        timeout_s: float = 60.0,
    ):
        self.endpoint = endpoint or os.environ.get(ENDPOINT_ENV, "")
        self.model = model or os.environ.get(MODEL_ENV, "")
        self._api_key = api_key or os.environ.get(API_KEY_ENV, "")
        self.timeout_s = timeout_s
        if not self.endpoint:
            raise TransportError(f"no endpoint configured ({ENDPOINT_ENV} unset)")

    def complete(self, prompt: str) -> str:
        headers = {"Content-Type": "application/json"}
        if self._api_key:
            headers["Authorization"] = f"Bearer {self._api_key}"
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": 0,
        }
        try:
            resp = requests.post(self.endpoint, json=payload, headers=headers, timeout=self.timeout_s)
            resp.raise_for_status()
            body = resp.json()
            return body["choices"][0]["message"]["content"]
        except requests.RequestException as exc:
            raise TransportError(str(exc)) from exc
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise TransportError(f"unexpected response shape: {exc}") from exc
