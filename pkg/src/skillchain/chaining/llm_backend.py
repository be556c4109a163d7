"""Language-model next-action backend.

The prompt pins the model to the library vocabulary, and the reply is
checked against it locally: a verb outside the vocabulary is an error,
never a silent substitute.
"""

from __future__ import annotations

from typing import Sequence

from ..llm import LlmClient, TransportError
from ..skill_kb import normalize_verb
from .base import PredictionResult


class BackendUnavailable(RuntimeError):
    """The model endpoint cannot be reached."""


class HallucinatedToken(ValueError):
    """The model answered with a verb outside the vocabulary."""


class MalformedResponse(ValueError):
    """The model reply did not contain a single usable verb."""


NEXT_ACTION_TEMPLATE = (
    "You command a construction robot that performs one micro skill at a time.\n"
    "Task: [TASK]\n"
    "Allowed actions: [VOCABULARY]\n"
    "History: [HISTORY]\n"
    "Answer with the single allowed action that should come next. "
    "Reply with the action word only, nothing else."
)


def render_next_action_prompt(
    history: Sequence[str], task_label: str, vocabulary: Sequence[str]
) -> str:
    return (
        NEXT_ACTION_TEMPLATE.replace("[TASK]", task_label)
        .replace("[VOCABULARY]", ", ".join(vocabulary))
        .replace("[HISTORY]", " -> ".join(history))
    )


def llm_predict_next(
    history: Sequence[str],
    task_label: str,
    vocabulary: Sequence[str],
    client: LlmClient,
) -> PredictionResult:
    """Point-mass prediction from a single model call."""
    if not vocabulary:
        raise ValueError("vocabulary must be non-empty")
    prompt = render_next_action_prompt(history, task_label, vocabulary)
    try:
        response = client.complete(prompt)
    except TransportError as exc:
        raise BackendUnavailable(str(exc)) from exc
    lines = [ln for ln in response.splitlines() if ln.strip()]
    if not lines:
        raise MalformedResponse("empty model reply")
    verb = normalize_verb(lines[0])
    by_norm = {normalize_verb(t): t for t in vocabulary}
    if verb not in by_norm:
        raise HallucinatedToken(verb)
    token = by_norm[verb]
    return PredictionResult(
        distribution={t: 1.0 if t == token else 0.0 for t in vocabulary},
        argmax=token,
    )


class LlmNextActionBackend:
    def __init__(
        self,
        client: LlmClient,
        vocabulary: Sequence[str],
        task_label: str = "",
        name: str = "llm",
    ):
        self.client = client
        self.vocabulary = tuple(vocabulary)
        self.task_label = task_label
        self.name = name

    def predict_next(self, history: Sequence[str]) -> PredictionResult:
        return llm_predict_next(history, self.task_label, self.vocabulary, self.client)
