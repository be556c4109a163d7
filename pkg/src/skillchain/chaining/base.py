"""Shared surface for next-action prediction backends."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Protocol, Sequence, runtime_checkable


class EmptyCorpus(ValueError):
    """An operation that needs training or test sequences got none."""


class UnknownToken(KeyError):
    """A token outside the model vocabulary was supplied."""


@dataclass(frozen=True)
class PredictionResult:
    """A normalized distribution over next tokens plus its argmax.

    Ties break toward the earlier token in the backend's vocabulary order,
    which keeps rollouts deterministic.
    """

    distribution: dict[str, float]
    argmax: str

    @staticmethod
    def from_scores(vocabulary: Sequence[str], scores: Mapping[str, float]) -> "PredictionResult":
        total = sum(scores.get(t, 0.0) for t in vocabulary)
        if total <= 0.0:
            dist = {t: 1.0 / len(vocabulary) for t in vocabulary}
        else:
            dist = {t: scores.get(t, 0.0) / total for t in vocabulary}
        best = max(vocabulary, key=lambda t: (dist[t], -vocabulary.index(t)))
        return PredictionResult(distribution=dist, argmax=best)


@runtime_checkable
class ChainingBackend(Protocol):
    """Anything that can guess the next action from an action history."""

    name: str

    def predict_next(self, history: Sequence[str]) -> PredictionResult: ...
