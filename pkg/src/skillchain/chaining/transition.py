"""First-order transition model over action tokens.

Counts adjacent token pairs across a corpus and serves the row-normalized
conditional frequencies.  Rows that never occur as a predecessor fall back
to uniform so that rollouts always have a ranked candidate list.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, TextIO, Union

import numpy as np

from ..ingest.extraction import Corpus
from .base import ChainingBackend, EmptyCorpus, PredictionResult, UnknownToken


class IoFailure(OSError):
    """A heatmap could not be written."""


@dataclass(frozen=True)
class TransitionModel:
    vocabulary: tuple[str, ...]
    counts: np.ndarray  # |V| x |V| non-negative ints
    probs: np.ndarray  # |V| x |V| rows summing to 1

    def index(self, token: str) -> int:
        try:
            return self.vocabulary.index(token)
        except ValueError:
            raise UnknownToken(token)


def _normalize_rows(counts: np.ndarray) -> np.ndarray:
    probs = np.empty(counts.shape, dtype=float)
    for i, row in enumerate(counts):
        total = row.sum()
        if total == 0:
            probs[i] = 1.0 / counts.shape[1]
        else:
            probs[i] = row / total
    return probs


def fit_transition(corpus: Corpus) -> TransitionModel:
    """Count adjacent (current, next) pairs and normalize per row."""
    if not corpus.sequences:
        raise EmptyCorpus("cannot fit a transition model on an empty corpus")
    vocab = tuple(sorted(corpus.vocabulary))
    index = {t: i for i, t in enumerate(vocab)}
    counts = np.zeros((len(vocab), len(vocab)), dtype=np.int64)
    for seq in corpus.sequences:
        toks = seq.tokens
        for a, b in zip(toks, toks[1:]):
            counts[index[a], index[b]] += 1
    return TransitionModel(vocabulary=vocab, counts=counts, probs=_normalize_rows(counts))


def transition_heatmap(
    model: TransitionModel, out: Union[None, str, Path, TextIO] = None
) -> str:
    """Emit the probability matrix as CSV with header row and column.

    Values carry 12 significant digits, enough to round-trip to 1e-10.
    Returns the CSV text; when ``out`` names a path or file it is written
    there too (IoFailure on write errors).
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([""] + list(model.vocabulary))
    for token, row in zip(model.vocabulary, model.probs):
        writer.writerow([token] + [format(v, ".12g") for v in row])
    text = buf.getvalue()
    if out is not None:
        try:
            if hasattr(out, "write"):
                out.write(text)
            else:
                Path(out).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise IoFailure(str(exc)) from exc
    return text


def parse_heatmap(text: str) -> tuple[tuple[str, ...], np.ndarray]:
    """Inverse of transition_heatmap."""
    rows = list(csv.reader(io.StringIO(text)))
    vocab = tuple(rows[0][1:])
    probs = np.array([[float(v) for v in row[1:]] for row in rows[1:]], dtype=float)
    return vocab, probs


def adjacency_hypothesis(model: TransitionModel, a: str, b: str, epsilon: float) -> bool:
    """True when tokens a and b (effectively) never occur adjacently.

    Both directions must sit at or below epsilon in the fitted transition
    probabilities.
    """
    i, j = model.index(a), model.index(b)
    return model.probs[i, j] <= epsilon and model.probs[j, i] <= epsilon


class TransitionBackend:
    """Next-action prediction from the last token's transition row."""

    def __init__(self, model: TransitionModel, name: str = "transition"):
        self.model = model
        self.name = name

    def predict_next(self, history: Sequence[str]) -> PredictionResult:
        if not history:
            raise ValueError("history must be non-empty")
        i = self.model.index(history[-1])
        row = self.model.probs[i]
        vocab = self.model.vocabulary
        return PredictionResult.from_scores(vocab, dict(zip(vocab, row)))
