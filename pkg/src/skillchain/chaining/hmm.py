"""Hidden-state sequence model with expectation-maximization training.

Observations are skill tokens; hidden states are latent phases of a task.
Training is iterative expectation-maximization over the token sequences
with per-step scaling for numerical stability, seeded random initial
parameters for reproducibility, and a tiny probability floor so no row
ever collapses to exact zeros.

Next-token prediction comes in two flavours behind a flag:

* standard (default): sum over a state transition before emitting,
  the usual one-step predictive distribution;
* literal: compose the emission matrix directly with the filtered state
  posterior, skipping the transition step.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..ingest.extraction import Corpus
from ._kernels import impl as _kernels
from .base import ChainingBackend, EmptyCorpus, PredictionResult, UnknownToken

PROB_FLOOR = 1e-10


class InvalidConfig(ValueError):
    """Nonsensical training configuration."""


@dataclass(frozen=True)
class HmmModel:
    n_states: int
    vocabulary: tuple[str, ...]
    transition: np.ndarray  # n x n
    emission: np.ndarray  # n x |V|
    initial: np.ndarray  # n

    def encode(self, observed: Sequence[str]) -> np.ndarray:
        index = {t: i for i, t in enumerate(self.vocabulary)}
        try:
            return np.array([index[t] for t in observed], dtype=np.int32)
        except KeyError as exc:
            raise UnknownToken(exc.args[0]) from exc


def _floor_normalize(rows: np.ndarray) -> np.ndarray:
    floored = rows + PROB_FLOOR
    return floored / floored.sum(axis=-1, keepdims=True)


def _encode_corpus(corpus: Corpus, vocabulary: tuple[str, ...]) -> list[np.ndarray]:
    index = {t: i for i, t in enumerate(vocabulary)}
    return [
        np.array([index[t] for t in seq.tokens], dtype=np.int32)
        for seq in corpus.sequences
    ]


def _em_iteration(
    pi: np.ndarray, a: np.ndarray, b: np.ndarray, encoded: list[np.ndarray]
) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """One expectation-maximization sweep; returns updated parameters and
    the log-likelihood of the data under the *incoming* parameters."""
    n, n_symbols = b.shape
    pi_acc = np.zeros(n)
    trans_acc = np.zeros((n, n))
    emit_acc = np.zeros((n, n_symbols))
    loglik = 0.0
    for obs in encoded:
        ll, pi_part, trans_part, emit_part = _kernels.sequence_stats(pi, a, b, obs)
        loglik += ll
        pi_acc += pi_part
        trans_acc += trans_part
        emit_acc += emit_part
    return (
        _floor_normalize(pi_acc),
        _floor_normalize(trans_acc),
        _floor_normalize(emit_acc),
        loglik,
    )


def hmm_fit(
    corpus: Corpus,
    n_states: int,
    max_iters: int = 100,
    tol: float = 1e-6,
    seed: int = 0,
) -> HmmModel:
    """Fit by expectation-maximization; deterministic for a given seed.

    Stops when the improvement in total log-likelihood drops below ``tol``
    or after ``max_iters`` sweeps.  A single hidden state short-circuits to
    the closed form: unigram emission frequencies.
    """
    if not corpus.sequences:
        raise EmptyCorpus("cannot fit on an empty corpus")
    if n_states < 1:
        raise InvalidConfig(f"n_states must be >= 1, got {n_states}")
    if max_iters < 1:
        raise InvalidConfig(f"max_iters must be >= 1, got {max_iters}")
    if tol < 0:
        raise InvalidConfig(f"tol must be >= 0, got {tol}")

    vocab = tuple(sorted(corpus.vocabulary))
    encoded = _encode_corpus(corpus, vocab)

    if n_states == 1:
        counts = np.zeros(len(vocab))
        for obs in encoded:
            for o in obs:
                counts[o] += 1
        return HmmModel(
            n_states=1,
            vocabulary=vocab,
            transition=np.array([[1.0]]),
            emission=(counts / counts.sum()).reshape(1, -1),
            initial=np.array([1.0]),
        )

    rng = np.random.default_rng(seed)
    pi = rng.dirichlet(np.ones(n_states))
    a = rng.dirichlet(np.ones(n_states), size=n_states)
    b = rng.dirichlet(np.ones(len(vocab)), size=n_states)

    prev_ll = -np.inf
    for _ in range(max_iters):
        pi, a, b, ll = _em_iteration(pi, a, b, encoded)
        if ll - prev_ll < tol:
            break
        prev_ll = ll

    return HmmModel(
        n_states=n_states, vocabulary=vocab, transition=a, emission=b, initial=pi
    )


def em_step(model: HmmModel, corpus: Corpus) -> tuple[HmmModel, float]:
    """Run one re-estimation sweep.

    Returns the updated model and the log-likelihood of the corpus under
    the model *passed in*, so callers can track the training trajectory.
    """
    encoded = _encode_corpus(corpus, model.vocabulary)
    pi, a, b, ll = _em_iteration(model.initial, model.transition, model.emission, encoded)
    return (
        HmmModel(
            n_states=model.n_states,
            vocabulary=model.vocabulary,
            transition=a,
            emission=b,
            initial=pi,
        ),
        ll,
    )


def corpus_loglik(model: HmmModel, corpus: Corpus) -> float:
    """Total log-likelihood of a corpus under the model."""
    total = 0.0
    for seq in corpus.sequences:
        obs = model.encode(seq.tokens)
        _, scales = _kernels.forward(model.initial, model.transition, model.emission, obs)
        total += float(np.log(scales).sum())
    return total


def hmm_posterior(model: HmmModel, observed: Sequence[str]) -> np.ndarray:
    """State distribution at the final time given the whole observation
    sequence, computed with scaled forward/backward passes."""
    if not observed:
        raise ValueError("observed must be non-empty")
    obs = model.encode(observed)
    alpha, scales = _kernels.forward(model.initial, model.transition, model.emission, obs)
    beta = _kernels.backward(model.transition, model.emission, obs, scales)
    joint = alpha[-1] * beta[-1]
    return joint / joint.sum()


def hmm_predict_next(
    model: HmmModel, observed: Sequence[str], literal: bool = False
) -> PredictionResult:
    """Distribution over the next token given the observed history.

    ``literal=True`` composes the emission matrix with the current state
    posterior directly (no transition step); the default first propagates
    the posterior through the transition matrix.
    """
    posterior = hmm_posterior(model, observed)
    if literal:
        scores = posterior @ model.emission
    else:
        scores = (posterior @ model.transition) @ model.emission
    scores = scores / scores.sum()
    vocab = model.vocabulary
    return PredictionResult.from_scores(vocab, dict(zip(vocab, scores)))


class HmmBackend:
    def __init__(self, model: HmmModel, literal: bool = False, name: str = "hmm"):
        self.model = model
        self.literal = literal
        self.name = name

    def predict_next(self, history: Sequence[str]) -> PredictionResult:
        return hmm_predict_next(self.model, history, literal=self.literal)
