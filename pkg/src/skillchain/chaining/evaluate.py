"""Backend evaluation and continuity-guarded chain rollout."""

from __future__ import annotations

from typing import Optional, Sequence

from ..ingest.extraction import Corpus
from ..skill_kb import SkillLibrary, check_chain_continuity
from .base import ChainingBackend, EmptyCorpus, PredictionResult


class NoContinuousSuccessor(RuntimeError):
    """No vocabulary token preserves object-state continuity."""


class MaxLenExceeded(RuntimeError):
    """The rollout hit the length cap before reaching the finish sentinel."""

    def __init__(self, partial: list[str]):
        super().__init__(f"no terminal sentinel within {len(partial)} tokens")
        self.partial = partial


def evaluate(backend: ChainingBackend, test: Corpus) -> float:
    """Next-action accuracy over every prediction position in the corpus.

    For each sequence and each position t >= 1 the backend predicts
    token t from the prefix; accuracy is correct / total predictions.
    """
    if not test.sequences:
        raise EmptyCorpus("cannot evaluate on an empty corpus")
    total = correct = 0
    for seq in test.sequences:
        toks = seq.tokens
        for t in range(1, len(toks)):
            prediction = backend.predict_next(toks[:t])
            total += 1
            correct += prediction.argmax == toks[t]
    if total == 0:
        raise EmptyCorpus("corpus holds no prediction positions (all sequences length 1)")
    return correct / total


def evaluation_report(backend: ChainingBackend, test: Corpus) -> dict:
    """JSON-ready accuracy summary."""
    if not test.sequences:
        raise EmptyCorpus("cannot evaluate on an empty corpus")
    total = correct = 0
    for seq in test.sequences:
        toks = seq.tokens
        for t in range(1, len(toks)):
            total += 1
            correct += backend.predict_next(toks[:t]).argmax == toks[t]
    if total == 0:
        raise EmptyCorpus("corpus holds no prediction positions (all sequences length 1)")
    return {
        "backend": backend.name,
        "n_predictions": total,
        "n_correct": correct,
        "accuracy": correct / total,
    }


def _ranked_candidates(prediction: PredictionResult, lib: SkillLibrary) -> list[str]:
    dist = prediction.distribution
    ordered = list(dist.keys())
    rank = {t: i for i, t in enumerate(ordered)}
    extras = sorted(sid for sid in lib.ids() if sid not in dist)
    candidates = ordered + extras
    return sorted(candidates, key=lambda t: (-dist.get(t, 0.0), rank.get(t, len(rank)), t))


def chain_task(
    backend: ChainingBackend,
    lib: SkillLibrary,
    start: str,
    max_len: int,
) -> list[str]:
    """Greedy rollout that never breaks object-state continuity.

    At each step the backend's candidates are tried in descending
    probability; the first one whose begin state equals the current end
    state is taken.  The chain ends at a finish sentinel.  Raises
    NoContinuousSuccessor when nothing links, and MaxLenExceeded (with the
    partial chain attached) when the cap is reached first.
    """
    if max_len < 1:
        raise ValueError(f"max_len must be >= 1, got {max_len}")
    lib.skill(start)  # raises UnknownSkillId
    chain = [start]
    while not lib.skill(chain[-1]).is_finish_sentinel:
        if len(chain) >= max_len:
            raise MaxLenExceeded(chain)
        prediction = backend.predict_next(chain)
        last = lib.skill(chain[-1])
        chosen: Optional[str] = None
        for candidate in _ranked_candidates(prediction, lib):
            if candidate not in lib:
                continue
            if lib.skill(candidate).begin_state == last.end_state:
                chosen = candidate
                break
        if chosen is None:
            raise NoContinuousSuccessor(f"no continuous successor after {chain[-1]!r}")
        chain.append(chosen)
    continuous, first_break = check_chain_continuity(chain, lib)
    assert continuous, f"rollout produced a discontinuous chain at {first_break}"
    return chain
