"""Macro-level action chaining: models, evaluation, and rollout.

Four interchangeable backends guess the next action from an action
history: a first-order transition model, a tree-structured co-occurrence
model, a hidden-state sequence model, and an external language model.  A
recurrent-network backend slot is reserved in the registry but not
implemented.
"""

from __future__ import annotations

from .base import ChainingBackend, EmptyCorpus, PredictionResult, UnknownToken
from .chow_liu import ChowLiuBackend, ChowLiuTree, SingletonVocabulary, fit_chow_liu
from .evaluate import (
    MaxLenExceeded,
    NoContinuousSuccessor,
    chain_task,
    evaluate,
    evaluation_report,
)
from .hmm import (
    HmmBackend,
    HmmModel,
    InvalidConfig,
    corpus_loglik,
    em_step,
    hmm_fit,
    hmm_posterior,
    hmm_predict_next,
)
from .info import EmptyTable, mutual_information
from .llm_backend import (
    BackendUnavailable,
    HallucinatedToken,
    LlmNextActionBackend,
    MalformedResponse,
    llm_predict_next,
    render_next_action_prompt,
)
from .serialize import load_model, model_from_json, model_to_json, save_model
from .transition import (
    IoFailure,
    TransitionBackend,
    TransitionModel,
    adjacency_hypothesis,
    fit_transition,
    parse_heatmap,
    transition_heatmap,
)
from ._kernels import kernel_backend


def backend_for_model(model, **kwargs) -> ChainingBackend:
    """Wrap a fitted model in its prediction backend."""
    if isinstance(model, TransitionModel):
        return TransitionBackend(model, **kwargs)
    if isinstance(model, ChowLiuTree):
        return ChowLiuBackend(model, **kwargs)
    if isinstance(model, HmmModel):
        return HmmBackend(model, **kwargs)
    raise TypeError(f"no backend for {type(model).__name__}")


def fit_named(kind: str, corpus, **kwargs):
    """Fit a model by registry name: transition | chowliu | hmm | lstm."""
    from .transition import fit_transition as _fit_transition

    if kind == "transition":
        return _fit_transition(corpus)
    if kind == "chowliu":
        return fit_chow_liu(corpus, **kwargs)
    if kind == "hmm":
        return hmm_fit(corpus, **kwargs)
    if kind == "lstm":
        raise NotImplementedError("recurrent-network backend is a reserved slot")
    raise ValueError(f"unknown model kind {kind!r}")


__all__ = [
    "BackendUnavailable",
    "ChainingBackend",
    "ChowLiuBackend",
    "ChowLiuTree",
    "EmptyCorpus",
    "EmptyTable",
    "HallucinatedToken",
    "HmmBackend",
    "HmmModel",
    "InvalidConfig",
    "IoFailure",
    "LlmNextActionBackend",
    "MalformedResponse",
    "MaxLenExceeded",
    "NoContinuousSuccessor",
    "PredictionResult",
    "SingletonVocabulary",
    "TransitionBackend",
    "TransitionModel",
    "UnknownToken",
    "adjacency_hypothesis",
    "backend_for_model",
    "chain_task",
    "corpus_loglik",
    "em_step",
    "evaluate",
    "evaluation_report",
    "fit_chow_liu",
    "fit_named",
    "fit_transition",
    "hmm_fit",
    "hmm_posterior",
    "hmm_predict_next",
    "kernel_backend",
    "llm_predict_next",
    "load_model",
    "model_from_json",
    "model_to_json",
    "mutual_information",
    "parse_heatmap",
    "render_next_action_prompt",
    "save_model",
    "transition_heatmap",
]
