"""Model files: JSON with explicit vocabulary order and lossless matrices.

Probabilities are stored as decimal strings at 17 significant digits,
which round-trips IEEE doubles exactly.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Union

import numpy as np

from .chow_liu import ChowLiuTree
from .hmm import HmmModel
from .transition import TransitionModel


def _encode(value: float) -> str:
    return format(float(value), ".17g")


def _matrix(rows: np.ndarray) -> list[list[str]]:
    return [[_encode(v) for v in row] for row in np.atleast_2d(rows)]


def _vector(row: np.ndarray) -> list[str]:
    return [_encode(v) for v in row]


def model_to_json(model) -> dict:
    if isinstance(model, TransitionModel):
        return {
            "kind": "transition",
            "vocabulary": list(model.vocabulary),
            "counts": [[int(c) for c in row] for row in model.counts],
            "probs": _matrix(model.probs),
        }
    if isinstance(model, ChowLiuTree):
        return {
            "kind": "chow_liu",
            "nodes": list(model.nodes),
            "edges": [[i, j, _encode(w)] for i, j, w in model.edges],
            "root": model.root,
            "parents": dict(model.parents),
            "edge_cpts": {c: [_encode(p0), _encode(p1)] for c, (p0, p1) in model.edge_cpts.items()},
            "root_marginal": _encode(model.root_marginal),
        }
    if isinstance(model, HmmModel):
        return {
            "kind": "hmm",
            "n_states": model.n_states,
            "vocabulary": list(model.vocabulary),
            "transition": _matrix(model.transition),
            "emission": _matrix(model.emission),
            "initial": _vector(model.initial),
        }
    raise TypeError(f"unsupported model type {type(model).__name__}")


def model_from_json(doc: dict):
    kind = doc["kind"]
    if kind == "transition":
        return TransitionModel(
            vocabulary=tuple(doc["vocabulary"]),
            counts=np.array(doc["counts"], dtype=np.int64),
            probs=np.array([[float(v) for v in row] for row in doc["probs"]]),
        )
    if kind == "chow_liu":
        return ChowLiuTree(
            nodes=tuple(doc["nodes"]),
            edges=tuple((i, j, float(w)) for i, j, w in doc["edges"]),
            root=doc["root"],
            parents=dict(doc["parents"]),
            edge_cpts={c: (float(p0), float(p1)) for c, (p0, p1) in doc["edge_cpts"].items()},
            root_marginal=float(doc["root_marginal"]),
        )
    if kind == "hmm":
        return HmmModel(
            n_states=int(doc["n_states"]),
            vocabulary=tuple(doc["vocabulary"]),
            transition=np.array([[float(v) for v in row] for row in doc["transition"]]),
            emission=np.array([[float(v) for v in row] for row in doc["emission"]]),
            initial=np.array([float(v) for v in doc["initial"]]),
        )
    raise ValueError(f"unknown model kind {kind!r}")


def save_model(model, path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_json(model), fh, indent=2)
        fh.write("\n")


def load_model(path: Union[str, Path]):
    with open(path, encoding="utf-8") as fh:
        return model_from_json(json.load(fh))
