"""Model files must round-trip losslessly."""

import numpy as np

from skillchain.chaining import (
    fit_chow_liu,
    fit_transition,
    hmm_fit,
    load_model,
    model_from_json,
    model_to_json,
    save_model,
)
from skillchain.ingest import Corpus


def _corpus(seed=0):
    rng = np.random.default_rng(seed)
    tokens = ["a", "b", "c", "d"]
    return Corpus.from_token_lists(
        [[tokens[i] for i in rng.integers(0, 4, size=6)] for _ in range(12)]
    )


def test_transition_round_trip(tmp_path):
    model = fit_transition(_corpus())
    path = tmp_path / "transition.json"
    save_model(model, path)
    loaded = load_model(path)
    assert loaded.vocabulary == model.vocabulary
    assert (loaded.counts == model.counts).all()
    assert (loaded.probs == model.probs).all()  # bit-exact via 17 digits


def test_hmm_round_trip(tmp_path):
    model = hmm_fit(_corpus(1), n_states=3, max_iters=10, seed=3)
    path = tmp_path / "hmm.json"
    save_model(model, path)
    loaded = load_model(path)
    assert loaded.vocabulary == model.vocabulary
    assert (loaded.transition == model.transition).all()
    assert (loaded.emission == model.emission).all()
    assert (loaded.initial == model.initial).all()


def test_chow_liu_round_trip(tmp_path):
    model = fit_chow_liu(_corpus(2))
    path = tmp_path / "tree.json"
    save_model(model, path)
    loaded = load_model(path)
    assert loaded == model


def test_probabilities_stored_as_decimal_strings():
    doc = model_to_json(fit_transition(_corpus()))
    assert all(isinstance(v, str) for row in doc["probs"] for v in row)
    restored = model_from_json(doc)
    assert (restored.probs == fit_transition(_corpus()).probs).all()
