"""Transition model: counting, normalization, heatmap, adjacency probe."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skillchain.chaining import (
    EmptyCorpus,
    TransitionBackend,
    UnknownToken,
    adjacency_hypothesis,
    fit_transition,
    parse_heatmap,
    transition_heatmap,
)
from skillchain.ingest import Corpus, group_by_file, load_pose_csv


def test_deterministic_successor():
    model = fit_transition(Corpus.from_token_lists([["a", "b", "a", "b"]]))
    # Count oracle: two a->b transitions, one b->a, nothing else.
    ia, ib = model.vocabulary.index("a"), model.vocabulary.index("b")
    assert model.counts[ia, ib] == 2
    assert model.counts[ib, ia] == 1
    assert model.probs[ia, ib] == 1.0


def test_conditional_frequencies():
    model = fit_transition(Corpus.from_token_lists([["a", "b"], ["a", "b"], ["a", "c"]]))
    ia = model.vocabulary.index("a")
    ib = model.vocabulary.index("b")
    ic = model.vocabulary.index("c")
    assert model.probs[ia, ib] == pytest.approx(2 / 3)
    assert model.probs[ia, ic] == pytest.approx(1 / 3)


def test_zero_count_row_is_uniform():
    model = fit_transition(Corpus.from_token_lists([["a", "b"]]))
    ib = model.vocabulary.index("b")
    assert np.allclose(model.probs[ib], [0.5, 0.5])


def test_rows_are_probability_vectors():
    rng = np.random.default_rng(5)
    tokens = ["a", "b", "c", "d"]
    seqs = [[tokens[i] for i in rng.integers(0, 4, size=8)] for _ in range(20)]
    model = fit_transition(Corpus.from_token_lists(seqs))
    assert np.allclose(model.probs.sum(axis=1), 1.0, atol=1e-9)


def test_counts_invariant_under_sequence_permutation():
    seqs = [["a", "b", "c"], ["c", "a"], ["b", "b", "a"]]
    m1 = fit_transition(Corpus.from_token_lists(seqs))
    m2 = fit_transition(Corpus.from_token_lists(list(reversed(seqs))))
    assert m1.vocabulary == m2.vocabulary
    assert (m1.counts == m2.counts).all()


def test_empty_corpus_rejected():
    with pytest.raises(EmptyCorpus):
        fit_transition(Corpus(()))


# ---------------------------------------------------------------------------
# Heatmap CSV
# ---------------------------------------------------------------------------


def test_heatmap_shape():
    model = fit_transition(Corpus.from_token_lists([["a", "b"]]))
    lines = transition_heatmap(model).strip().splitlines()
    assert lines[0] == ",a,b"
    assert len(lines) == 3


def test_heatmap_round_trip():
    rng = np.random.default_rng(11)
    seqs = [["x", "y", "z", "x"][: rng.integers(2, 5)] for _ in range(9)]
    model = fit_transition(Corpus.from_token_lists(seqs))
    vocab, probs = parse_heatmap(transition_heatmap(model))
    assert vocab == model.vocabulary
    assert np.abs(probs - model.probs).max() < 1e-10


def test_heatmap_from_pose_log(edh_csv_path):
    records = load_pose_csv(edh_csv_path)
    seqs = [[str(c) for c in codes] for _, codes in group_by_file(records)]
    model = fit_transition(Corpus.from_token_lists(seqs))
    i2, i4 = model.vocabulary.index("2"), model.vocabulary.index("4")
    assert model.counts[i2, i4] > 0
    assert model.counts[i4, i2] > 0
    text = transition_heatmap(model)
    assert text.startswith(",2,4,5,8")


def test_heatmap_write_failure(tmp_path):
    from skillchain.chaining import IoFailure

    model = fit_transition(Corpus.from_token_lists([["a", "b"]]))
    with pytest.raises(IoFailure):
        transition_heatmap(model, tmp_path / "missing_dir" / "x.csv")


# ---------------------------------------------------------------------------
# Adjacency hypothesis
# ---------------------------------------------------------------------------


def test_never_adjacent_tokens():
    # a and b both occur, always separated by x.
    model = fit_transition(Corpus.from_token_lists([["a", "x", "b", "x", "a"]]))
    assert adjacency_hypothesis(model, "a", "b", epsilon=0.0)


def test_adjacent_pair_fails_at_zero():
    model = fit_transition(Corpus.from_token_lists([["a", "b", "x"]]))
    assert not adjacency_hypothesis(model, "a", "b", epsilon=0.0)


def test_small_rate_passes_under_epsilon():
    # One a->b pair among 33 a-transitions: rate ~3%.
    seq = ["a", "x"] * 32 + ["a", "b", "x"]
    model = fit_transition(Corpus.from_token_lists([seq]))
    ia, ib = model.vocabulary.index("a"), model.vocabulary.index("b")
    rate = model.counts[ia, ib] / model.counts[ia].sum()
    assert rate == pytest.approx(1 / 33)
    assert adjacency_hypothesis(model, "a", "b", epsilon=0.05)


def test_unknown_token_rejected():
    model = fit_transition(Corpus.from_token_lists([["a", "b"]]))
    with pytest.raises(UnknownToken):
        adjacency_hypothesis(model, "a", "zz", epsilon=0.1)


def test_backend_prediction_ranks_by_row():
    model = fit_transition(Corpus.from_token_lists([["a", "b"], ["a", "b"], ["a", "c"]]))
    result = TransitionBackend(model).predict_next(["a"])
    assert result.argmax == "b"
    assert result.distribution["b"] == pytest.approx(2 / 3)
