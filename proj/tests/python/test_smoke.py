"""Smoke tests for the python bindings."""

import math

import numpy as np
import pytest

import corn_ordinal as co

LOG2 = math.log(2.0)


def test_extend_labels_definition():
    bits = co.extend_labels([1, 3, 5], 5)
    assert bits.shape == (3, 4)
    assert bits[0].tolist() == [0, 0, 0, 0]
    assert bits[1].tolist() == [1, 1, 0, 0]
    assert bits[2].tolist() == [1, 1, 1, 1]


def test_label_round_trip():
    for k in (2, 5, 16):
        ranks = list(range(1, k + 1))
        bits = co.extend_labels(ranks, k)
        assert (1 + bits.sum(axis=1) == np.array(ranks)).all()


def test_subset_masks():
    masks = co.build_subset_masks([1, 2, 3, 3], 3)
    assert masks["sizes"] == [4, 3]
    assert masks["member"][:, 0].all()


def test_corn_loss_hand_value():
    loss = co.corn_loss(np.zeros((1, 2)), [2], 3)
    assert loss == pytest.approx(LOG2, abs=1e-12)


def test_corn_loss_matches_reference():
    rng = np.random.default_rng(0)
    logits = rng.uniform(-5, 5, size=(16, 3))
    ranks = rng.integers(1, 5, size=16).tolist()
    stable = co.corn_loss(logits, ranks, 4)
    reference = co.corn_loss_reference(1.0 / (1.0 + np.exp(-logits)), ranks, 4)
    assert stable == pytest.approx(reference, abs=1e-9)


def test_corn_loss_grad_shape_and_descent():
    logits = np.zeros((2, 3))
    loss, grad = co.corn_loss_with_grad(logits, [1, 4], 4)
    assert grad.shape == logits.shape
    stepped = co.corn_loss(logits - 0.5 * grad, [1, 4], 4)
    assert stepped < loss


def test_other_losses():
    assert co.ornn_loss(np.zeros((1, 2)), [2], 3) == pytest.approx(2 * LOG2, abs=1e-12)
    assert co.ce_loss(np.zeros((1, 4)), [2], 4) == pytest.approx(math.log(4), abs=1e-12)
    coral = co.coral_loss(np.zeros((1, 1)), np.zeros((1, 3)), [2], 4)
    assert coral == pytest.approx(3 * LOG2, abs=1e-12)


def test_chain_rule_and_decoding():
    uncond = co.chain_rule_probs(np.array([[0.9, 0.8, 0.5]]))
    assert uncond[0].tolist() == pytest.approx([0.9, 0.72, 0.36])
    assert co.decode_rank(uncond) == [3]
    assert co.decode_rank_ce(np.array([[0.1, 2.0, 0.3]])) == [2]
    assert co.predict_ranks("corn", np.array([[3.0, 2.0, -1.0]])) == [3]


def test_rank_consistency_property():
    rng = np.random.default_rng(1)
    logits = rng.uniform(-10, 10, size=(256, 7))
    uncond = co.chain_rule_probs(1.0 / (1.0 + np.exp(-logits)))
    assert (np.diff(uncond, axis=1) <= 0).all()


def test_metrics():
    assert co.mae([1, 3], [2, 3]) == 0.5
    assert co.rmse([1, 3], [2, 3]) == pytest.approx(math.sqrt(0.5))


def test_synth_and_fit_end_to_end():
    features, labels = co.synth_ordinal(600, 3, 3, noise=0.0, seed=7)
    assert features.shape == (600, 3)
    assert min(labels) >= 1 and max(labels) <= 3

    report = co.fit(
        features,
        labels,
        3,
        method="corn",
        hidden=[16],
        lr=0.01,
        batch_size=64,
        epochs=15,
        seed=0,
    )
    assert report["selected_epoch"] >= 1
    assert len(report["val_rmse"]) == 15
    assert report["test_mae"] <= 0.2  # separable data

    again = co.fit(
        features,
        labels,
        3,
        method="corn",
        hidden=[16],
        lr=0.01,
        batch_size=64,
        epochs=15,
        seed=0,
    )
    assert again["test_mae"] == report["test_mae"]
    assert again["train_loss"] == report["train_loss"]
