"""Test the validation split, optimizers and the training loop"""

import math

import numpy as np
import pytest

from app.core.exceptions import ContractError, InputError, NonFiniteLossError
from app.core.ops import softmax_crossentropy
from app.core.tensor import Tape, Tensor, backward
from app.data.sequences import SequenceDataset
from app.models.network import forward_model, init_params
from app.models.optim import Adam, Sgd, adam_step, make_optimizer
from app.pipeline import training
from app.pipeline.datagen import generate
from app.pipeline.training import evaluate_split, history_frame, split, train, write_history_csv
from app.schemas.datasets import GenConfig
from app.schemas.training import TrainConfig
from tests.conftest import make_dataset, tiny_spec


def quick_config(**overrides):
    values = {"epochs": 2, "batch_size": 8, "learning_rate": 0.01, "seed": 0}
    values.update(overrides)
    return TrainConfig(**values)


@pytest.mark.training
def test_split_is_stratified():
    """Test 50/50 labels with fraction 0.2 hold out 10 of each class"""
    data = make_dataset(n_per_class=50)
    train_set, val_set = split(data, 0.2, seed=1)
    assert val_set.class_counts() == {0: 10, 1: 10}
    assert train_set.class_counts() == {0: 40, 1: 40}


@pytest.mark.training
def test_split_is_seeded_and_disjoint():
    """Test that the same seed replays the split and no sample is shared"""
    data = make_dataset(n_per_class=20)
    first_train, first_val = split(data, 0.25, seed=3)
    again_train, again_val = split(data, 0.25, seed=3)
    assert first_train.equals(again_train) and first_val.equals(again_val)

    rows = {tuple(x.ravel()) for x in data.features}
    train_rows = {tuple(x.ravel()) for x in first_train.features}
    val_rows = {tuple(x.ravel()) for x in first_val.features}
    assert not train_rows & val_rows
    assert train_rows | val_rows == rows


@pytest.mark.training
def test_split_keeps_one_sample_per_side():
    """Test the smallest splittable case and the too-small class"""
    train_set, val_set = split(make_dataset(n_per_class=2), 0.5, seed=0)
    assert val_set.class_counts() == {0: 1, 1: 1}
    assert train_set.class_counts() == {0: 1, 1: 1}

    lopsided = SequenceDataset(np.zeros((4, 2, 1)), [0, 0, 0, 1])
    with pytest.raises(InputError):
        split(lopsided, 0.5, seed=0)
    with pytest.raises(InputError):
        split(make_dataset(), 1.0, seed=0)


@pytest.mark.training
def test_adam_step_bias_correction():
    """Test zero gradients, the first step size and the counter contract"""
    param = np.array([1.0, -2.0, 3.0])
    zeros = (np.zeros(3), np.zeros(3))

    unchanged, _ = adam_step(param, np.zeros(3), zeros, t=1, lr=0.1)
    assert np.array_equal(unchanged, param)

    moved, (m, v) = adam_step(param, np.array([0.5, -4.0, 1e-3]), zeros, t=1, lr=0.1)
    assert np.allclose(np.abs(moved - param), 0.1, rtol=1e-4)
    assert np.all(np.sign(param - moved) == np.array([1.0, -1.0, 1.0]))
    assert np.allclose(m, [0.05, -0.4, 1e-4])

    with pytest.raises(ContractError):
        adam_step(param, np.zeros(3), zeros, t=0, lr=0.1)


@pytest.mark.training
def test_adam_updates_are_elementwise():
    """Test that two tensors with identical values and gradients move identically"""
    first = Tensor([[0.3, -0.7]], requires_grad=True)
    second = Tensor([[0.3, -0.7]], requires_grad=True)
    adam = Adam(0.05)
    for grad in ([[1.0, 2.0]], [[-0.5, 0.25]]):
        first.grad = np.array(grad)
        second.grad = np.array(grad)
        adam.step([first, second])
    assert np.array_equal(first.data, second.data)


@pytest.mark.training
def test_optimizers_move_against_the_gradient():
    """Test one SGD and one Adam step on a tensor with a known gradient"""
    tensor = Tensor([2.0, -1.0], requires_grad=True)
    tensor.grad = np.array([1.0, -1.0])
    Sgd(0.5).step([tensor])
    assert tensor.data.tolist() == [1.5, -0.5]

    adam = Adam(0.1)
    adam.step([tensor])
    assert adam.t == 1
    assert np.allclose(tensor.data, [1.4, -0.4], atol=1e-6)

    with pytest.raises(ContractError):
        make_optimizer("rmsprop", 0.1)


@pytest.mark.training
def test_single_sgd_step_matches_hand_update():
    """Test one full-batch SGD epoch equals params − lr·grad on the training split"""
    data = make_dataset(n_per_class=4)
    spec = tiny_spec("gru")
    config = TrainConfig(
        epochs=1, batch_size=64, learning_rate=0.1, optimizer="sgd", val_fraction=0.25, normalize=False
    )
    trained, history = train(spec, config, data)

    train_set, _ = split(data, 0.25, config.seed)
    assert train_set.n_samples == 6
    expected = init_params(spec, config.seed)
    with Tape() as tape:
        loss = softmax_crossentropy(forward_model(spec, expected, train_set.features), train_set.labels)
    backward(tape, loss)

    after = dict(trained.named_tensors())
    for name, tensor in expected.named_tensors():
        assert np.allclose(after[name].data, tensor.data - 0.1 * tensor.grad, rtol=0, atol=1e-12), name
    assert history.records[0].train_loss == pytest.approx(loss.item(), abs=1e-12)


@pytest.mark.training
def test_zero_learning_rate_freezes_parameters():
    """Test that lr = 0 leaves parameters and validation metrics unchanged"""
    spec = tiny_spec("bilstm")
    trained, history = train(spec, quick_config(epochs=3, learning_rate=0.0, normalize=False), make_dataset())
    initial = init_params(spec, 0)
    for (name, a), (_, b) in zip(trained.named_tensors(), initial.named_tensors()):
        assert np.array_equal(a.data, b.data), name
    assert len({r.val_loss for r in history.records}) == 1
    assert len({r.val_accuracy for r in history.records}) == 1


@pytest.mark.training
def test_training_is_deterministic():
    """Test that the same seed replays history and parameters exactly"""
    spec = tiny_spec("hybrid", dropout_rate=0.3)
    config = quick_config(epochs=2)
    first_params, first_history = train(spec, config, make_dataset())
    second_params, second_history = train(spec, config, make_dataset())
    assert first_history == second_history
    for (name, a), (_, b) in zip(first_params.named_tensors(), second_params.named_tensors()):
        assert np.array_equal(a.data, b.data), name


@pytest.mark.training
def test_initial_loss_near_chance():
    """Test that untrained models start close to ln 2 on balanced data"""
    data = make_dataset(n_per_class=20)
    for variant in ("bilstm", "gru", "hybrid"):
        spec = tiny_spec(variant)
        loss, accuracy = evaluate_split(spec, init_params(spec, 0), data)
        assert abs(loss - math.log(2)) < 0.2
        assert 0.0 <= accuracy <= 1.0


@pytest.mark.training
def test_training_stores_train_split_scaler():
    """Test that normalization fits a scaler on the features by name"""
    data = make_dataset()
    params, _ = train(tiny_spec("gru"), quick_config(epochs=1), data)
    assert params.scaler is not None
    assert params.scaler.columns == list(data.feature_names)


@pytest.mark.training
def test_early_stopping_keeps_best_epoch():
    """Test that a flat validation curve stops after the patience runs out"""
    config = quick_config(epochs=10, learning_rate=0.0, early_stop_patience=2)
    _, history = train(tiny_spec("gru"), config, make_dataset())
    assert history.stopped_early
    assert history.best_epoch == 1
    assert len(history) == 3


@pytest.mark.training
def test_train_rejects_bad_inputs():
    """Test the empty dataset and feature-count preconditions"""
    empty = SequenceDataset(np.zeros((0, 4, 3)), np.zeros(0, dtype=np.int64))
    with pytest.raises(InputError):
        train(tiny_spec("gru"), quick_config(), empty)
    with pytest.raises(InputError):
        train(tiny_spec("gru", input_size=5), quick_config(), make_dataset())


@pytest.mark.training
def test_non_finite_loss_aborts(monkeypatch):
    """Test that a NaN loss stops training with its position"""

    def broken_loss(logits, labels):
        return Tensor._wrap(np.asarray(np.nan))

    monkeypatch.setattr(training, "softmax_crossentropy", broken_loss)
    with pytest.raises(NonFiniteLossError) as excinfo:
        train(tiny_spec("gru"), quick_config(), make_dataset())
    assert (excinfo.value.epoch, excinfo.value.batch) == (1, 1)
    assert excinfo.value.variant == "gru"


@pytest.mark.training
def test_history_csv_layout(tmp_path):
    """Test the per-epoch CSV columns"""
    _, history = train(tiny_spec("gru"), quick_config(epochs=2), make_dataset())
    assert list(history_frame(history).columns) == ["epoch", "train_loss", "val_loss", "train_acc", "val_acc"]
    path = tmp_path / "history.csv"
    write_history_csv(history, path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "epoch,train_loss,val_loss,train_acc,val_acc"
    assert [line.split(",")[0] for line in lines[1:]] == ["1", "2"]


@pytest.mark.training
@pytest.mark.slow
def test_learns_separable_data():
    """Test that a small GRU fits well separated classes"""
    data = generate(GenConfig(n_samples=200, seq_len=6, n_features=3, separability=3.0, seed=1))
    spec = tiny_spec("gru").model_copy(update={"hidden_sizes": [8]})
    config = TrainConfig(epochs=20, batch_size=16, learning_rate=0.01, seed=1)
    _, history = train(spec, config, data)
    assert history.records[-1].train_accuracy >= 0.9
    assert history.records[-1].train_loss < history.records[0].train_loss


@pytest.mark.training
@pytest.mark.slow
def test_no_signal_stays_at_chance():
    """Test that separability 0 keeps validation accuracy near 0.5 across seeds"""
    accuracies = []
    for seed in range(5):
        data = generate(GenConfig(n_samples=400, seq_len=5, n_features=3, separability=0.0, seed=seed))
        config = TrainConfig(epochs=3, batch_size=32, learning_rate=0.01, seed=seed)
        _, history = train(tiny_spec("gru"), config, data)
        accuracies.append(history.records[-1].val_accuracy)
    assert abs(np.mean(accuracies) - 0.5) < 0.08
