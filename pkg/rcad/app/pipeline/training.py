"""Mini-batch training with a stratified validation split"""

from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
import pandas as pd

from app.core.exceptions import InputError, NonFiniteLossError
from app.core.logging import get_logger
from app.core.ops import softmax_crossentropy
from app.core.rng import stream
from app.core.tensor import Tape, backward, zero_grad
from app.data.sequences import SequenceDataset
from app.models.network import ModelParams, check_params, forward_model, init_params
from app.models.optim import make_optimizer
from app.pipeline.preprocess import apply_sequence_scaler, fit_sequence_scaler
from app.schemas.models import ModelSpec
from app.schemas.training import EpochRecord, TrainConfig, TrainingHistory

logger = get_logger(__name__)

EVAL_CHUNK = 256
HISTORY_COLUMNS = ["epoch", "train_loss", "val_loss", "train_acc", "val_acc"]


def split(
    data: SequenceDataset, val_fraction: float, seed: int
) -> Tuple[SequenceDataset, SequenceDataset]:
    """Seeded stratified split; every class keeps at least one sample on each side"""
    if not 0.0 < val_fraction < 1.0:
        raise InputError(f"val_fraction must lie in (0, 1), got {val_fraction}")
    counts = data.class_counts()
    small = [label for label, count in counts.items() if count < 2]
    if small:
        raise InputError(f"Classes {small} have fewer than 2 samples; cannot split")

    rng = stream(seed, "split")
    val_parts, train_parts = [], []
    for label in sorted(counts):
        members = rng.permutation(np.flatnonzero(data.labels == label))
        n_val = int(round(len(members) * val_fraction))
        n_val = min(max(n_val, 1), len(members) - 1)
        val_parts.append(members[:n_val])
        train_parts.append(members[n_val:])
    train_idx = np.sort(np.concatenate(train_parts))
    val_idx = np.sort(np.concatenate(val_parts))
    return data.subset(train_idx), data.subset(val_idx)


def evaluate_split(spec: ModelSpec, params: ModelParams, data: SequenceDataset) -> Tuple[float, float]:
    """Mean loss and accuracy over a full pass with frozen parameters"""
    loss_sum, correct = 0.0, 0
    for start in range(0, data.n_samples, EVAL_CHUNK):
        x = data.features[start:start + EVAL_CHUNK]
        y = data.labels[start:start + EVAL_CHUNK]
        logits = forward_model(spec, params, x)
        loss_sum += softmax_crossentropy(logits, y).item() * len(y)
        correct += int((logits.data.argmax(axis=1) == y).sum())
    return loss_sum / data.n_samples, correct / data.n_samples


def train(
    spec: ModelSpec,
    config: TrainConfig,
    data: SequenceDataset,
    initial: Optional[ModelParams] = None,
) -> Tuple[ModelParams, TrainingHistory]:
    """Train ``spec`` on ``data`` and return parameters with the per-epoch history.

    With early stopping on, the parameters of the best validation-accuracy
    epoch are returned; otherwise those after the last epoch.
    """
    if data.n_samples == 0:
        raise InputError("Cannot train on an empty dataset")
    if data.n_features != spec.input_size:
        raise InputError(
            f"Dataset has {data.n_features} features, model expects {spec.input_size}"
        )

    train_set, val_set = split(data, config.val_fraction, config.seed)
    scaler = None
    if config.normalize:
        scaler = fit_sequence_scaler(train_set)
        train_set = apply_sequence_scaler(train_set, scaler)
        val_set = apply_sequence_scaler(val_set, scaler)

    params = initial.copy() if initial is not None else init_params(spec, config.seed)
    params.scaler = scaler
    check_params(spec, params)
    tensors = params.tensors()
    optimizer = make_optimizer(config.optimizer, config.learning_rate)
    shuffle_rng = stream(config.seed, "shuffle")
    dropout_rng = stream(config.seed, "dropout")

    history = TrainingHistory()
    best_accuracy, best_params, stale = -1.0, None, 0
    logger.info(
        "Training %s on %d samples (%d held out) for %d epochs",
        spec.variant,
        train_set.n_samples,
        val_set.n_samples,
        config.epochs,
    )

    for epoch in range(1, config.epochs + 1):
        order = shuffle_rng.permutation(train_set.n_samples)
        loss_sum, correct = 0.0, 0
        for batch, start in enumerate(range(0, len(order), config.batch_size), start=1):
            idx = order[start:start + config.batch_size]
            x, y = train_set.features[idx], train_set.labels[idx]
            zero_grad(tensors)
            with Tape() as tape:
                logits = forward_model(spec, params, x, train=True, rng=dropout_rng)
                loss = softmax_crossentropy(logits, y)
            value = loss.item()
            if not np.isfinite(value):
                raise NonFiniteLossError(epoch, batch, value, spec.variant)
            backward(tape, loss)
            optimizer.step(tensors)
            loss_sum += value * len(idx)
            correct += int((logits.data.argmax(axis=1) == y).sum())

        val_loss, val_accuracy = evaluate_split(spec, params, val_set)
        record = EpochRecord(
            epoch=epoch,
            train_loss=loss_sum / train_set.n_samples,
            val_loss=val_loss,
            train_accuracy=correct / train_set.n_samples,
            val_accuracy=val_accuracy,
        )
        history.records.append(record)
        logger.info(
            "epoch %d: loss %.4f/%.4f acc %.4f/%.4f",
            epoch,
            record.train_loss,
            record.val_loss,
            record.train_accuracy,
            record.val_accuracy,
        )

        if config.early_stop_patience:
            if val_accuracy > best_accuracy:
                best_accuracy, best_params, stale = val_accuracy, params.copy(), 0
                history.best_epoch = epoch
            else:
                stale += 1
                if stale >= config.early_stop_patience:
                    history.stopped_early = True
                    logger.info("Early stop after epoch %d (best %d)", epoch, history.best_epoch)
                    break

    if best_params is not None:
        return best_params, history
    return params, history


def history_frame(history: TrainingHistory) -> pd.DataFrame:
    return pd.DataFrame(
        [
            (r.epoch, r.train_loss, r.val_loss, r.train_accuracy, r.val_accuracy)
            for r in history.records
        ],
        columns=HISTORY_COLUMNS,
    )


def write_history_csv(history: TrainingHistory, path: Union[str, Path]) -> None:
    history_frame(history).to_csv(path, index=False, lineterminator="\n")
