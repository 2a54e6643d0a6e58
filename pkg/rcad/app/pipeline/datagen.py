"""Seeded synthetic sequence datasets.

Each sample is an AR(1) process per feature that relaxes towards a class
mean. The two class means sit ``separability`` noise spreads apart along a
fixed ±1 direction per feature, so separability 0 carries no label signal.
"""

from pathlib import Path
from typing import Union

import numpy as np
import pandas as pd

from app.core.exceptions import InputError, SchemaError
from app.core.logging import get_logger
from app.core.rng import stream
from app.data.sequences import SequenceDataset
from app.schemas.datasets import GenConfig

logger = get_logger(__name__)

ID_COLUMN = "sample_id"
TIME_COLUMN = "t"
LABEL_COLUMN = "label"


def generate(config: GenConfig) -> SequenceDataset:
    """Generate ``config.n_samples`` labeled sequences, fully determined by the seed"""
    n, steps, width = config.n_samples, config.seq_len, config.n_features

    n_positive = int(round(n * config.class_balance))
    n_positive = min(max(n_positive, 1), n - 1)
    labels = np.zeros(n, dtype=np.int64)
    labels[:n_positive] = 1
    labels = stream(config.seed, "labels").permutation(labels)

    direction = stream(config.seed, "direction").choice([-1.0, 1.0], size=width)
    half_gap = 0.5 * config.separability * config.noise_spread
    means = np.where(labels[:, None] == 1, half_gap, -half_gap) * direction

    noise = stream(config.seed, "noise").normal(0.0, config.noise_spread, size=(n, steps, width))
    phi = config.ar_coefficient
    features = np.empty((n, steps, width))
    # start from the stationary distribution around the class mean
    deviation = noise[:, 0, :] / np.sqrt(1.0 - phi * phi)
    features[:, 0, :] = means + deviation
    for t in range(1, steps):
        deviation = phi * deviation + noise[:, t, :]
        features[:, t, :] = means + deviation

    logger.info(
        "Generated %d sequences (T=%d, %d features, %d positive, separability %.2f)",
        n,
        steps,
        width,
        n_positive,
        config.separability,
    )
    return SequenceDataset(features, labels)


def export_csv(data: SequenceDataset, path: Union[str, Path]) -> None:
    """Write long format: one row per (sample, step); the label sits on step 0"""
    n, steps, width = data.features.shape
    frame = pd.DataFrame(data.features.reshape(n * steps, width), columns=list(data.feature_names))
    frame.insert(0, TIME_COLUMN, np.tile(np.arange(steps), n))
    frame.insert(0, ID_COLUMN, np.repeat(np.arange(n), steps))
    labels = pd.Series(pd.NA, index=frame.index, dtype="Int64")
    labels[frame[TIME_COLUMN] == 0] = np.asarray(data.labels)
    frame[LABEL_COLUMN] = labels
    try:
        frame.to_csv(path, index=False, na_rep="", lineterminator="\n")
    except OSError as exc:
        raise InputError(f"Cannot write {path}: {exc.strerror}") from exc


def import_csv(path: Union[str, Path]) -> SequenceDataset:
    """Read a long-format CSV written by ``export_csv``"""
    try:
        frame = pd.read_csv(path, encoding="utf-8", float_precision="round_trip")
    except FileNotFoundError as exc:
        raise InputError(f"Cannot read {path}: file not found") from exc
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise SchemaError(f"Cannot parse {path}: {exc}") from exc

    columns = list(frame.columns)
    if columns[:2] != [ID_COLUMN, TIME_COLUMN] or columns[-1] != LABEL_COLUMN or len(columns) < 4:
        raise SchemaError(
            f"{path}: expected columns {ID_COLUMN}, {TIME_COLUMN}, features..., {LABEL_COLUMN}"
        )
    names = tuple(columns[2:-1])
    for column in (*names, LABEL_COLUMN):
        values = pd.to_numeric(frame[column], errors="coerce")
        if (values.isna() & frame[column].notna()).any():
            raise SchemaError(f"{path}: column {column} holds non-numeric values")
        frame[column] = values
    if frame.empty:
        return SequenceDataset(np.zeros((0, 0, len(names))), np.zeros(0, dtype=np.int64), names)

    ids = pd.unique(frame[ID_COLUMN])
    groups = frame.groupby(ID_COLUMN, sort=False)
    lengths = groups.size()
    if lengths.nunique() != 1:
        raise SchemaError(f"{path}: all samples must have the same number of steps")
    steps = int(lengths.iloc[0])

    features = np.empty((len(ids), steps, len(names)))
    labels = np.empty(len(ids), dtype=np.int64)
    for position, sample in enumerate(ids):
        rows = groups.get_group(sample).sort_values(TIME_COLUMN)
        if list(rows[TIME_COLUMN]) != list(range(steps)):
            raise SchemaError(f"{path}: sample {sample} does not cover steps 0..{steps - 1}")
        label = rows[LABEL_COLUMN].iloc[0]
        if pd.isna(label):
            raise SchemaError(f"{path}: sample {sample} has no label on step 0")
        if not np.isfinite(label) or label < 0 or label != int(label):
            raise SchemaError(f"{path}: sample {sample} has label {label}, expected a class index")
        features[position] = rows[list(names)].to_numpy(dtype=np.float64)
        labels[position] = int(label)
    return SequenceDataset(features, labels, names)
