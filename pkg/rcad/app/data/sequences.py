"""Batched fixed-length sequences with class labels"""

from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from app.core.exceptions import DimensionError, InputError, SchemaError


@dataclass(frozen=True)
class SequenceDataset:
    """``features`` is samples×time×features, ``labels`` one class index per sample"""

    features: np.ndarray
    labels: np.ndarray
    feature_names: Tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        features = np.asarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        if features.ndim != 3:
            raise DimensionError(f"features must be samples×time×features, got {features.shape}")
        if labels.shape != (features.shape[0],):
            raise DimensionError(
                f"{labels.shape} labels for {features.shape[0]} samples"
            )
        if not np.all(np.isfinite(features)):
            raise InputError("Sequence features must be finite")
        if labels.size and labels.min() < 0:
            raise InputError("Labels must be non-negative class indices")
        names = tuple(self.feature_names) or tuple(
            f"f{i + 1}" for i in range(features.shape[2])
        )
        if len(names) != features.shape[2]:
            raise SchemaError(f"{len(names)} feature names for {features.shape[2]} features")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "feature_names", names)

    @property
    def n_samples(self) -> int:
        return int(self.features.shape[0])

    @property
    def seq_len(self) -> int:
        return int(self.features.shape[1])

    @property
    def n_features(self) -> int:
        return int(self.features.shape[2])

    @property
    def num_classes(self) -> int:
        return max(2, int(self.labels.max()) + 1) if self.labels.size else 2

    def __len__(self) -> int:
        return self.n_samples

    def class_counts(self) -> Dict[int, int]:
        classes, counts = np.unique(self.labels, return_counts=True)
        return {int(c): int(n) for c, n in zip(classes, counts)}

    def subset(self, indices) -> "SequenceDataset":
        indices = np.asarray(indices, dtype=np.int64)
        return SequenceDataset(self.features[indices], self.labels[indices], self.feature_names)

    def select_features(self, names: Sequence[str]) -> "SequenceDataset":
        unknown = [n for n in names if n not in self.feature_names]
        if unknown:
            raise SchemaError(f"Unknown features {unknown}")
        positions = [self.feature_names.index(n) for n in names]
        return SequenceDataset(self.features[:, :, positions], self.labels, tuple(names))

    def with_features(self, features: np.ndarray, names: Optional[Sequence[str]] = None) -> "SequenceDataset":
        return SequenceDataset(features, self.labels, tuple(names or self.feature_names))

    def equals(self, other: "SequenceDataset") -> bool:
        return (
            self.feature_names == other.feature_names
            and self.features.shape == other.features.shape
            and np.array_equal(self.features, other.features)
            and np.array_equal(self.labels, other.labels)
        )
