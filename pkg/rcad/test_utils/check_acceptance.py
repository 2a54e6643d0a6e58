"""This script runs the full-size learning checks that are too slow for pytest.

Run from the rcad directory: python -m test_utils.check_acceptance
"""

import sys
import time

import numpy as np

from app.core.logging import configure_logging
from app.pipeline.datagen import generate
from app.pipeline.training import train
from app.schemas.datasets import GenConfig
from app.schemas.models import ModelConfig
from app.schemas.training import TrainConfig

VARIANTS = ("bilstm", "gru", "hybrid")
SEEDS = range(5)
TARGET_ACCURACY = 0.90
ORDERING_SLACK = 0.01
NULL_BAND = 0.08
SMOOTHING = 5


def moving_average_rises(losses, window=SMOOTHING, allowance=0.01):
    """True if the windowed mean of the loss ever rises by more than ``allowance``"""
    if len(losses) < window + 1:
        return False
    smoothed = np.convolve(losses, np.ones(window) / window, mode="valid")
    return bool(np.any(np.diff(smoothed) > allowance))


def train_default(variant, seed, separability=2.0):
    data = generate(GenConfig(separability=separability, seed=seed))
    spec = ModelConfig(variant=variant).to_spec(data.n_features, data.num_classes)
    _, history = train(spec, TrainConfig(seed=seed), data)
    return history


def check_learning():
    """Every variant reaches the target validation accuracy on the default task."""
    print("Checking end-to-end learning on the default dataset...")
    ok = True
    for variant in VARIANTS:
        started = time.perf_counter()
        history = train_default(variant, seed=0)
        best = max(r.val_accuracy for r in history.records)
        rising = moving_average_rises([r.train_loss for r in history.records])
        elapsed = time.perf_counter() - started
        print(f"  {variant}: best val accuracy {best:.4f}, smoothed loss rises: {rising}, {elapsed:.0f}s")
        ok &= best >= TARGET_ACCURACY and not rising
    return ok


def check_ordering():
    """The hybrid model is not worse than the better single model, over seeds."""
    print("Checking the hybrid against the single models...")
    means = {}
    for variant in VARIANTS:
        scores = [train_default(variant, seed).records[-1].val_accuracy for seed in SEEDS]
        means[variant] = float(np.mean(scores))
        print(f"  {variant}: mean val accuracy {means[variant]:.4f}")
    return means["hybrid"] >= max(means["bilstm"], means["gru"]) - ORDERING_SLACK


def check_null_signal():
    """Without signal, validation accuracy stays at chance."""
    print("Checking the null-signal dataset...")
    scores = [
        train_default("gru", seed, separability=0.0).records[-1].val_accuracy for seed in SEEDS
    ]
    mean = float(np.mean(scores))
    print(f"  gru: mean val accuracy {mean:.4f}")
    return abs(mean - 0.5) <= NULL_BAND


if __name__ == "__main__":
    configure_logging("WARNING")
    results = {
        "learning": check_learning(),
        "ordering": check_ordering(),
        "null signal": check_null_signal(),
    }
    for name, passed in results.items():
        print(f"{name}: {'pass' if passed else 'FAIL'}")
    sys.exit(0 if all(results.values()) else 1)
