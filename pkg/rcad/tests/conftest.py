"""Conftest file for pytest"""

import json

import numpy as np
import pytest

from app.core.rng import stream
from app.data.sequences import SequenceDataset
from app.main import main
from app.models.network import init_params
from app.pipeline.datagen import generate
from app.schemas.datasets import GenConfig
from app.schemas.models import ModelSpec


# ---- Data Helpers ----
def make_dataset(n_per_class=10, seq_len=4, n_features=3, seed=0):
    """Balanced random dataset with labels 0..0 1..1"""
    rng = stream(seed, "tests")
    features = rng.normal(size=(2 * n_per_class, seq_len, n_features))
    labels = np.repeat([0, 1], n_per_class)
    return SequenceDataset(features, labels)


def tiny_spec(variant="gru", input_size=3, dropout_rate=0.0):
    """Small model spec that trains in well under a second per epoch"""
    hidden = [4, 3] if variant == "hybrid" else [4]
    return ModelSpec(
        variant=variant,
        input_size=input_size,
        hidden_sizes=hidden,
        num_classes=2,
        dropout_rate=dropout_rate,
    )


# ---- CLI Helpers ----
def run_cli(*argv):
    """Run the command line in-process and return its exit code"""
    return main([str(arg) for arg in argv])


def read_json(path):
    with open(path, encoding="utf-8") as handle:
        return json.load(handle)


# ---- Pytest Fixtures ----
@pytest.fixture(autouse=True)
def no_seed_env(monkeypatch):
    """Keep a developer's RCAD_SEED from leaking into tests"""
    monkeypatch.delenv("RCAD_SEED", raising=False)


@pytest.fixture
def rng():
    """Seeded generator for test inputs"""
    return stream(1234, "tests")


@pytest.fixture
def small_dataset():
    """Well separated synthetic dataset of 40 short sequences"""
    return generate(GenConfig(n_samples=40, seq_len=4, n_features=3, separability=4.0, seed=3))


@pytest.fixture
def gru_model():
    """Tiny GRU spec with seeded parameters"""
    spec = tiny_spec("gru")
    return spec, init_params(spec, seed=0)


@pytest.fixture
def dataset_csv(tmp_path):
    """Small long-format dataset written by the generate command"""
    out = tmp_path / "data"
    code = run_cli(
        "generate",
        "--n-samples", 40,
        "--seq-len", 4,
        "--n-features", 3,
        "--separability", 4.0,
        "--seed", 3,
        "--output-dir", out,
    )
    assert code == 0
    (path,) = out.glob("generate-*/dataset.csv")
    return path
