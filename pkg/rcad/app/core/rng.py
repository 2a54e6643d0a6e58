"""Named random streams derived from a single seed"""

import hashlib

import numpy as np


def _name_key(name: str) -> int:
    digest = hashlib.sha256(name.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def stream(seed: int, name: str) -> np.random.Generator:
    """Return the generator for one named stream of a seed.

    Streams with different names are statistically independent, and the same
    (seed, name) pair always replays the same sequence.
    """
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence([int(seed), _name_key(name)]))
    )
