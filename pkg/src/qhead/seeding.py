"""Deterministic RNG streams derived from a single root seed.

Every random draw in the package comes from ``stream(seed, *path)``, where
``path`` is a tuple of small non-negative integers naming the consumer: a
stream tag first, then indices such as epoch, batch, and sample. Identical
(seed, path) pairs always yield identical generators, independent of call
order, thread scheduling, or process layout, which is what makes reports
reproducible bit for bit.
"""
from __future__ import annotations

import numpy as np

PARAM_INIT = 1
DATA_SPLIT = 2
SHUFFLE = 3
TRAJECTORY = 4
SHOTS = 5
VALIDATION = 6
TEST = 7
SYNTHETIC = 8
GRADCHECK = 9


def stream(seed: int, *path: int) -> np.random.Generator:
    """Generator for the stream named by ``path`` under ``seed``."""
    entropy = [int(seed)] + [int(p) for p in path]
    if any(e < 0 for e in entropy):
        raise ValueError(f"seed path entries must be non-negative, got {entropy}")
    return np.random.default_rng(np.random.SeedSequence(entropy))
