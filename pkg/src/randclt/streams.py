"""Deterministic splittable random streams.

Every Monte Carlo routine receives a master seed and derives child streams
through SeedSequence spawning, keyed by task index.  Results are therefore
reproducible and independent of how work is distributed over threads.
"""

from __future__ import annotations

import numpy as np


def master_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed)))


def spawn_rngs(seed: int, count: int) -> list[np.random.Generator]:
    """Independent child generators, deterministic in (seed, index)."""
    children = np.random.SeedSequence(int(seed)).spawn(count)
    return [np.random.default_rng(c) for c in children]


def tagged_rng(seed: int, tag: int) -> np.random.Generator:
    """A stream reserved for a named sub-purpose (tag is a small integer)."""
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=(int(tag),)))
