"""Deterministic random-number streams.

Every stochastic routine takes a root seed and derives independent
substreams through SeedSequence spawn keys, so replicate k sees the same
stream no matter how work is scheduled across workers.
"""

from __future__ import annotations

import numpy as np

__all__ = ["substream"]


def substream(root_seed: int, *path: int) -> np.random.Generator:
    """Generator for the substream addressed by (root_seed, *path)."""
    return np.random.default_rng(np.random.SeedSequence(root_seed, spawn_key=tuple(path)))
