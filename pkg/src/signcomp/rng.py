"""Seeded random streams.

Every sampler takes an explicit seed; independent substreams are keyed by
``(base entropy, *keys)`` so trial ``k`` of a harness draws the same numbers
no matter how many other trials run or in which order.
"""

from __future__ import annotations

import numpy as np


def base_entropy(seed) -> int:
    """Integer entropy for ``seed``: an int, a sequence of ints, a SeedSequence,
    a Generator or None."""
    if isinstance(seed, np.random.Generator):
        return int(seed.integers(0, 2 ** 63))
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    if isinstance(ss.entropy, (int, np.integer)):
        return int(ss.entropy)
    return int(ss.generate_state(1, np.uint64)[0])


def substream(seed, *keys: int) -> np.random.Generator:
    """PCG64 generator for the substream ``keys`` of ``seed``."""
    return np.random.default_rng([base_entropy(seed), *[int(k) for k in keys]])
