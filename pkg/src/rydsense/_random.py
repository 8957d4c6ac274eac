"""Seeded random streams.

Every stochastic quantity in the package is drawn from a Philox
counter-based generator keyed by ``(seed, *stream)``, so a block of shots
can be regenerated in isolation and results do not depend on how work is
split between threads.
"""

import numpy as np


def generator(seed, *stream):
    """Return a ``numpy.random.Generator`` for ``seed`` and sub-stream ``stream``."""
    seed = int(seed)
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    if not stream:
        return np.random.Generator(np.random.Philox(seed))
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in stream))
    return np.random.Generator(np.random.Philox(ss))
