"""Seedable random streams with deterministic parent/child derivation.

All randomness in the package flows through NumPy ``Generator`` objects
(PCG64 seeded through ``SeedSequence``).  A campaign owns a single 64-bit
master seed; every trial draws from a child stream identified by an integer
key path, so trials are reproducible independently of execution order.
"""

import numpy as np

__all__ = ["master_stream", "derive_stream"]


def master_stream(seed):
    """Root generator for an integer seed."""
    return np.random.default_rng(np.random.SeedSequence(int(seed)))


def derive_stream(seed, *key):
    """Child generator for the integer key path ``key`` under ``seed``.

    Distinct key paths give statistically independent streams, and the
    mapping ``(seed, key) -> stream`` is stable across runs and processes
    (it is NumPy's spawn-key mechanism, not an ad-hoc hash).
    """
    if not key:
        return master_stream(seed)
    spawn = tuple(int(k) for k in key)
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=spawn))
