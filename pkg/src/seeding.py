from __future__ import annotations

import numpy as np

# Stream ids keep every random stream independent of the others:
#   rng = default_rng([seed, kind, index])
# so adding a pod or an attack never shifts the draws of an existing stream.
POD_STREAM = 1
ATTACK_STREAM = 2
VICTIM_STREAM = 3

UINT64_MAX = 2**64 - 1


def stream_rng(seed: int, *keys: int) -> np.random.Generator:
    """Seeded generator for the stream identified by ``keys``.

    Parameters
    ----------
    seed : int
        Scenario seed (64-bit unsigned).
    *keys : int
        Stable stream identifiers (stream kind, declaration index, ...).
    """
    if not 0 <= int(seed) <= UINT64_MAX:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return np.random.default_rng([int(seed), *map(int, keys)])
