"""Deterministic seed derivation for parallel Monte Carlo.

All randomness flows from a single 64-bit master seed. Each (purpose,
replication) gets its own counter-based Philox stream derived through
numpy's SeedSequence keyed on integer tags, so results do not depend on
scheduling or on how many other simulations ran before.

Normal variates are produced by numpy's Generator.standard_normal
(ziggurat method); this choice is fixed because tests pin seeds.
"""

from __future__ import annotations

import numpy as np

# Stream tags; kept as module constants so derived seeds are stable.
STREAM_NULL = 0
STREAM_POWER = 1
STREAM_MOMENTS = 2
STREAM_STATIONARY = 3


def derive_seed(master_seed: int, *tags: int) -> int:
    """Derive a 64-bit child seed from a master seed and integer tags."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=tuple(int(t) for t in tags))
    return int(ss.generate_state(1, np.uint64)[0])


def generator(seed: int) -> np.random.Generator:
    """Philox generator for a 64-bit seed."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def h_tag(h: float) -> int:
    """Stable integer tag for a local-alternative magnitude h."""
    return int(round(h * 10_000))
