"""Deterministic seed derivation.

All randomness in the package flows from explicit 64-bit seeds. Sub-streams
(per episode, per experiment cell) are derived with SeedSequence so that the
same top-level seed always yields the same stream regardless of how many
other streams were drawn.
"""

from __future__ import annotations

import numpy as np


def derive_rng(*keys: int) -> np.random.Generator:
    """Generator for the sub-stream identified by an integer key path."""
    return np.random.default_rng(np.random.SeedSequence([int(k) for k in keys]))


def derive_seed(*keys: int) -> int:
    """64-bit seed for the sub-stream identified by an integer key path."""
    ss = np.random.SeedSequence([int(k) for k in keys])
    return int(ss.generate_state(1, dtype=np.uint64)[0])
