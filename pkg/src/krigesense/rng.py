"""Deterministic random streams.

Every randomized routine derives its generator from a root seed plus a
fixed integer key path, so independent components never share or race on
a stream and reruns with the same seed reproduce byte-identical output.
"""

from __future__ import annotations

import numpy as np

__all__ = ["stream"]


def stream(seed: int, *key: int) -> np.random.Generator:
    """Generator for the stream addressed by (seed, key...)."""
    root = int(seed) & 0xFFFFFFFFFFFFFFFF
    seq = np.random.SeedSequence(entropy=root,
                                 spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(seq)
