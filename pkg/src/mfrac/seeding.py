"""Counter-based seed splitting.

Every random stream is a Philox generator keyed by a SeedSequence built from a
master seed and a tuple of labels, so a stream never depends on how many other
streams were drawn before it or in which order.
"""

from __future__ import annotations

import hashlib

import numpy as np


def _label_word(label) -> int:
    if isinstance(label, (bool, np.bool_)):
        label = int(label)
    if isinstance(label, (int, np.integer)) and label >= 0:
        return int(label)
    digest = hashlib.sha256(repr(label).encode()).digest()
    # top bit set keeps hashed labels disjoint from small integer labels
    return int.from_bytes(digest[:8], "little") | (1 << 63)


def derive_seed(master: int, *labels) -> int:
    """Deterministic 63-bit child seed for ``(master, *labels)``."""
    ss = np.random.SeedSequence(int(master), spawn_key=tuple(_label_word(x) for x in labels))
    lo, hi = ss.generate_state(2, dtype=np.uint32)
    return int((int(hi) << 32 | int(lo)) & ((1 << 63) - 1))


def rng_from_seed(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))
