"""Deterministic random-stream derivation.

Every random decision in a run is drawn from a sub-generator derived from
the single root seed plus a label path, so independent subsystems never
share or reorder each other's streams.
"""

import hashlib
import random


def derive_seed(root_seed: int, *labels: object) -> int:
    """Map (root seed, label path) to a stable 64-bit seed."""
    h = hashlib.sha256()
    h.update(str(int(root_seed)).encode("ascii"))
    for label in labels:
        h.update(b"/")
        h.update(str(label).encode("utf-8"))
    return int.from_bytes(h.digest()[:8], "big")


def derive_rng(root_seed: int, *labels: object) -> random.Random:
    """Return a generator whose stream depends only on seed and labels."""
    return random.Random(derive_seed(root_seed, *labels))
