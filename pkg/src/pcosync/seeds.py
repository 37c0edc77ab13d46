"""Deterministic seed derivation.

Every random stream in the package is derived from one master seed plus a
string/int path that names the consumer (e.g. run index, purpose).  The
derivation is a SHA-256 hash of the canonical path encoding, so results are
stable across processes, platforms, and worker counts.
"""

from __future__ import annotations

import hashlib

import numpy as np

_SEED_BITS = 63


def derive_seed(master: int, *path: int | str) -> int:
    """Map (master seed, path) to a nonnegative integer seed.

    Distinct paths give independent-looking seeds; equal paths always give
    the same seed.
    """
    tag = "|".join([str(int(master))] + [str(p) for p in path])
    digest = hashlib.sha256(tag.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> (64 - _SEED_BITS)


def spawn_rng(master: int, *path: int | str) -> np.random.Generator:
    """Fresh PCG64 generator for the given derivation path."""
    return np.random.default_rng(np.random.SeedSequence(derive_seed(master, *path)))
