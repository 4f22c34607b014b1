"""Deterministic seed derivation and named RNG streams."""

from __future__ import annotations

import hashlib

import numpy as np

SEED_BITS = 64


def derive_seed(*parts) -> int:
    """Hash arbitrary printable parts into a 64-bit seed.

    Stable across processes and Python versions (unlike ``hash``).
    """
    text = "\x1f".join(repr(p) for p in parts).encode()
    return int.from_bytes(hashlib.blake2b(text, digest_size=8).digest(), "big")


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for ``(seed, *key)``; keys are non-negative ints."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(x) for x in key)))


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)
