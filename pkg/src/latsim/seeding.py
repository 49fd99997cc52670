"""Deterministic sub-seed derivation for parallel Monte Carlo runs.

Every random stream in the package is keyed by a 64-bit seed obtained by
mixing a master seed with a sequence of context parts (purpose tags, path
ids, trial indices).  The mix is a pure function of its inputs, so results
never depend on scheduling or worker count.

Mixing scheme: each part is reduced to a 64-bit token (integers are taken
mod 2^64; strings are hashed with BLAKE2b-64), XOR-ed into the accumulator,
and the accumulator is then diffused with the SplitMix64 finalizer.
"""

from __future__ import annotations

import hashlib

import numpy as np

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """One SplitMix64 step: add the golden-gamma increment and finalize."""
    x = (x + _GOLDEN) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return (x ^ (x >> 31)) & MASK64


def _token(part: int | str) -> int:
    if isinstance(part, int):
        return part & MASK64
    if isinstance(part, str):
        digest = hashlib.blake2b(part.encode("utf-8"), digest_size=8).digest()
        return int.from_bytes(digest, "little")
    raise TypeError(f"cannot mix part of type {type(part).__name__}")


def mix_seed(master_seed: int, *parts: int | str) -> int:
    """Derive a child seed from a master seed and context parts."""
    acc = master_seed & MASK64
    for part in parts:
        acc = splitmix64(acc ^ _token(part))
    return acc


def rng_for(master_seed: int, *parts: int | str) -> np.random.Generator:
    """Return a PCG64 generator seeded by ``mix_seed(master_seed, *parts)``."""
    return np.random.default_rng(mix_seed(master_seed, *parts))
