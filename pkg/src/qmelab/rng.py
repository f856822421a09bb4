"""Seeded random streams.

Every stream is numpy's PCG64 bit generator keyed by a ``SeedSequence`` whose
entropy is the tuple ``(seed, *path)`` of non-negative integers. Two streams
with the same tuple are identical; different tuples are statistically
independent. Reimplementations reproduce a stream from ``ALGORITHM`` plus the
tuple alone.
"""

from __future__ import annotations

import os

import numpy as np

ALGORITHM = "numpy-pcg64/seedsequence(seed,*path)"

SEED_ENV = "QMELAB_SEED"

# stream tags, the second element of every path
TAG_SWAP_BATCH = 1
TAG_PIPELINE = 2
TAG_DATA = 3
TAG_TRIAL = 4


def _check(seed: int) -> int:
    seed = int(seed)
    if seed < 0 or seed >= 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def substream(seed: int, *path: int) -> np.random.Generator:
    """Generator for the stream named by ``(seed, *path)``."""
    entropy = [_check(seed), *(int(p) for p in path)]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def derive_seed(seed: int, *path: int) -> int:
    """A child 64-bit seed, deterministic in ``(seed, *path)``."""
    ss = np.random.SeedSequence([_check(seed), *(int(p) for p in path)])
    return int(ss.generate_state(1, np.uint64)[0])


def resolve_seed(seed: int | None, default: int = 0) -> int:
    """Explicit seed, else ``$QMELAB_SEED``, else ``default``."""
    if seed is not None:
        return _check(seed)
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return _check(int(env))
        except ValueError as exc:
            raise ValueError(f"{SEED_ENV}={env!r} is not a valid seed") from exc
    return default
