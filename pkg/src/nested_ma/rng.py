"""Counter-based random streams keyed by (seed, n, replicate, purpose).

Each stream is an independent Philox generator whose key is derived from
the tuple through ``SeedSequence``, so replicates can run in any order or
in parallel and still draw identical numbers.
"""
from __future__ import annotations

import zlib

import numpy as np


def purpose_id(tag: str) -> int:
    return zlib.crc32(tag.encode("utf-8"))


def rng_stream(seed: int, n: int, replicate: int, purpose: str) -> np.random.Generator:
    ss = np.random.SeedSequence([int(seed) & (2**64 - 1), int(n), int(replicate), purpose_id(purpose)])
    return np.random.Generator(np.random.Philox(ss))
