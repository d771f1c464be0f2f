"""Counter-based random streams.

Each stream is a Philox generator keyed by ``(seed, replication, purpose)``
through ``SeedSequence``; draws never depend on execution order or on how
replications are spread over workers. Within a stream, region ``r`` always
owns row ``r`` of every array drawn from it.
"""

from __future__ import annotations

import zlib

import numpy as np

PURPOSES = ("regions", "local_mw", "skills")


def purpose_code(purpose: str) -> int:
    if purpose not in PURPOSES:
        raise ValueError(f"unknown draw purpose {purpose!r}; expected one of {PURPOSES}")
    return zlib.crc32(purpose.encode())


def stream(seed: int, replication: int, purpose: str) -> np.random.Generator:
    if seed < 0 or replication < 0:
        raise ValueError("seed and replication index must be nonnegative")
    ss = np.random.SeedSequence([int(seed), int(replication), purpose_code(purpose)])
    return np.random.Generator(np.random.Philox(ss))
