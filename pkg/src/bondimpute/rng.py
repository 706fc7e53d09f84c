"""Seeded random streams.

Every stochastic step draws from a numpy ``PCG64`` generator.  Sub-seeds for
independent streams (per repetition, per method) come from a keyed BLAKE2b
hash of the master seed and the stream labels, so a stream never depends on
how many other streams were drawn before it.
"""

from __future__ import annotations

import hashlib

import numpy as np

RNG_ALGORITHM = "numpy.PCG64; substreams = BLAKE2b-64(key='bondimpute', master seed, labels)"

_KEY = b"bondimpute"


def derive_seed(master: int, *labels: object) -> int:
    """64-bit sub-seed for the stream named by ``labels`` under ``master``."""
    msg = ":".join([str(int(master))] + [str(label) for label in labels]).encode("utf-8")
    digest = hashlib.blake2b(msg, key=_KEY, digest_size=8).digest()
    return int.from_bytes(digest, "little")


def generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))
