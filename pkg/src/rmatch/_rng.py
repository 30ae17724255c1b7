"""Seed-derived random substreams.

Substream ``(seed, *keys)`` is a pure function of its arguments, so work
split across tasks is reproducible regardless of scheduling.
"""

import hashlib
import random

import numpy as np


def derive(seed: int, *keys) -> int:
    digest = hashlib.sha256(repr((int(seed),) + tuple(keys)).encode()).digest()
    return int.from_bytes(digest[:8], "little")


def substream(seed: int, *keys) -> random.Random:
    return random.Random(derive(seed, *keys))


def np_substream(seed: int, *keys) -> np.random.Generator:
    return np.random.default_rng(derive(seed, *keys))
