"""Named random substreams derived from one top-level seed.

Each consumer asks for its own stream by name, so adding a consumer never
shifts the numbers another one sees.
"""

import hashlib

import numpy as np


def derive_seed(seed: int, name: str) -> int:
    digest = hashlib.sha256(f"{int(seed)}:{name}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def stream(seed: int, name: str) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, name))
