"""Deterministic RNG derivation.

Python's builtin ``hash`` is salted per process, so every RNG stream here is
derived from sha256 over the stringified key parts.  Identical (seed, key)
pairs produce identical streams across runs, processes and worker threads,
which is what makes parallel simulation sessions reproducible.
"""
from __future__ import annotations

import hashlib
import random


def stable_seed(*parts) -> int:
    digest = hashlib.sha256("\x1f".join(str(p) for p in parts).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def derive_rng(*parts) -> random.Random:
    return random.Random(stable_seed(*parts))
