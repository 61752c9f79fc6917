"""Labelled seed derivation.

One integer seeds an entire run.  Every consumer (grouping, shuffles, known
pair sampling, ICA init, ...) draws from its own generator keyed by a text
label and optional integer indices, so adding a consumer never shifts the
stream of another one.
"""
from __future__ import annotations

import zlib

import numpy as np


def derive_rng(seed: int, label: str, *indices: int) -> np.random.Generator:
    key = (zlib.crc32(label.encode("utf-8")),) + tuple(int(i) for i in indices)
    ss = np.random.SeedSequence(entropy=int(seed) & (2**128 - 1), spawn_key=key)
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(seed: int, label: str, *indices: int) -> int:
    """Integer child seed, for APIs that take a seed rather than a generator."""
    return int(derive_rng(seed, label, *indices).integers(0, 2**63 - 1))
