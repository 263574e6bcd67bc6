"""Named, counter-based random substreams derived from one master seed.

Every consumer draws from its own Philox stream keyed by
``SeedSequence(seed, spawn_key=(index,))``, so adding draws to one stream
never shifts another.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

STREAM_NAMES = ("source", "channel", "eve", "bob", "schedule")
MAX_SEED = 2**64 - 1


def substream(seed: int, name: str) -> np.random.Generator:
    if name not in STREAM_NAMES:
        raise KeyError(f"unknown stream {name!r}; expected one of {STREAM_NAMES}")
    if not 0 <= int(seed) <= MAX_SEED:
        raise DomainError(f"seed must be a 64-bit unsigned integer, got {seed}")
    ss = np.random.SeedSequence(int(seed), spawn_key=(STREAM_NAMES.index(name),))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class Streams:
    source: np.random.Generator
    channel: np.random.Generator
    eve: np.random.Generator
    bob: np.random.Generator
    schedule: np.random.Generator

    @classmethod
    def from_seed(cls, seed: int) -> "Streams":
        return cls(**{name: substream(seed, name) for name in STREAM_NAMES})


def as_streams(rng: "Streams | np.random.Generator | int") -> Streams:
    """Accept a seed, a single Generator (split into children) or ready Streams."""
    if isinstance(rng, Streams):
        return rng
    if isinstance(rng, np.random.Generator):
        return Streams(*rng.spawn(len(STREAM_NAMES)))
    return Streams.from_seed(int(rng))
