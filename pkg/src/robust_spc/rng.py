"""Counter-based random streams.

A stream is addressed by ``(root_seed, replicate_id, role_tag)``. The
Philox key is derived from ``(root_seed, role_tag)`` and the replicate id
occupies the high words of the 256-bit counter, so every replicate owns a
disjoint slice of the generator's output regardless of which worker
draws it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from functools import lru_cache

import numpy as np

__all__ = ["Role", "RngStream", "substream", "derive_seed", "sample_normal", "sample_chisquare"]

_MASK64 = (1 << 64) - 1


class Role(IntEnum):
    PHASE1_DATA = 0
    MODEL3_SELECTION = 1
    CALIBRATION = 2
    CORRECTION = 3
    PHASE2_DATA = 4


@lru_cache(maxsize=256)
def _philox_key(root_seed: int, role_tag: int) -> tuple[int, int]:
    ss = np.random.SeedSequence(entropy=root_seed & _MASK64, spawn_key=(int(role_tag),))
    k0, k1 = ss.generate_state(2, np.uint64)
    return int(k0), int(k1)


def derive_seed(*parts: int) -> int:
    """Mix integers into a new 64-bit root seed."""
    ss = np.random.SeedSequence([int(p) & _MASK64 for p in parts])
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class RngStream:
    root_seed: int
    replicate_id: int = 0
    role_tag: int = 0
    _gen: np.random.Generator | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.replicate_id < 0:
            raise ValueError("replicate_id must be nonnegative")

    @property
    def generator(self) -> np.random.Generator:
        if self._gen is None:
            key = np.array(_philox_key(self.root_seed, self.role_tag), dtype=np.uint64)
            rid = int(self.replicate_id)
            counter = np.array([0, 0, rid & _MASK64, (rid >> 64) & _MASK64], dtype=np.uint64)
            gen = np.random.Generator(np.random.Philox(key=key, counter=counter))
            object.__setattr__(self, "_gen", gen)
        return self._gen

    def with_role(self, role_tag: int) -> "RngStream":
        """Sibling stream for the same replicate but a different purpose."""
        return RngStream(self.root_seed, self.replicate_id, int(role_tag))

    def normal(self, mu: float = 0.0, sigma: float = 1.0, size=None):
        if sigma < 0:
            raise ValueError(f"sigma must be nonnegative, got {sigma}")
        z = self.generator.standard_normal(size)
        return mu + sigma * z

    def chisquare(self, df: int, size=None):
        # sum of df squared standard normals
        if int(df) != df or df <= 0:
            raise ValueError(f"df must be a positive integer, got {df}")
        shape = () if size is None else (size if isinstance(size, tuple) else (size,))
        z = self.generator.standard_normal(shape + (int(df),))
        out = np.einsum("...i,...i->...", z, z)
        return float(out) if size is None else out

    def uniform(self, size=None):
        return self.generator.random(size)


def substream(root_seed: int, replicate_id: int, role_tag: int) -> RngStream:
    return RngStream(int(root_seed), int(replicate_id), int(role_tag))


def sample_normal(stream: RngStream, mu: float, sigma: float, size=None):
    """Draw from N(mu, sigma**2); ``sigma == 0`` returns ``mu``."""
    return stream.normal(mu, sigma, size)


def sample_chisquare(stream: RngStream, df: int, size=None):
    return stream.chisquare(df, size)
