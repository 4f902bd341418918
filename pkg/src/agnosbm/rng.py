"""Deterministic stream derivation for all randomness in the package.

Every consumer of randomness asks for a generator keyed by the user seed
plus a stream tag (strings and/or integers).  Streams with different tags
are statistically independent, so e.g. the label draw, the edge coins and
the edge-split coins of the same seed never interact, and parallel workers
can be handed pre-derived streams whose output does not depend on
scheduling.  Philox is counter-based, so generator construction is cheap.
"""

from __future__ import annotations

import zlib

import numpy as np


def _tag_words(tags) -> tuple[int, ...]:
    words: list[int] = []
    for tag in tags:
        if isinstance(tag, (int, np.integer)):
            value = int(tag)
            words.append(value & 0xFFFFFFFF)
            words.append((value >> 32) & 0xFFFFFFFF)
        else:
            words.append(zlib.crc32(str(tag).encode("utf8")))
    return tuple(words)


def derived_rng(seed: int, *tags) -> np.random.Generator:
    """Return the generator for the stream identified by ``tags``."""
    seq = np.random.SeedSequence(
        entropy=int(seed) & ((1 << 128) - 1), spawn_key=_tag_words(tags)
    )
    return np.random.Generator(np.random.Philox(seq))


def derived_seed(seed: int, *tags) -> int:
    """A 63-bit child seed, for handing to APIs that take plain seeds."""
    return int(derived_rng(seed, *tags).integers(0, 2**63 - 1))
