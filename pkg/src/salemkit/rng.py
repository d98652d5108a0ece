"""Counter-based random streams keyed by (seed, stream tag, level, node path).

Keying by node path makes every tree node's draw independent of the order in
which nodes are visited and of how deep the tree is built.
"""
import zlib

import numpy as np


def _tag_id(tag):
    return zlib.crc32(tag.encode("utf-8"))


def node_rng(seed, tag, level, word=()):
    key = [_tag_id(tag), int(level)]
    for digit in word:
        key.extend(int(v) for v in digit)
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(key))
    return np.random.Generator(np.random.Philox(ss))


def stream(seed, tag, *indices):
    """Generator for auxiliary streams that are not attached to a tree node."""
    key = (_tag_id(tag),) + tuple(int(i) for i in indices)
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=key)
    return np.random.Generator(np.random.Philox(ss))
