"""Counter-based random streams.

Every random draw in the package comes from a Philox generator whose key is
derived from the user seed and whose 256-bit starting counter encodes
``(tag, component, index)``.  Streams addressed this way never overlap and do
not depend on how work is split across chunks or threads.
"""

import zlib

import numpy as np

# counter word 1 carries the tag; distinct consumers use distinct tags
PATHS = 0
BRIDGE = 1
STARTS = 2
GAUSS = 3

_MASK64 = (1 << 64) - 1


def _key(seed):
    ss = np.random.SeedSequence(int(seed) & _MASK64)
    return ss.generate_state(2, dtype=np.uint64)


def stream(seed, index, component=0, tag=PATHS):
    """Return the generator for ``(seed, index, component, tag)``."""
    bitgen = np.random.Philox(
        key=_key(seed),
        counter=np.array([0, tag, component, index], dtype=np.uint64),
    )
    return np.random.Generator(bitgen)


def derive_seed(seed, name):
    """Deterministic child seed, independent of ``seed`` for any distinct ``name``."""
    ss = np.random.SeedSequence([int(seed) & _MASK64, zlib.crc32(name.encode())])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def normals(seed, start, count, dims, m, tag=PATHS):
    """Standard normals of shape ``(count, dims, m)`` for paths ``start .. start+count``."""
    out = np.empty((count, dims, m))
    key = _key(seed)
    for p in range(count):
        for j in range(dims):
            bitgen = np.random.Philox(
                key=key,
                counter=np.array([0, tag, j, start + p], dtype=np.uint64),
            )
            out[p, j] = np.random.Generator(bitgen).standard_normal(m)
    return out


def uniforms(seed, start, count, dims, m, tag=BRIDGE):
    out = np.empty((count, dims, m))
    key = _key(seed)
    for p in range(count):
        for j in range(dims):
            bitgen = np.random.Philox(
                key=key,
                counter=np.array([0, tag, j, start + p], dtype=np.uint64),
            )
            out[p, j] = np.random.Generator(bitgen).random(m)
    return out
