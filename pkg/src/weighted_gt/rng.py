"""Reproducible random streams.

All randomness in the package flows through :class:`Stream`, a thin wrapper
around numpy's PCG64 bit generator.  The contract:

* A stream is seeded with a non-negative integer ``seed`` via
  ``numpy.random.PCG64(seed)``, which hashes the seed through numpy's
  ``SeedSequence``.  Both algorithms are fully specified upstream and produce
  identical output on every platform.
* Uniforms are ``Generator.random`` doubles in [0, 1).
* Standard normals use the Box-Muller transform.  Each pair of normals
  consumes exactly two uniforms ``(u1, u2)``::

      r = sqrt(-2 log(1 - u1));  z0 = r cos(2 pi u2);  z1 = r sin(2 pi u2)

  An odd request draws a full pair and discards the sine half of the last one.

Gradient noise uses one fresh stream per (node, iteration) with seed
``s0 + 1000 * i + 10 * t`` (``i`` is the 0-based node index).  That formula
collides whenever ``10 * t`` spans 1000, e.g. ``(i, t) = (0, 100)`` and
``(1, 0)`` share a seed; it is kept verbatim so runs stay comparable with
other implementations of the same protocol.
"""

from __future__ import annotations

import numpy as np


def composite_seed(s0: int, i: int, t: int) -> int:
    """Seed for the noise draw of node ``i`` at iteration ``t``."""
    return s0 + 1000 * i + 10 * t


class Stream:
    """Seeded PCG64 stream with Box-Muller normals."""

    def __init__(self, seed: int):
        if seed < 0:
            raise ValueError(f"seed must be non-negative, got {seed}")
        self.seed = int(seed)
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def uniform(self, size=None, low: float = 0.0, high: float = 1.0):
        u = self._gen.random(size)
        return low + (high - low) * u

    def integers(self, high: int) -> int:
        """Uniform integer in ``[0, high)``."""
        return int(self._gen.integers(high))

    def normal(self, size) -> np.ndarray:
        shape = (size,) if np.isscalar(size) else tuple(size)
        count = int(np.prod(shape))
        pairs = (count + 1) // 2
        u = self._gen.random(2 * pairs)
        u1, u2 = u[0::2], u[1::2]
        r = np.sqrt(-2.0 * np.log1p(-u1))
        z = np.empty(2 * pairs)
        z[0::2] = r * np.cos(2.0 * np.pi * u2)
        z[1::2] = r * np.sin(2.0 * np.pi * u2)
        return z[:count].reshape(shape)


def as_stream(seed_or_stream) -> Stream:
    if isinstance(seed_or_stream, Stream):
        return seed_or_stream
    return Stream(int(seed_or_stream))
