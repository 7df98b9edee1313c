"""Seedable, splittable random streams.

Every stream is a Philox counter-based generator keyed by ``(seed, path)``,
where ``path`` is the tuple of stream ids leading to it. Children never share
state with their parent or with siblings, so Monte Carlo replications can be
run in any order or in parallel without changing a single draw.
"""

import numpy as np


class RandomSource:
    """A reproducible random stream identified by a seed and a stream path."""

    def __init__(self, seed, stream=0, _parent_path=()):
        if not 0 <= int(seed) < 2**64:
            raise ValueError(f"seed must fit in 64 unsigned bits, got {seed}")
        if not 0 <= int(stream) < 2**64:
            raise ValueError(f"stream id must fit in 64 unsigned bits, got {stream}")
        self.seed = int(seed)
        self.stream = int(stream)
        self.path = tuple(_parent_path) + (self.stream,)
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=self.path)
        self.generator = np.random.Generator(np.random.Philox(seq))

    def child(self, stream):
        """Derive an independent stream; same id always gives the same stream."""
        return RandomSource(self.seed, stream, self.path)

    def normal(self, size=None, scale=1.0):
        return self.generator.normal(0.0, scale, size)

    def standard_normal(self, size=None):
        return self.generator.standard_normal(size)

    def uniform(self, size=None):
        return self.generator.random(size)

    def integers(self, high, size=None):
        return self.generator.integers(0, high, size)

    def __repr__(self):
        return f"RandomSource(seed={self.seed}, path={self.path})"
