"""Block-buffered random stream.

The engines draw a handful of scalars per step, millions of steps per run;
per-call numpy Generator overhead then dominates. BlockRNG drains large
pre-drawn blocks (as plain Python floats) instead, implementing the scalar
slice of the Generator API the models use, and delegates array-shaped and
exotic draws to the underlying Generator. Consumption order is
deterministic, so a seed still fully determines a run.
"""

from __future__ import annotations

import numpy as np

__all__ = ["BlockRNG"]

_BLOCK = 4096


class BlockRNG:
    """Scalar-draw-optimized wrapper around ``numpy.random.Generator``."""

    def __init__(self, seed):
        self.generator = (
            seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        )
        self._uniform: list[float] = []
        self._ui = 0
        self._normal: list[float] = []
        self._ni = 0
        self._ints: dict[int, list] = {}  # upper bound -> [block, index]

    def random(self, size=None):
        if size is not None:
            return self.generator.random(size)
        i = self._ui
        if i == len(self._uniform):
            self._uniform = self.generator.random(_BLOCK).tolist()
            i = 0
        self._ui = i + 1
        return self._uniform[i]

    def standard_normal(self, size=None):
        if size is not None:
            return self.generator.standard_normal(size)
        i = self._ni
        if i == len(self._normal):
            self._normal = self.generator.standard_normal(_BLOCK).tolist()
            i = 0
        self._ni = i + 1
        return self._normal[i]

    def uniform(self, low=0.0, high=1.0, size=None):
        if size is not None:
            return self.generator.uniform(low, high, size)
        return low + (high - low) * self.random()

    def integers(self, high, size=None):
        """Uniform integer on [0, high); block-buffered per upper bound."""
        if size is not None:
            return self.generator.integers(high, size=size)
        state = self._ints.get(high)
        if state is None or state[1] == _BLOCK:
            state = [self.generator.integers(0, high, size=_BLOCK).tolist(), 0]
            self._ints[high] = state
        value = state[0][state[1]]
        state[1] += 1
        return value

    def beta(self, a, b):
        return float(self.generator.beta(a, b))
