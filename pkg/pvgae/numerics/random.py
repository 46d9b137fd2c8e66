"""
Seeded random streams.

A ``RandomSource`` owns a counter-based Philox generator keyed by a 64-bit
seed plus a spawn key. ``derive(name)`` returns an independent child stream
whose key is the parent's key extended by a hash of ``name``; the child does
not advance the parent. Every stochastic step in the toolkit (splits,
masking, initialization, reparameterization, attackers) draws from its own
named stream, so adding a draw in one place never shifts another.

There is no module-level or global randomness.
"""

import zlib
from typing import Optional, Sequence, Tuple

import numpy as np

from pvgae.numerics.tensor import Tensor
from pvgae.utils.errors import ContractError

_SEED_MASK = (1 << 64) - 1


class RandomSource:
    """
    Reproducible random stream.

    :param seed: Non-negative integer seed (reduced modulo 2**64).
    :param key: Spawn key path identifying a derived stream.
    """

    def __init__(self, seed: int, key: Tuple[int, ...] = ()):
        self.seed = int(seed) & _SEED_MASK
        self.key = tuple(int(k) for k in key)
        sequence = np.random.SeedSequence(self.seed, spawn_key=self.key)
        self._generator = np.random.Generator(np.random.Philox(sequence))

    def derive(self, name: str) -> "RandomSource":
        """Independent child stream identified by ``name``."""
        return RandomSource(self.seed, self.key + (zlib.crc32(name.encode("utf-8")),))

    @property
    def generator(self) -> np.random.Generator:
        return self._generator

    def standard_normal(self, shape: Sequence[int]) -> np.ndarray:
        return self._generator.standard_normal(tuple(shape))

    def uniform(self, low: float = 0.0, high: float = 1.0, size=None) -> np.ndarray:
        return self._generator.uniform(low, high, size)

    def integers(self, low: int, high: Optional[int] = None, size=None) -> np.ndarray:
        return self._generator.integers(low, high, size)

    def permutation(self, n: int) -> np.ndarray:
        return self._generator.permutation(n)

    def choice(self, n: int, size: int, replace: bool = False) -> np.ndarray:
        return self._generator.choice(n, size=size, replace=replace)

    def sklearn_seed(self) -> int:
        """A 31-bit integer seed for scikit-learn estimators."""
        return int(self._generator.integers(0, 2**31 - 1))

    def __repr__(self) -> str:
        return f"RandomSource(seed={self.seed}, key={self.key})"


def sample_standard_normal(shape: Sequence[int], rng: RandomSource) -> Tensor:
    """
    I.i.d. standard normal draws as a constant tensor.

    :param shape: Non-empty shape.
    :param rng: Stream to draw from; it advances.
    :raises ContractError: If ``shape`` is empty.
    """
    shape = tuple(int(s) for s in shape)
    if len(shape) == 0:
        raise ContractError("sample_standard_normal needs a non-empty shape")
    return Tensor(rng.standard_normal(shape))
