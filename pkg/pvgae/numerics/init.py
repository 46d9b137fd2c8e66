"""Parameter initializers."""

import numpy as np

from pvgae.numerics.random import RandomSource
from pvgae.numerics.tensor import Tensor


def glorot_uniform(fan_in: int, fan_out: int, rng: RandomSource) -> Tensor:
    """
    Weight matrix drawn from U(-a, a) with a = sqrt(6 / (fan_in + fan_out)).

    :return: Trainable tensor of shape [fan_in, fan_out].
    """
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return Tensor(rng.uniform(-limit, limit, (fan_in, fan_out)), requires_grad=True)


def zeros(*shape: int) -> Tensor:
    return Tensor(np.zeros(shape), requires_grad=True)
