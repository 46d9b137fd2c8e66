"""
Numerical substrate: tensors with reverse-mode differentiation, seeded
random streams, Adam and parameter initializers.
"""

from pvgae.numerics.tensor import (
    PROB_EPS,
    Function,
    GradientTape,
    Tensor,
    as_tensor,
    backward,
    clamp,
    exp,
    log,
    log_softmax,
    matmul,
    relu,
    sigmoid,
    transpose,
)
from pvgae.numerics.random import RandomSource, sample_standard_normal
from pvgae.numerics.optim import AdamState, adam_step
from pvgae.numerics.init import glorot_uniform, zeros
from pvgae.numerics.gradcheck import check_gradients, numerical_gradient, relative_error

__all__ = [
    "PROB_EPS",
    "Function",
    "GradientTape",
    "Tensor",
    "as_tensor",
    "backward",
    "clamp",
    "exp",
    "log",
    "log_softmax",
    "matmul",
    "relu",
    "sigmoid",
    "transpose",
    "RandomSource",
    "sample_standard_normal",
    "AdamState",
    "adam_step",
    "glorot_uniform",
    "zeros",
    "check_gradients",
    "numerical_gradient",
    "relative_error",
]
