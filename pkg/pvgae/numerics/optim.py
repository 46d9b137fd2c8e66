"""
Adam optimizer.

``adam_step`` is a pure function: it never mutates the tensors or the state
it receives. It returns fresh parameter tensors and a fresh ``AdamState``
with the step count advanced by one, so a trainer can keep the previous
values around for diagnostics or an abort report.
"""

from dataclasses import dataclass, field
from typing import Dict, Mapping, Tuple

import numpy as np

from pvgae.numerics.tensor import Tensor
from pvgae.utils.errors import DimensionError, NumericError


@dataclass(frozen=True)
class AdamState:
    """
    Moment estimates keyed by parameter name.
    """
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    first_moment: Dict[str, np.ndarray] = field(default_factory=dict)
    second_moment: Dict[str, np.ndarray] = field(default_factory=dict)


def adam_step(params: Mapping[str, Tensor],
              grads: Mapping[str, np.ndarray],
              state: AdamState,
              lr: float
              ) -> Tuple[Dict[str, Tensor], AdamState]:
    """
    Apply one bias-corrected Adam update.

    :param params: Parameter tensors by name.
    :param grads: Gradient arrays by name; must cover every parameter.
    :param state: Moments from the previous step (empty on the first).
    :param lr: Learning rate; ``0`` leaves parameters unchanged.
    :return: Tuple of (updated parameters, updated state).
    :raises DimensionError: If a gradient or moment does not match its parameter.
    """
    step = state.step + 1
    first: Dict[str, np.ndarray] = {}
    second: Dict[str, np.ndarray] = {}
    updated: Dict[str, Tensor] = {}

    correction1 = 1.0 - state.beta1 ** step
    correction2 = 1.0 - state.beta2 ** step

    for name, param in params.items():
        grad = np.asarray(grads[name], dtype=np.float64)
        if grad.shape != param.shape:
            raise DimensionError(f"adam_step[{name}]", param.shape, grad.shape)

        m_prev = state.first_moment.get(name, np.zeros_like(param.data))
        v_prev = state.second_moment.get(name, np.zeros_like(param.data))
        if m_prev.shape != param.shape or v_prev.shape != param.shape:
            raise DimensionError(f"adam_step[{name}] moments", param.shape, m_prev.shape)

        m = state.beta1 * m_prev + (1.0 - state.beta1) * grad
        v = state.beta2 * v_prev + (1.0 - state.beta2) * grad * grad
        m_hat = m / correction1
        v_hat = v / correction2
        value = param.data - lr * m_hat / (np.sqrt(v_hat) + state.eps)
        if not np.all(np.isfinite(value)):
            raise NumericError(f"adam_step produced non-finite values for {name}")

        first[name] = m
        second[name] = v
        updated[name] = Tensor(value, requires_grad=param.requires_grad)

    new_state = AdamState(
        beta1=state.beta1,
        beta2=state.beta2,
        eps=state.eps,
        step=step,
        first_moment={**state.first_moment, **first},
        second_moment={**state.second_moment, **second},
    )
    return updated, new_state
