"""
Finite-difference gradient checking.

Used by the test suite and handy when adding a new operation: compare the
tape's analytic gradient against central differences on every entry.
"""

from typing import Callable, Dict, Mapping

import numpy as np

from pvgae.numerics.tensor import Tensor, backward


def numerical_gradient(fn: Callable[[Dict[str, Tensor]], Tensor],
                       params: Mapping[str, Tensor],
                       name: str,
                       h: float = 1e-5
                       ) -> np.ndarray:
    """
    Central-difference gradient of ``fn`` with respect to ``params[name]``.

    :param fn: Maps a parameter dict to a scalar tensor.
    :param params: Point at which to differentiate.
    :param name: Which parameter to perturb.
    :param h: Step size.
    """
    base = params[name].data
    grad = np.zeros_like(base)
    for index in np.ndindex(base.shape):
        values = []
        for delta in (h, -h):
            shifted = base.copy()
            shifted[index] += delta
            trial = dict(params)
            trial[name] = Tensor(shifted)
            values.append(fn(trial).item())
        grad[index] = (values[0] - values[1]) / (2.0 * h)
    return grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-8) -> float:
    """Largest entrywise |a - n| / max(|a|, |n|, floor)."""
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return float(np.max(np.abs(analytic - numeric) / scale)) if analytic.size else 0.0


def check_gradients(fn: Callable[[Dict[str, Tensor]], Tensor],
                    params: Mapping[str, Tensor],
                    h: float = 1e-5
                    ) -> Dict[str, float]:
    """
    Compare analytic and numerical gradients for every parameter.

    :return: Maximum relative error per parameter name.
    """
    tracked = {k: Tensor(v.data, requires_grad=True) for k, v in params.items()}
    analytic = backward(fn(tracked), tracked)
    return {
        name: relative_error(analytic[name], numerical_gradient(fn, params, name, h))
        for name in params
    }
