"""
Network building blocks.

Each function takes its parameters as a plain name → tensor mapping so the
same code serves the trainer, the gradient checks and export. Parameter
names inside a mapping are local to the block (``weight_0``, ``mean_bias``,
...); the model adds the group prefix.
"""

from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

from pvgae.numerics.random import RandomSource, sample_standard_normal
from pvgae.numerics.tensor import PROB_EPS, Tensor, as_tensor
from pvgae.utils.errors import DimensionError

LOGVAR_MIN = -10.0
LOGVAR_MAX = 10.0

Params = Mapping[str, Tensor]


@dataclass(frozen=True)
class GaussianPosterior:
    """Diagonal Gaussian per node: mean and clamped log-variance, both [N, d]."""
    mean: Tensor
    logvar: Tensor

    def __post_init__(self):
        if self.mean.shape != self.logvar.shape:
            raise DimensionError("GaussianPosterior", self.mean.shape, self.logvar.shape)

    @property
    def shape(self):
        return self.mean.shape


@dataclass(frozen=True)
class LatentSample:
    """Reparameterized draw ``z = mean + exp(logvar / 2) * noise``."""
    z: Tensor
    posterior: GaussianPosterior
    noise: np.ndarray


def gnn_forward(adj_norm: Union[Tensor, np.ndarray], features: Union[Tensor, np.ndarray], params: Params) -> Tensor:
    """
    Two-layer graph convolution producing the shared representation H.

    ``H = relu(Â · relu(Â · X · W0 + b0) · W1 + b1)``

    :param adj_norm: Normalized adjacency Â, [N, N].
    :param features: Node features X, [N, D].
    :param params: ``weight_0`` [D, h], ``bias_0`` [h], ``weight_1`` [h, h], ``bias_1`` [h].
    :return: H with shape [N, h].
    :raises DimensionError: If Â is not square or does not match X.
    """
    adj_norm = as_tensor(adj_norm)
    features = as_tensor(features)
    n = adj_norm.shape[0]
    if adj_norm.ndim != 2 or adj_norm.shape[1] != n:
        raise DimensionError("gnn_forward adjacency", adj_norm.shape)
    if features.ndim != 2 or features.shape[0] != n:
        raise DimensionError("gnn_forward", adj_norm.shape, features.shape)

    hidden = (adj_norm @ (features @ params["weight_0"]) + params["bias_0"]).relu()
    return (adj_norm @ (hidden @ params["weight_1"]) + params["bias_1"]).relu()


def encode(hidden: Tensor, head: Params) -> GaussianPosterior:
    """
    Variational head over H.

    :param hidden: H, [N, h].
    :param head: ``mean_weight``/``logvar_weight`` [h, d] and matching biases [d].
    :return: Posterior with log-variance clamped to [-10, 10].
    """
    mean = hidden @ head["mean_weight"] + head["mean_bias"]
    logvar = (hidden @ head["logvar_weight"] + head["logvar_bias"]).clamp(LOGVAR_MIN, LOGVAR_MAX)
    return GaussianPosterior(mean=mean, logvar=logvar)


def reparameterize(post: GaussianPosterior, rng: RandomSource) -> LatentSample:
    """
    Draw one sample from ``post``; gradients reach the mean and log-variance.
    """
    noise = sample_standard_normal(post.shape, rng)
    z = post.mean + (post.logvar * 0.5).exp() * noise
    return LatentSample(z=z, posterior=post, noise=noise.data)


def decode_adjacency(latent: Union[LatentSample, Tensor]) -> Tensor:
    """
    Inner-product structure decoder.

    :return: Edge probabilities ``sigmoid(Z Zᵀ)`` clamped into [eps, 1 - eps].
    """
    z = latent.z if isinstance(latent, LatentSample) else as_tensor(latent)
    return (z @ z.T).sigmoid().clamp(PROB_EPS, 1.0 - PROB_EPS)


def decode_sensitive(latent: Union[LatentSample, Tensor], params: Params) -> Tensor:
    """
    Linear sensitive-attribute decoder.

    :param params: ``weight`` [d, C] and ``bias`` [C].
    :return: Class logits, [N, C].
    """
    z = latent.z if isinstance(latent, LatentSample) else as_tensor(latent)
    if z.ndim != 2 or z.shape[1] != params["weight"].shape[0]:
        raise DimensionError("decode_sensitive", z.shape, params["weight"].shape)
    return z @ params["weight"] + params["bias"]
