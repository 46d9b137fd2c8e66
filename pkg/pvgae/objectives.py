"""
Loss terms.

Key features:
- KL divergence of a diagonal Gaussian posterior to the standard normal prior
- Weighted binary cross-entropy for adjacency reconstruction
- Masked cross-entropy for the partially observed sensitive attribute
- Independence penalty between the non-sensitive and sensitive latents,
  estimated by moment matching the auxiliary variable (Z_x + Z_s) / sqrt(2)
  against a standard normal
- Closed-form mutual information of a bivariate Gaussian
- Composite objectives for the sensitive branch, the graph branch and the
  plain autoencoder baseline

Every composite objective returns the scalar tensor to differentiate plus a
``LossBreakdown`` of plain floats for logging and history files.
"""

from dataclasses import dataclass, asdict, replace
from typing import Dict, Tuple, Union

import numpy as np

from pvgae.model.autoencoder import GraphAutoencoder, PvgaeModel
from pvgae.model.layers import (
    GaussianPosterior,
    LatentSample,
    decode_adjacency,
    decode_sensitive,
    reparameterize,
)
from pvgae.numerics.random import RandomSource
from pvgae.numerics.tensor import PROB_EPS, Tensor, as_tensor
from pvgae.utils.errors import ContractError, DimensionError, DomainError, NumericError

# Floor on the per-dimension variance inside the penalty's logarithm.
VARIANCE_FLOOR = 1e-6

Latent = Union[LatentSample, Tensor, np.ndarray]


@dataclass(frozen=True)
class LossBreakdown:
    """
    Scalar loss components in nats.

    ``total_graph = kl_weight * kl_x + recon_x + beta * penalty`` and
    ``total_sensitive = kl_weight * kl_s + recon_s``. The KL fields hold the
    per-node KL; ``kl_weight`` is 1/N so the prior term sits on the same
    per-entry scale as the N² reconstruction average.
    """
    kl_x: float = 0.0
    recon_x: float = 0.0
    kl_s: float = 0.0
    recon_s: float = 0.0
    penalty: float = 0.0
    beta: float = 0.0
    kl_weight: float = 1.0
    total_graph: float = 0.0
    total_sensitive: float = 0.0

    def merge(self, sensitive: "LossBreakdown") -> "LossBreakdown":
        """Graph-branch fields from ``self``, sensitive-branch fields from ``sensitive``."""
        return replace(self, kl_s=sensitive.kl_s, recon_s=sensitive.recon_s,
                       total_sensitive=sensitive.total_sensitive)

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)

    def is_finite(self) -> bool:
        return all(np.isfinite(v) for v in asdict(self).values())


@dataclass(frozen=True)
class PenaltyStats:
    """
    Per-dimension diagnostics of the auxiliary variable ``a = (Z_x + Z_s) / sqrt(2)``.

    ``implied_rho`` is ``v - 1`` clipped to [-1, 1]: the correlation that
    would explain the observed variance if both marginals were standard
    normal. ``empirical_rho`` is the sample correlation of Z_x and Z_s.
    """
    mean: np.ndarray
    variance: np.ndarray
    implied_rho: np.ndarray
    empirical_rho: np.ndarray


def _z(latent: Latent) -> Tensor:
    return latent.z if isinstance(latent, LatentSample) else as_tensor(latent)


def gaussian_kl(post: GaussianPosterior) -> Tensor:
    """
    ``KL[q || N(0, I)]`` summed over latent dimensions and averaged over nodes.
    """
    n = post.mean.shape[0]
    terms = post.mean.square() + post.logvar.exp() - 1.0 - post.logvar
    return terms.sum() * (0.5 / n)


def kl_weight(num_nodes: int) -> float:
    """
    Weight of the per-node KL inside a branch objective.

    The reconstruction term averages over N² adjacency entries, so the
    per-node KL is scaled by a further 1/N. Unscaled, the prior dominates
    and every posterior collapses onto N(0, I).
    """
    if num_nodes < 1:
        raise ContractError(f"kl_weight needs at least one node, got {num_nodes}")
    return 1.0 / num_nodes


def adjacency_recon_loss(probs: Tensor,
                         adjacency: np.ndarray,
                         weighted: bool = True,
                         self_loops: bool = False
                         ) -> Tensor:
    """
    Weighted binary cross-entropy between edge probabilities and the adjacency.

    The target is A, or A + I when ``self_loops`` is set. With T the target,
    the positive-class weight is ``(N² - ΣT) / ΣT`` and the normalization
    ``N² / (2 (N² - ΣT))``; for the default target ΣT = 2|E|. With
    ``weighted=False`` this is the plain mean cross-entropy.

    :param probs: Edge probabilities P, [N, N].
    :param adjacency: Raw 0/1 adjacency A with zero diagonal, [N, N].
    :raises NumericError: If P holds values that are not finite or outside [0, 1].
    :raises ContractError: If the adjacency has no edges.
    """
    probs = as_tensor(probs)
    adjacency = np.asarray(adjacency, dtype=np.float64)
    if probs.shape != adjacency.shape or probs.ndim != 2 or probs.shape[0] != probs.shape[1]:
        raise DimensionError("adjacency_recon_loss", probs.shape, adjacency.shape)
    if not np.all(np.isfinite(probs.data)) or probs.data.min() < 0.0 or probs.data.max() > 1.0:
        raise NumericError("edge probabilities must be finite and within [0, 1]")

    n = adjacency.shape[0]
    if adjacency.sum() <= 0:
        raise ContractError("adjacency reconstruction needs at least one edge")

    target = adjacency + np.eye(n) if self_loops else adjacency
    positives = target.sum()
    if weighted and positives >= n * n:
        raise ContractError("weighted reconstruction needs at least one non-edge")
    if weighted:
        pos_weight = (n * n - positives) / positives
        norm = n * n / (2.0 * (n * n - positives))
    else:
        pos_weight, norm = 1.0, 1.0

    clamped = probs.clamp(PROB_EPS, 1.0 - PROB_EPS)
    log_likelihood = (Tensor(pos_weight * target) * clamped.log()
                      + Tensor(1.0 - target) * (1.0 - clamped).log())
    return -log_likelihood.mean() * norm


def sensitive_recon_loss(logits: Tensor, sensitive: np.ndarray, observed_mask: np.ndarray) -> Tensor:
    """
    Mean cross-entropy over observed nodes only.

    Unobserved rows contribute exactly zero gradient.

    :raises ContractError: If no node is observed.
    """
    logits = as_tensor(logits)
    sensitive = np.asarray(sensitive, dtype=np.int64)
    mask = np.asarray(observed_mask, dtype=bool)
    count = int(mask.sum())
    if count == 0:
        raise ContractError("sensitive reconstruction needs at least one observed node")
    n, classes = logits.shape
    if sensitive.shape != (n,) or mask.shape != (n,):
        raise DimensionError("sensitive_recon_loss", logits.shape, sensitive.shape)
    if sensitive[mask].max() >= classes:
        raise DimensionError("sensitive_recon_loss classes", (classes,), (int(sensitive[mask].max()) + 1,))

    selector = np.zeros((n, classes))
    selector[np.flatnonzero(mask), sensitive[mask]] = 1.0
    return -(logits.log_softmax(axis=1) * Tensor(selector)).sum() / float(count)


def _correlation(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    xc = x - x.mean(axis=0)
    yc = y - y.mean(axis=0)
    denom = np.sqrt((xc * xc).sum(axis=0) * (yc * yc).sum(axis=0))
    return np.divide((xc * yc).sum(axis=0), denom, out=np.zeros(x.shape[1]), where=denom > 0)


def independence_penalty(z_x: Latent, z_s: Latent) -> Tuple[Tensor, PenaltyStats]:
    """
    KL of the auxiliary variable's moments to a standard normal.

    With ``a = (Z_x + Z_s) / sqrt(2)``, per-dimension batch mean ``m`` and
    population variance ``v`` across nodes, the penalty is the mean over
    dimensions of ``0.5 (v + m² - 1 - ln max(v, 1e-6))``.

    :return: Tuple of (penalty tensor, diagnostics).
    :raises DimensionError: If the two latents differ in shape.
    :raises ContractError: If there are fewer than two nodes.
    """
    zx, zs = _z(z_x), _z(z_s)
    if zx.shape != zs.shape or zx.ndim != 2:
        raise DimensionError("independence_penalty", zx.shape, zs.shape)
    n = zx.shape[0]
    if n < 2:
        raise ContractError(f"independence penalty needs at least 2 nodes, got {n}")

    aux = (zx + zs) * (1.0 / np.sqrt(2.0))
    mean = aux.mean(axis=0)
    variance = (aux - mean).square().mean(axis=0)
    per_dim = (variance + mean.square() - 1.0 - variance.clamp(VARIANCE_FLOOR, np.inf).log()) * 0.5
    penalty = per_dim.mean()

    stats = PenaltyStats(
        mean=mean.numpy(),
        variance=variance.numpy(),
        implied_rho=np.clip(variance.data - 1.0, -1.0, 1.0),
        empirical_rho=_correlation(zx.data, zs.data),
    )
    return penalty, stats


def mutual_info_gaussian(rho: float) -> float:
    """
    Mutual information ``-0.5 ln(1 - rho²)`` of a bivariate Gaussian, in nats.

    :raises DomainError: If ``|rho| >= 1``.
    """
    rho = float(rho)
    if not np.isfinite(rho) or abs(rho) >= 1.0:
        raise DomainError(f"correlation must satisfy |rho| < 1, got {rho}")
    return float(-0.5 * np.log1p(-rho * rho))


def loss_sensitive(model: PvgaeModel,
                   adj_norm: np.ndarray,
                   features: np.ndarray,
                   sensitive: np.ndarray,
                   observed_mask: np.ndarray,
                   rng: RandomSource
                   ) -> Tuple[Tensor, LossBreakdown]:
    """
    Objective for the sensitive branch: ``kl_s / N + recon_s``.

    H is computed from the current graph parameters and detached, so
    gradients reach only ``enc_s.*`` and ``dec_s.*``.
    """
    hidden = model.hidden(adj_norm, features).detach()
    post_s = model.posterior_s(hidden)
    z_s = reparameterize(post_s, rng.derive("z_s"))
    logits = decode_sensitive(z_s, model.head("dec_s"))

    weight = kl_weight(hidden.shape[0])
    kl_s = gaussian_kl(post_s)
    recon_s = sensitive_recon_loss(logits, sensitive, observed_mask)
    total = kl_s * weight + recon_s
    return total, LossBreakdown(kl_s=kl_s.item(), recon_s=recon_s.item(), kl_weight=weight,
                                total_sensitive=total.item())


def _graph_terms(model: GraphAutoencoder, adj_norm, features, adjacency, rng: RandomSource):
    hidden = model.hidden(adj_norm, features)
    post_x = model.posterior_x(hidden)
    z_x = reparameterize(post_x, rng.derive("z_x"))
    kl_x = gaussian_kl(post_x)
    recon_x = adjacency_recon_loss(decode_adjacency(z_x), adjacency)
    return hidden, z_x, kl_x, recon_x


def loss_graph(model: PvgaeModel,
               adj_norm: np.ndarray,
               features: np.ndarray,
               adjacency: np.ndarray,
               beta: float,
               rng: RandomSource
               ) -> Tuple[Tensor, LossBreakdown]:
    """
    Objective for the graph branch: ``kl_x / N + recon_x + beta * penalty``.

    Z_s is drawn from the sensitive head with its parameters frozen; it
    still depends on H, so the penalty shapes the shared convolution and
    the non-sensitive head. The penalty is always computed and reported,
    and left out of the total when ``beta`` is 0.

    :raises ContractError: If ``beta`` is negative.
    """
    if beta < 0:
        raise ContractError(f"beta must be non-negative, got {beta}")
    hidden, z_x, kl_x, recon_x = _graph_terms(model, adj_norm, features, adjacency, rng)

    frozen_head = {name: t.detach() for name, t in model.head("enc_s").items()}
    z_s = reparameterize(model.posterior_s(hidden, frozen_head), rng.derive("z_s"))
    penalty, _ = independence_penalty(z_x, z_s)

    weight = kl_weight(hidden.shape[0])
    total = kl_x * weight + recon_x
    if beta:
        total = total + penalty * float(beta)
    return total, LossBreakdown(kl_x=kl_x.item(), recon_x=recon_x.item(), penalty=penalty.item(),
                                beta=float(beta), kl_weight=weight, total_graph=total.item())


def loss_vgae(model: GraphAutoencoder,
              adj_norm: np.ndarray,
              features: np.ndarray,
              adjacency: np.ndarray,
              rng: RandomSource
              ) -> Tuple[Tensor, LossBreakdown]:
    """Plain autoencoder objective ``kl_x / N + recon_x``; penalty reported as 0."""
    hidden, _, kl_x, recon_x = _graph_terms(model, adj_norm, features, adjacency, rng)
    weight = kl_weight(hidden.shape[0])
    total = kl_x * weight + recon_x
    return total, LossBreakdown(kl_x=kl_x.item(), recon_x=recon_x.item(), kl_weight=weight,
                                total_graph=total.item())
