"""
Stochastic block model generator.

Produces a graph whose block structure is correlated with a planted
sensitive attribute, so there is something for an attacker to recover and
for the independence penalty to remove. Labels for the utility task are a
second planted partition drawn independently of the blocks.
"""

from dataclasses import dataclass, asdict
from typing import Tuple

import numpy as np

from pvgae.graph.base import Graph, NodeAnnotations
from pvgae.numerics.random import RandomSource
from pvgae.utils.errors import ConfigError
from pvgae.utils.logging import get_logger

log = get_logger("graph.sbm")


@dataclass
class SbmConfig:
    """
    Synthetic dataset parameters.
    """
    # Number of nodes N
    num_nodes: int = 300
    # Number of equally sized blocks B
    num_blocks: int = 2
    # Within-block edge probability
    p_in: float = 0.05
    # Cross-block edge probability
    p_out: float = 0.005
    # Feature dimension D (must hold the one-hot signals)
    feature_dim: int = 8
    # Standard deviation of the Gaussian feature noise
    feature_noise: float = 0.5
    # Probability that a node's sensitive attribute disagrees with its block
    flip_prob: float = 0.1
    # Number of utility label classes
    num_label_classes: int = 2
    # Whether features carry a one-hot copy of the label
    label_signal: bool = True

    def validate(self) -> None:
        """
        :raises ConfigError: On any out-of-range parameter.
        """
        if self.num_nodes < 2:
            raise ConfigError(f"num_nodes must be at least 2, got {self.num_nodes}")
        if not 1 <= self.num_blocks <= self.num_nodes:
            raise ConfigError(f"num_blocks must lie in [1, num_nodes], got {self.num_blocks}")
        if not 0.0 <= self.p_out < self.p_in <= 1.0:
            raise ConfigError(f"need 0 <= p_out < p_in <= 1, got p_in={self.p_in}, p_out={self.p_out}")
        if not 0.0 <= self.flip_prob <= 0.5:
            raise ConfigError(f"flip_prob must lie in [0, 0.5], got {self.flip_prob}")
        if self.feature_noise < 0.0:
            raise ConfigError(f"feature_noise must be non-negative, got {self.feature_noise}")
        if self.num_label_classes < 1:
            raise ConfigError(f"num_label_classes must be positive, got {self.num_label_classes}")
        needed = self.num_blocks + (self.num_label_classes if self.label_signal else 0)
        if self.feature_dim < needed:
            raise ConfigError(f"feature_dim must be at least {needed}, got {self.feature_dim}")

    def to_dict(self) -> dict:
        return asdict(self)


def balanced_assignment(num_nodes: int, num_groups: int) -> np.ndarray:
    """Contiguous groups whose sizes differ by at most one."""
    sizes = np.full(num_groups, num_nodes // num_groups)
    sizes[: num_nodes % num_groups] += 1
    return np.repeat(np.arange(num_groups), sizes)


def generate_sbm(cfg: SbmConfig, rng: RandomSource) -> Tuple[Graph, NodeAnnotations]:
    """
    Sample a dataset from the block model.

    Edges are independent Bernoulli draws over the upper triangle with
    ``p_in`` inside a block and ``p_out`` across. The sensitive attribute is
    the node's block, replaced with probability ``flip_prob`` by a uniformly
    chosen other block. Features are one-hot(block), optionally followed by
    one-hot(label), plus Gaussian noise in every column.

    :param cfg: Generator parameters; validated first.
    :param rng: Random stream; sub-streams are derived per component.
    :return: Tuple of (graph, annotations) with every sensitive value observed.
    :raises ConfigError: If ``cfg`` is invalid.
    """
    cfg.validate()
    n, b = cfg.num_nodes, cfg.num_blocks
    blocks = balanced_assignment(n, b)

    rows, cols = np.triu_indices(n, k=1)
    same = blocks[rows] == blocks[cols]
    probs = np.where(same, cfg.p_in, cfg.p_out)
    keep = rng.derive("edges").uniform(size=len(rows)) < probs
    edges = np.stack([rows[keep], cols[keep]], axis=1)

    flip_rng = rng.derive("flips")
    flipped = flip_rng.uniform(size=n) < cfg.flip_prob
    sensitive = blocks.copy()
    if b > 1 and flipped.any():
        # Shift by 1..b-1 so the flipped value is a different block, uniformly.
        offsets = flip_rng.integers(1, b, size=int(flipped.sum()))
        sensitive[flipped] = (blocks[flipped] + offsets) % b

    label_rng = rng.derive("labels")
    labels = (np.arange(n) % cfg.num_label_classes)[label_rng.permutation(n)]

    features = np.zeros((n, cfg.feature_dim))
    features[np.arange(n), blocks] = 1.0
    if cfg.label_signal:
        features[np.arange(n), b + labels] = 1.0
    features += cfg.feature_noise * rng.derive("features").standard_normal((n, cfg.feature_dim))

    graph = Graph(n, edges, features)
    log.debug(f"Generated SBM: {n} nodes, {graph.num_edges} edges, {int(flipped.sum())} flips")
    return graph, NodeAnnotations.create(sensitive=sensitive, labels=labels)
