"""
Alternating training of the privacy-preserving autoencoder and the plain
autoencoder baseline.

Each outer epoch of ``PvgaeTrainer`` runs ``sensitive_epochs`` Adam steps on
the sensitive branch (``enc_s``, ``dec_s``) followed by one Adam step on the
graph branch (``gnn``, ``enc_x``). The two branches keep separate optimizer
states. Randomness is derived per epoch and per step from the run's
``RandomSource``:

- epoch ``e``: ``rng.derive("epoch-e")``
- sensitive step ``j``: ``epoch_rng.derive("sensitive-j")``
- graph step: ``epoch_rng.derive("graph")``

``VgaeTrainer`` uses the same graph-step stream and the same initialization
stream, so with beta = 0 both trainers follow the same graph-branch
trajectory.

A non-finite value anywhere aborts training with ``TrainingAborted``, which
carries the partial history.
"""

import time
from dataclasses import dataclass, asdict
from typing import Callable, Optional, Tuple

from pvgae.graph.base import Graph, NodeAnnotations, normalize_adjacency
from pvgae.model.autoencoder import GraphAutoencoder, PvgaeModel
from pvgae.numerics.optim import AdamState, adam_step
from pvgae.numerics.random import RandomSource
from pvgae.numerics.tensor import backward
from pvgae.objectives import LossBreakdown, loss_graph, loss_sensitive, loss_vgae
from pvgae.training.history import EpochRecord, TrainHistory
from pvgae.utils.errors import ConfigError, ContractError, NumericError, TrainingAborted
from pvgae.utils.logging import get_logger
from pvgae.utils.misc import config_hash

log = get_logger("training")

ProgressCallback = Callable[[int, int, LossBreakdown], None]


@dataclass
class TrainConfig:
    """
    Training hyperparameters.
    """
    # Weight of the independence penalty
    beta: float = 10.0
    # Outer epochs E
    epochs: int = 500
    # Sensitive-branch steps per outer epoch
    sensitive_epochs: int = 1
    # Adam learning rate of the sensitive branch
    lr_sensitive: float = 0.005
    # Adam learning rate of the graph branch
    lr_graph: float = 0.005
    # Embedding dimension d
    latent_dim: int = 32
    # Graph convolution width h
    hidden_dim: int = 64
    seed: int = 0
    # Fraction of nodes whose sensitive attribute is observed
    observed_ratio: float = 1.0
    # Epochs between loss log lines
    log_interval: int = 50

    def validate(self) -> None:
        """
        :raises ConfigError: On any out-of-range value.
        """
        if self.epochs < 1:
            raise ConfigError(f"epochs must be at least 1, got {self.epochs}")
        if self.sensitive_epochs < 1:
            raise ConfigError(f"sensitive_epochs must be at least 1, got {self.sensitive_epochs}")
        if self.lr_sensitive <= 0 or self.lr_graph <= 0:
            raise ConfigError(f"learning rates must be positive, got {self.lr_sensitive}, {self.lr_graph}")
        if self.beta < 0:
            raise ConfigError(f"beta must be non-negative, got {self.beta}")
        if self.latent_dim < 1 or self.hidden_dim < 1:
            raise ConfigError(f"dimensions must be positive, got d={self.latent_dim}, h={self.hidden_dim}")
        if not 0.0 < self.observed_ratio <= 1.0:
            raise ConfigError(f"observed_ratio must lie in (0, 1], got {self.observed_ratio}")
        if self.log_interval < 1:
            raise ConfigError(f"log_interval must be at least 1, got {self.log_interval}")

    def to_dict(self) -> dict:
        return asdict(self)

    def config_hash(self) -> str:
        """Short digest of every setting that affects the trained weights."""
        return config_hash({k: v for k, v in self.to_dict().items() if k != "log_interval"})


class _Trainer:
    """Shared epoch loop, logging and abort handling."""

    def __init__(self, graph: Graph, cfg: TrainConfig, rng: RandomSource):
        cfg.validate()
        self.cfg = cfg
        self.rng = rng
        self.graph = graph
        self.adj_norm = normalize_adjacency(graph)
        self.adjacency = graph.adjacency
        self.features = graph.features
        self.graph_state = AdamState()
        self.history = TrainHistory()
        self.model: GraphAutoencoder

    def graph_step(self, rng: RandomSource) -> LossBreakdown:
        params = self.model.parameters("graph")
        total, breakdown = self._graph_loss(rng)
        grads = backward(total, params)
        updated, self.graph_state = adam_step(params, grads, self.graph_state, self.cfg.lr_graph)
        self.model.assign(updated)
        return breakdown

    def _graph_loss(self, rng: RandomSource):
        raise NotImplementedError

    def run_epoch(self, epoch: int) -> LossBreakdown:
        raise NotImplementedError

    def _log_epoch(self, epoch: int, b: LossBreakdown) -> None:
        if epoch % self.cfg.log_interval and epoch != self.cfg.epochs:
            return
        log.info(
            f"epoch {epoch}/{self.cfg.epochs} | kl_x {b.kl_x:.4f} | recon_x {b.recon_x:.4f} | "
            f"penalty {b.penalty:.4f} | L_G {b.total_graph:.4f} | kl_s {b.kl_s:.4f} | "
            f"recon_s {b.recon_s:.4f} | L_s {b.total_sensitive:.4f}"
        )

    def fit(self, progress_callback: Optional[ProgressCallback] = None) -> TrainHistory:
        """
        Run all epochs.

        :param progress_callback: Optional callback(epoch, total_epochs, losses).
        :return: The complete history.
        :raises TrainingAborted: If a non-finite value appears.
        """
        log.info(f"Training {self.model!r} for {self.cfg.epochs} epochs")
        for epoch in range(1, self.cfg.epochs + 1):
            started = time.perf_counter()
            try:
                losses = self.run_epoch(epoch)
                if not losses.is_finite():
                    raise NumericError("loss breakdown is not finite")
            except NumericError as e:
                log.error(f"Training aborted at epoch {epoch}: {e}")
                raise TrainingAborted(epoch, self.history.last, self.history, reason=str(e)) from e
            self.history.append(EpochRecord(epoch, losses, time.perf_counter() - started))
            self._log_epoch(epoch, losses)
            if progress_callback:
                progress_callback(epoch, self.cfg.epochs, losses)
        log.info(f"Training finished in {self.history.total_seconds:.1f}s")
        return self.history


class PvgaeTrainer(_Trainer):
    """
    Alternating optimizer for ``PvgaeModel``.

    :param graph: Training graph (held-out links already removed).
    :param ann: Annotations; ``observed_mask`` selects the visible sensitive values.
    :param cfg: Training configuration.
    :param rng: Run-level random stream.
    :param model: Optional pre-built model; initialized from ``rng`` otherwise.
    :raises ContractError: If no sensitive value is observed.
    """

    def __init__(self, graph: Graph, ann: NodeAnnotations, cfg: TrainConfig, rng: RandomSource,
                 model: Optional[PvgaeModel] = None):
        super().__init__(graph, cfg, rng)
        if ann.num_nodes != graph.num_nodes:
            raise ContractError(f"annotations cover {ann.num_nodes} nodes, graph has {graph.num_nodes}")
        if not ann.observed_mask.any():
            raise ContractError("observed_mask is empty; the sensitive branch has nothing to learn from")
        self.ann = ann
        self.model: PvgaeModel = model or PvgaeModel(
            graph.feature_dim, cfg.hidden_dim, cfg.latent_dim, ann.num_sensitive_classes, rng=rng,
        )
        self.sensitive_state = AdamState()

    def sensitive_step(self, rng: RandomSource) -> LossBreakdown:
        params = self.model.parameters("sensitive")
        total, breakdown = loss_sensitive(
            self.model, self.adj_norm, self.features, self.ann.sensitive, self.ann.observed_mask, rng,
        )
        grads = backward(total, params)
        updated, self.sensitive_state = adam_step(params, grads, self.sensitive_state, self.cfg.lr_sensitive)
        self.model.assign(updated)
        return breakdown

    def _graph_loss(self, rng: RandomSource):
        return loss_graph(self.model, self.adj_norm, self.features, self.adjacency, self.cfg.beta, rng)

    def run_epoch(self, epoch: int) -> LossBreakdown:
        epoch_rng = self.rng.derive(f"epoch-{epoch}")
        sensitive = LossBreakdown()
        for step in range(self.cfg.sensitive_epochs):
            sensitive = self.sensitive_step(epoch_rng.derive(f"sensitive-{step}"))
        return self.graph_step(epoch_rng.derive("graph")).merge(sensitive)


class VgaeTrainer(_Trainer):
    """
    Trainer for the plain ``GraphAutoencoder`` baseline.
    """

    def __init__(self, graph: Graph, cfg: TrainConfig, rng: RandomSource,
                 model: Optional[GraphAutoencoder] = None):
        super().__init__(graph, cfg, rng)
        self.model = model or GraphAutoencoder(graph.feature_dim, cfg.hidden_dim, cfg.latent_dim, rng=rng)

    def _graph_loss(self, rng: RandomSource):
        return loss_vgae(self.model, self.adj_norm, self.features, self.adjacency, rng)

    def run_epoch(self, epoch: int) -> LossBreakdown:
        return self.graph_step(self.rng.derive(f"epoch-{epoch}").derive("graph"))


def train_pvgae(graph: Graph,
                ann: NodeAnnotations,
                cfg: TrainConfig,
                rng: RandomSource,
                progress_callback: Optional[ProgressCallback] = None
                ) -> Tuple[PvgaeModel, TrainHistory]:
    """
    Train the privacy-preserving autoencoder.

    :return: Tuple of (trained model, history).
    :raises TrainingAborted: On a non-finite loss.
    """
    trainer = PvgaeTrainer(graph, ann, cfg, rng)
    history = trainer.fit(progress_callback)
    return trainer.model, history


def train_vgae_baseline(graph: Graph,
                        cfg: TrainConfig,
                        rng: RandomSource,
                        progress_callback: Optional[ProgressCallback] = None
                        ) -> Tuple[GraphAutoencoder, TrainHistory]:
    """
    Train the plain autoencoder on the reconstruction objective alone.

    :return: Tuple of (trained model, history).
    """
    trainer = VgaeTrainer(graph, cfg, rng)
    history = trainer.fit(progress_callback)
    return trainer.model, history
