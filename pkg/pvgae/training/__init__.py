"""
Training drivers, training history and embedding export.
"""

from pvgae.training.history import COLUMNS, EpochRecord, TrainHistory
from pvgae.training.trainer import (
    PvgaeTrainer,
    TrainConfig,
    VgaeTrainer,
    train_pvgae,
    train_vgae_baseline,
)
from pvgae.training.export import EmbeddingMatrix, export_embeddings, load_embeddings, save_embeddings

__all__ = [
    "COLUMNS",
    "EpochRecord",
    "TrainHistory",
    "PvgaeTrainer",
    "TrainConfig",
    "VgaeTrainer",
    "train_pvgae",
    "train_vgae_baseline",
    "EmbeddingMatrix",
    "export_embeddings",
    "load_embeddings",
    "save_embeddings",
]
