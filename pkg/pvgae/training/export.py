"""
Embedding export and the embedding file format.

The exported embedding is the posterior mean of the non-sensitive head, so
exporting twice gives identical matrices. The file starts with the header
line ``N d seed config_hash`` followed by N rows of d values.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from pvgae.graph.base import Graph, normalize_adjacency
from pvgae.model.autoencoder import GraphAutoencoder
from pvgae.utils.errors import FormatError, NumericError
from pvgae.utils.logging import get_logger

log = get_logger("training.export")


@dataclass(frozen=True)
class EmbeddingMatrix:
    """
    Node embeddings with provenance.

    :param values: Float array [N, d].
    :param seed: Seed of the run that produced them.
    :param config_hash: Hash of the producing configuration.
    """
    values: np.ndarray
    seed: int = 0
    config_hash: str = "-"

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise FormatError(f"embeddings must be 2-D, got shape {list(values.shape)}")
        if not np.all(np.isfinite(values)):
            raise NumericError("embeddings contain non-finite values")
        if not self.config_hash or any(c.isspace() for c in self.config_hash):
            raise FormatError(f"config hash must be a single non-empty token, got {self.config_hash!r}")
        object.__setattr__(self, "values", values)

    @property
    def num_nodes(self) -> int:
        return int(self.values.shape[0])

    @property
    def dim(self) -> int:
        return int(self.values.shape[1])


def export_embeddings(model: GraphAutoencoder, graph: Graph, seed: int = 0,
                      config_hash: str = "-") -> EmbeddingMatrix:
    """
    Posterior means of the non-sensitive head for every node of ``graph``.
    """
    values = model.embed(normalize_adjacency(graph), graph.features)
    return EmbeddingMatrix(values=values, seed=seed, config_hash=config_hash)


def save_embeddings(embedding: EmbeddingMatrix, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        f.write(f"{embedding.num_nodes} {embedding.dim} {embedding.seed} {embedding.config_hash}\n")
        for row in embedding.values:
            f.write(" ".join(format(v, ".17g") for v in row) + "\n")
    log.info(f"Embeddings saved to {path}")
    return path


def load_embeddings(path: Path) -> EmbeddingMatrix:
    """
    Read an embedding file.

    :raises FormatError: If the header is malformed or a row does not have
                         the declared number of values or the row count
                         differs from the header.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Embedding file not found: {path}")
    with open(path) as f:
        header = f.readline().split()
        if len(header) != 4:
            raise FormatError(f"{path}: header must be 'N d seed config_hash'")
        try:
            num_nodes, dim, seed = int(header[0]), int(header[1]), int(header[2])
        except ValueError:
            raise FormatError(f"{path}: header must be 'N d seed config_hash'") from None

        rows = []
        for lineno, line in enumerate(f, start=2):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != dim:
                raise FormatError(f"{path}:{lineno}: expected {dim} values, got {len(parts)}")
            try:
                rows.append([float(p) for p in parts])
            except ValueError:
                raise FormatError(f"{path}:{lineno}: values must be numbers") from None

    if len(rows) != num_nodes:
        raise FormatError(f"{path}: header declares {num_nodes} rows, found {len(rows)}")
    return EmbeddingMatrix(values=np.asarray(rows, dtype=np.float64).reshape(num_nodes, dim),
                           seed=seed, config_hash=header[3])
