"""
The autoencoder network: shared graph convolution, variational heads and
decoders, plus checkpoint persistence.
"""

from pvgae.model.layers import (
    LOGVAR_MAX,
    LOGVAR_MIN,
    GaussianPosterior,
    LatentSample,
    decode_adjacency,
    decode_sensitive,
    encode,
    gnn_forward,
    reparameterize,
)
from pvgae.model.autoencoder import GraphAutoencoder, PvgaeModel
from pvgae.model.checkpoint import FORMAT_TAG, load_checkpoint, save_checkpoint

__all__ = [
    "LOGVAR_MAX",
    "LOGVAR_MIN",
    "GaussianPosterior",
    "LatentSample",
    "decode_adjacency",
    "decode_sensitive",
    "encode",
    "gnn_forward",
    "reparameterize",
    "GraphAutoencoder",
    "PvgaeModel",
    "FORMAT_TAG",
    "load_checkpoint",
    "save_checkpoint",
]
