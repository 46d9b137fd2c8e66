"""
Privacy-preserving graph embeddings with a disentangled variational graph autoencoder.
"""

__all__ = ["__version__"]
__version__ = "0.1.0"
