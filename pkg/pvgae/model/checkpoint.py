"""
Model checkpoints.

A checkpoint is a single ``.npz`` archive holding one array per named
parameter plus a ``__metadata__`` entry: a JSON document with the format
tag, the model kind and dimensions, and the training configuration.
"""

import json
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from pvgae.model.autoencoder import GraphAutoencoder, PvgaeModel
from pvgae.numerics.tensor import Tensor
from pvgae.utils.errors import FormatError
from pvgae.utils.logging import get_logger

log = get_logger("model.checkpoint")

FORMAT_TAG = "pvgae.checkpoint/1"
_METADATA_KEY = "__metadata__"

Model = Union[GraphAutoencoder, PvgaeModel]


def save_checkpoint(model: Model, path: Path, train_config: Optional[Dict[str, Any]] = None,
                    extra: Optional[Dict[str, Any]] = None) -> Path:
    """
    Write ``model`` and its training configuration to ``path``.

    :return: The written path.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    metadata = {
        "format": FORMAT_TAG,
        "kind": model.kind,
        "model": model.metadata(),
        "train_config": train_config or {},
        **(extra or {}),
    }
    arrays = model.state_dict()
    arrays[_METADATA_KEY] = np.array(json.dumps(metadata, sort_keys=True))
    with open(path, "wb") as f:
        np.savez(f, **arrays)
    log.info(f"Checkpoint saved to {path}")
    return path


def load_checkpoint(path: Path) -> Tuple[Model, Dict[str, Any]]:
    """
    Rebuild a model from a checkpoint.

    :return: Tuple of (model, metadata).
    :raises FormatError: If the file is not a checkpoint of a known format.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Checkpoint not found: {path}")
    try:
        with np.load(path, allow_pickle=False) as archive:
            arrays = {name: archive[name] for name in archive.files}
    except (OSError, ValueError) as e:
        raise FormatError(f"{path}: not a readable checkpoint ({e})") from e

    if _METADATA_KEY not in arrays:
        raise FormatError(f"{path}: missing checkpoint metadata")
    metadata = json.loads(str(arrays.pop(_METADATA_KEY)))
    if metadata.get("format") != FORMAT_TAG:
        raise FormatError(f"{path}: unsupported checkpoint format {metadata.get('format')!r}")

    params = {name: Tensor(value, requires_grad=True) for name, value in arrays.items()}
    dims = metadata["model"]
    kind = metadata.get("kind")
    if kind == PvgaeModel.kind:
        model: Model = PvgaeModel(dims["feature_dim"], dims["hidden_dim"], dims["latent_dim"],
                                  dims["num_sensitive_classes"], params=params)
    elif kind == GraphAutoencoder.kind:
        model = GraphAutoencoder(dims["feature_dim"], dims["hidden_dim"], dims["latent_dim"], params=params)
    else:
        raise FormatError(f"{path}: unknown model kind {kind!r}")
    log.debug(f"Loaded {model!r} from {path}")
    return model, metadata
