"""
Graph autoencoder models.

``GraphAutoencoder`` is the plain variational graph autoencoder: a shared
graph convolution (``gnn``) followed by one variational head (``enc_x``)
and the parameter-free inner-product decoder. ``PvgaeModel`` adds a second
head (``enc_s``) and a linear decoder (``dec_s``) for the sensitive
attribute.

Parameters live in a single flat dict with dotted names such as
``gnn.weight_0`` or ``enc_s.logvar_bias``. They are split into two
disjoint groups:

- ``graph``: ``gnn.*`` and ``enc_x.*``
- ``sensitive``: ``enc_s.*`` and ``dec_s.*``

Both models initialize the graph group from the same derived stream, so
under one seed they start from identical shared weights.
"""

from typing import Dict, Iterable, Mapping, Optional, Tuple

import numpy as np

from pvgae.model.layers import GaussianPosterior, encode, gnn_forward
from pvgae.numerics.init import glorot_uniform, zeros
from pvgae.numerics.random import RandomSource
from pvgae.numerics.tensor import Tensor
from pvgae.utils.errors import ContractError, DimensionError

GRAPH_PREFIXES = ("gnn", "enc_x")
SENSITIVE_PREFIXES = ("enc_s", "dec_s")


def _head_params(prefix: str, hidden_dim: int, latent_dim: int, rng: RandomSource) -> Dict[str, Tensor]:
    return {
        f"{prefix}.mean_weight": glorot_uniform(hidden_dim, latent_dim, rng),
        f"{prefix}.mean_bias": zeros(latent_dim),
        f"{prefix}.logvar_weight": glorot_uniform(hidden_dim, latent_dim, rng),
        f"{prefix}.logvar_bias": zeros(latent_dim),
    }


class GraphAutoencoder:
    """
    Variational graph autoencoder with a single non-sensitive head.

    :param feature_dim: Input feature dimension D.
    :param hidden_dim: Width h of the graph convolution.
    :param latent_dim: Embedding dimension d.
    :param rng: Source for initialization; ignored when ``params`` is given.
    :param params: Existing parameters, e.g. from a checkpoint.
    """

    kind = "vgae"
    groups: Dict[str, Tuple[str, ...]] = {"graph": GRAPH_PREFIXES}

    def __init__(self,
                 feature_dim: int,
                 hidden_dim: int,
                 latent_dim: int,
                 rng: Optional[RandomSource] = None,
                 params: Optional[Mapping[str, Tensor]] = None):
        if min(feature_dim, hidden_dim, latent_dim) < 1:
            raise ContractError(
                f"dimensions must be positive, got D={feature_dim}, h={hidden_dim}, d={latent_dim}"
            )
        self.feature_dim = int(feature_dim)
        self.hidden_dim = int(hidden_dim)
        self.latent_dim = int(latent_dim)
        if params is None:
            if rng is None:
                raise ContractError("either rng or params is required")
            params = self._initialize(rng)
        self.params: Dict[str, Tensor] = {}
        self.assign(params, strict=False)
        self._check_shapes()

    def _initialize(self, rng: RandomSource) -> Dict[str, Tensor]:
        graph_rng = rng.derive("init.graph")
        params = {
            "gnn.weight_0": glorot_uniform(self.feature_dim, self.hidden_dim, graph_rng),
            "gnn.bias_0": zeros(self.hidden_dim),
            "gnn.weight_1": glorot_uniform(self.hidden_dim, self.hidden_dim, graph_rng),
            "gnn.bias_1": zeros(self.hidden_dim),
        }
        params.update(_head_params("enc_x", self.hidden_dim, self.latent_dim, graph_rng))
        return params

    def expected_shapes(self) -> Dict[str, Tuple[int, ...]]:
        h, d = self.hidden_dim, self.latent_dim
        shapes = {
            "gnn.weight_0": (self.feature_dim, h),
            "gnn.bias_0": (h,),
            "gnn.weight_1": (h, h),
            "gnn.bias_1": (h,),
        }
        for name in ("mean", "logvar"):
            shapes[f"enc_x.{name}_weight"] = (h, d)
            shapes[f"enc_x.{name}_bias"] = (d,)
        return shapes

    def _check_shapes(self) -> None:
        expected = self.expected_shapes()
        if set(expected) != set(self.params):
            missing = sorted(set(expected) - set(self.params))
            extra = sorted(set(self.params) - set(expected))
            raise ContractError(f"parameter names do not match model: missing={missing}, unexpected={extra}")
        for name, shape in expected.items():
            if self.params[name].shape != shape:
                raise DimensionError(name, shape, self.params[name].shape)

    # Parameter access ---------------------------------------------------

    def head(self, prefix: str) -> Dict[str, Tensor]:
        """Parameters of one block with the ``prefix.`` stripped."""
        cut = len(prefix) + 1
        return {name[cut:]: t for name, t in self.params.items() if name.startswith(prefix + ".")}

    def parameters(self, group: Optional[str] = None) -> Dict[str, Tensor]:
        """
        Parameters by full name, optionally restricted to one group.

        :param group: ``"graph"``, ``"sensitive"`` or None for everything.
        """
        if group is None:
            return dict(self.params)
        if group not in self.groups:
            raise ContractError(f"unknown parameter group {group!r}; expected one of {list(self.groups)}")
        prefixes = tuple(p + "." for p in self.groups[group])
        return {name: t for name, t in self.params.items() if name.startswith(prefixes)}

    def assign(self, new: Mapping[str, Tensor], strict: bool = True) -> None:
        """Replace parameters by name; every tensor becomes trainable."""
        for name, value in new.items():
            if strict and name not in self.params:
                raise ContractError(f"unknown parameter {name!r}")
            if strict and np.shape(value.data) != self.params[name].shape:
                raise DimensionError(name, self.params[name].shape, np.shape(value.data))
            self.params[name] = Tensor(value, requires_grad=True)

    def state_dict(self) -> Dict[str, np.ndarray]:
        """Copies of the parameter arrays."""
        return {name: t.numpy() for name, t in self.params.items()}

    def metadata(self) -> Dict[str, int]:
        return {"feature_dim": self.feature_dim, "hidden_dim": self.hidden_dim, "latent_dim": self.latent_dim}

    # Forward ------------------------------------------------------------

    def hidden(self, adj_norm, features, params: Optional[Mapping[str, Tensor]] = None) -> Tensor:
        source = params if params is not None else self.params
        gnn = {k[4:]: v for k, v in source.items() if k.startswith("gnn.")}
        return gnn_forward(adj_norm, features, gnn)

    def posterior_x(self, hidden: Tensor) -> GaussianPosterior:
        return encode(hidden, self.head("enc_x"))

    def embed(self, adj_norm, features) -> np.ndarray:
        """Posterior means of the non-sensitive head, [N, d]."""
        return self.posterior_x(self.hidden(adj_norm, features)).mean.numpy()

    def num_parameters(self, names: Iterable[str] = ()) -> int:
        selected = list(names) or list(self.params)
        return int(sum(self.params[n].size for n in selected))

    def __repr__(self) -> str:
        return (f"{type(self).__name__}(D={self.feature_dim}, h={self.hidden_dim}, "
                f"d={self.latent_dim}, params={self.num_parameters()})")


class PvgaeModel(GraphAutoencoder):
    """
    Autoencoder with separate non-sensitive and sensitive heads.

    :param num_sensitive_classes: Number of sensitive classes C.
    """

    kind = "pvgae"
    groups = {"graph": GRAPH_PREFIXES, "sensitive": SENSITIVE_PREFIXES}

    def __init__(self,
                 feature_dim: int,
                 hidden_dim: int,
                 latent_dim: int,
                 num_sensitive_classes: int,
                 rng: Optional[RandomSource] = None,
                 params: Optional[Mapping[str, Tensor]] = None):
        if num_sensitive_classes < 1:
            raise ContractError(f"num_sensitive_classes must be positive, got {num_sensitive_classes}")
        self.num_sensitive_classes = int(num_sensitive_classes)
        super().__init__(feature_dim, hidden_dim, latent_dim, rng=rng, params=params)

    def _initialize(self, rng: RandomSource) -> Dict[str, Tensor]:
        params = super()._initialize(rng)
        sensitive_rng = rng.derive("init.sensitive")
        params.update(_head_params("enc_s", self.hidden_dim, self.latent_dim, sensitive_rng))
        params["dec_s.weight"] = glorot_uniform(self.latent_dim, self.num_sensitive_classes, sensitive_rng)
        params["dec_s.bias"] = zeros(self.num_sensitive_classes)
        return params

    def expected_shapes(self) -> Dict[str, Tuple[int, ...]]:
        shapes = super().expected_shapes()
        h, d = self.hidden_dim, self.latent_dim
        for name in ("mean", "logvar"):
            shapes[f"enc_s.{name}_weight"] = (h, d)
            shapes[f"enc_s.{name}_bias"] = (d,)
        shapes["dec_s.weight"] = (d, self.num_sensitive_classes)
        shapes["dec_s.bias"] = (self.num_sensitive_classes,)
        return shapes

    def posterior_s(self, hidden: Tensor, head: Optional[Mapping[str, Tensor]] = None) -> GaussianPosterior:
        return encode(hidden, head if head is not None else self.head("enc_s"))

    def metadata(self) -> Dict[str, int]:
        meta = super().metadata()
        meta["num_sensitive_classes"] = self.num_sensitive_classes
        return meta
