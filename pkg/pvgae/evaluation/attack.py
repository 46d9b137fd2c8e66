"""
Attribute-inference attack on published embeddings.

The attacker knows the sensitive attribute for a random share of nodes
(``observed_fraction``), trains a classifier from embedding to attribute
and is scored by k-fold cross-validated accuracy. Two attacker families
are available:

- ``mlp``: one hidden ReLU layer trained with Adam
- ``margin``: a linear max-margin classifier

Both standardize their inputs. Attacker nodes are drawn from their own
random stream, independently of which nodes the defender observed.
"""

import warnings
from dataclasses import dataclass, asdict
from typing import Dict, Optional, Tuple

import numpy as np
from sklearn.exceptions import ConvergenceWarning
from sklearn.metrics import accuracy_score
from sklearn.model_selection import KFold, StratifiedKFold
from sklearn.neural_network import MLPClassifier
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import StandardScaler
from sklearn.svm import LinearSVC

from pvgae.evaluation.metrics import Embedding, embedding_values, fit_node_classifier
from pvgae.graph.base import NodeAnnotations
from pvgae.numerics.random import RandomSource
from pvgae.utils.errors import ConfigError, ContractError, DegenerateLabelError
from pvgae.utils.logging import get_logger

log = get_logger("evaluation.attack")

ATTACKER_KINDS = ("mlp", "margin")
SAMPLING_POLICY = "attacker nodes sampled independently of observed_mask"


@dataclass
class AttackerConfig:
    """
    Attribute-inference attacker settings.
    """
    # Attacker family: mlp or margin
    kind: str = "mlp"
    # Hidden width of the mlp attacker
    hidden_dim: int = 64
    # Cross-validation folds
    folds: int = 5
    # Training epochs of the mlp attacker
    epochs: int = 200
    learning_rate: float = 0.005
    # Share of nodes whose sensitive value the attacker knows
    observed_fraction: float = 0.5

    def validate(self) -> None:
        if self.kind not in ATTACKER_KINDS:
            raise ConfigError(f"attacker kind must be one of {', '.join(ATTACKER_KINDS)}, got {self.kind!r}")
        if self.folds < 2:
            raise ConfigError(f"attacker folds must be at least 2, got {self.folds}")
        if not 0.0 < self.observed_fraction <= 1.0:
            raise ConfigError(f"attacker observed_fraction must lie in (0, 1], got {self.observed_fraction}")
        if self.hidden_dim < 1 or self.epochs < 1 or self.learning_rate <= 0:
            raise ConfigError("attacker hidden_dim, epochs and learning_rate must be positive")

    def with_kind(self, kind: str) -> "AttackerConfig":
        return AttackerConfig(**{**asdict(self), "kind": kind})


@dataclass(frozen=True)
class AttackResult:
    """
    Cross-validated attack outcome.

    ``predictions`` covers every node: out-of-fold predictions for attacker
    nodes and predictions of a model fit on all attacker nodes elsewhere.
    """
    accuracy: float
    fold_accuracies: Tuple[float, ...]
    attacker_mask: np.ndarray
    predictions: np.ndarray


def build_attacker(cfg: AttackerConfig, seed: int):
    """Unfitted scikit-learn pipeline for the configured attacker kind."""
    if cfg.kind == "mlp":
        head = MLPClassifier(
            hidden_layer_sizes=(cfg.hidden_dim,),
            activation="relu",
            solver="adam",
            learning_rate_init=cfg.learning_rate,
            max_iter=cfg.epochs,
            random_state=seed,
        )
    elif cfg.kind == "margin":
        head = LinearSVC(dual=False, C=1.0)
    else:
        raise ConfigError(f"unknown attacker kind {cfg.kind!r}")
    return make_pipeline(StandardScaler(), head)


def _fit_predict(cfg: AttackerConfig, seed: int, x_train, y_train, x_test) -> np.ndarray:
    classes = np.unique(y_train)
    if classes.size == 1:
        return np.full(len(x_test), classes[0])
    model = build_attacker(cfg, seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        model.fit(x_train, y_train)
    return model.predict(x_test)


def _folds(targets: np.ndarray, folds: int, seed: int):
    _, counts = np.unique(targets, return_counts=True)
    if counts.min() >= folds:
        return StratifiedKFold(n_splits=folds, shuffle=True, random_state=seed).split(targets, targets)
    return KFold(n_splits=folds, shuffle=True, random_state=seed).split(targets)


def run_attack(emb: Embedding, sensitive: np.ndarray, cfg: AttackerConfig, rng: RandomSource) -> AttackResult:
    """
    Cross-validated attack with per-node predictions.

    :raises ContractError: If fewer than ``2 * folds`` nodes are available to the attacker.
    """
    cfg.validate()
    values = embedding_values(emb)
    sensitive = np.asarray(sensitive, dtype=np.int64)
    n = len(sensitive)
    if values.shape[0] != n:
        raise ContractError(f"embedding has {values.shape[0]} rows but {n} sensitive values were given")

    count = min(n, int(np.floor(cfg.observed_fraction * n + 0.5)))
    if count < 2 * cfg.folds:
        raise ContractError(f"attacker needs at least {2 * cfg.folds} labeled nodes, has {count}")
    attacker_mask = np.zeros(n, dtype=bool)
    attacker_mask[rng.derive("attacker-nodes").choice(n, size=count, replace=False)] = True
    nodes = np.flatnonzero(attacker_mask)
    x, y = values[nodes], sensitive[nodes]

    fold_seed = rng.derive("folds").sklearn_seed()
    model_seed = rng.derive("model").sklearn_seed()
    predictions = np.empty(n, dtype=np.int64)
    fold_accuracies = []
    for train_idx, test_idx in _folds(y, cfg.folds, fold_seed):
        predicted = _fit_predict(cfg, model_seed, x[train_idx], y[train_idx], x[test_idx])
        predictions[nodes[test_idx]] = predicted
        fold_accuracies.append(float(accuracy_score(y[test_idx], predicted)))

    others = np.flatnonzero(~attacker_mask)
    if others.size:
        predictions[others] = _fit_predict(cfg, model_seed, x, y, values[others])

    accuracy = float(np.mean(fold_accuracies))
    log.debug(f"{cfg.kind} attack accuracy {accuracy:.4f} over {cfg.folds} folds ({count} nodes)")
    return AttackResult(accuracy, tuple(fold_accuracies), attacker_mask, predictions)


def attack_inference(emb: Embedding, sensitive: np.ndarray, cfg: AttackerConfig, rng: RandomSource) -> float:
    """
    Mean k-fold accuracy of an attacker predicting the sensitive attribute.

    :param emb: Published embeddings [N, d].
    :param sensitive: True sensitive class per node.
    :param cfg: Attacker settings.
    :param rng: Stream for node sampling, fold assignment and model seeds.
    :raises ContractError: If too few nodes are available to the attacker.
    """
    return run_attack(emb, sensitive, cfg, rng).accuracy


@dataclass(frozen=True)
class GroupReport:
    """
    Utility and attack accuracy split by whether a node shared its
    sensitive attribute for training (public) or not (secret).

    Utility entries are None when the dataset has no labels or a group
    has no labeled test node.
    """
    public_size: int
    secret_size: int
    public_acc: Optional[float]
    secret_acc: Optional[float]
    public_attack: float
    secret_attack: float

    def to_dict(self) -> Dict[str, object]:
        return asdict(self)


def public_secret_report(emb: Embedding,
                         ann: NodeAnnotations,
                         attacker_cfg: AttackerConfig,
                         rng: RandomSource,
                         l2_weight: float = 1e-4
                         ) -> GroupReport:
    """
    Per-group utility and attack accuracy.

    Groups come from ``ann.observed_mask``. Node-classification accuracy is
    measured on the utility test nodes of each group; attack accuracy uses
    the attacker's out-of-fold predictions on attacker nodes and its full
    model elsewhere.

    :raises ContractError: If either group is empty.
    """
    values = embedding_values(emb)
    public = ann.observed_mask
    secret = ~public
    if not public.any() or not secret.any():
        raise ContractError(
            f"public/secret report needs both groups, got {int(public.sum())} public "
            f"and {int(secret.sum())} secret nodes"
        )

    attack = run_attack(values, ann.sensitive, attacker_cfg, rng)
    correct = attack.predictions == ann.sensitive

    public_acc = secret_acc = None
    if ann.has_labels and ann.utility_test_mask.any():
        try:
            classifier = fit_node_classifier(values, ann.labels, ~ann.utility_test_mask, l2_weight)
            hits = classifier.predict(values) == ann.labels
            public_acc = _group_accuracy(hits, ann.utility_test_mask & public & (ann.labels >= 0))
            secret_acc = _group_accuracy(hits, ann.utility_test_mask & secret & (ann.labels >= 0))
        except DegenerateLabelError as e:
            log.warning(f"Skipping group utility: {e}")

    return GroupReport(
        public_size=int(public.sum()),
        secret_size=int(secret.sum()),
        public_acc=public_acc,
        secret_acc=secret_acc,
        public_attack=float(correct[public].mean()),
        secret_attack=float(correct[secret].mean()),
    )


def _group_accuracy(hits: np.ndarray, mask: np.ndarray) -> Optional[float]:
    return float(hits[mask].mean()) if mask.any() else None
