"""
Utility metrics: link-prediction AUC and downstream node classification.
"""

from typing import Optional, Union

import numpy as np
from scipy.special import expit
from sklearn.linear_model import LogisticRegression
from sklearn.metrics import accuracy_score, roc_auc_score
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import StandardScaler

from pvgae.graph.base import LinkSplit
from pvgae.training.export import EmbeddingMatrix
from pvgae.utils.errors import ContractError, DegenerateLabelError

Embedding = Union[EmbeddingMatrix, np.ndarray]


def embedding_values(emb: Embedding) -> np.ndarray:
    return emb.values if isinstance(emb, EmbeddingMatrix) else np.asarray(emb, dtype=np.float64)


def auc_from_scores(pos_scores: np.ndarray, neg_scores: np.ndarray) -> float:
    """
    Probability that a positive outscores a negative; ties count one half.

    :raises ContractError: If either set is empty.
    """
    pos_scores = np.asarray(pos_scores, dtype=np.float64).ravel()
    neg_scores = np.asarray(neg_scores, dtype=np.float64).ravel()
    if pos_scores.size == 0 or neg_scores.size == 0:
        raise ContractError("AUC needs at least one positive and one negative score")
    y_true = np.concatenate([np.ones(pos_scores.size), np.zeros(neg_scores.size)])
    return float(roc_auc_score(y_true, np.concatenate([pos_scores, neg_scores])))


def pair_scores(values: np.ndarray, pairs: np.ndarray) -> np.ndarray:
    """``sigmoid(z_u · z_v)`` for each pair."""
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    return expit(np.einsum("ij,ij->i", values[pairs[:, 0]], values[pairs[:, 1]]))


def link_auc(emb: Embedding, split: LinkSplit) -> float:
    """
    Held-out link-prediction AUC with inner-product scoring.

    :raises ContractError: If the split has no positives or no negatives.
    """
    values = embedding_values(emb)
    return auc_from_scores(pair_scores(values, split.test_pos), pair_scores(values, split.test_neg))


def fit_node_classifier(values: np.ndarray, labels: np.ndarray, train_mask: np.ndarray, l2_weight: float = 1e-4):
    """
    Multinomial logistic regression on frozen embeddings.

    The L2 weight applies to the mean training loss, which scikit-learn
    expresses as ``C = 1 / (l2_weight * n_train)``.

    :raises ContractError: If there are no training nodes.
    :raises DegenerateLabelError: If the training nodes carry a single class.
    """
    train = np.asarray(train_mask, dtype=bool) & (labels >= 0)
    n_train = int(train.sum())
    if n_train == 0:
        raise ContractError("node classification needs at least one labeled training node")
    if np.unique(labels[train]).size < 2:
        raise DegenerateLabelError("node classifier training set has a single class")
    classifier = make_pipeline(
        StandardScaler(),
        LogisticRegression(C=1.0 / (l2_weight * n_train), max_iter=2000),
    )
    classifier.fit(values[train], labels[train])
    return classifier


def node_classification(emb: Embedding,
                        labels: np.ndarray,
                        test_mask: np.ndarray,
                        train_mask: Optional[np.ndarray] = None,
                        l2_weight: float = 1e-4
                        ) -> float:
    """
    Test accuracy of a logistic-regression head trained on the other nodes.

    :param emb: Embeddings [N, d].
    :param labels: Class per node; ``-1`` marks unlabeled nodes, which are skipped.
    :param test_mask: Nodes to score.
    :param train_mask: Nodes to train on (default: complement of ``test_mask``).
    :param l2_weight: L2 regularization weight.
    :raises ContractError: If the masks overlap or either side is empty.
    :raises DegenerateLabelError: If the training nodes carry a single class.
    """
    values = embedding_values(emb)
    labels = np.asarray(labels, dtype=np.int64)
    test_mask = np.asarray(test_mask, dtype=bool)
    train_mask = ~test_mask if train_mask is None else np.asarray(train_mask, dtype=bool)
    if np.any(train_mask & test_mask):
        raise ContractError("node classification train and test masks overlap")
    test = test_mask & (labels >= 0)
    if not test.any():
        raise ContractError("node classification needs at least one labeled test node")

    classifier = fit_node_classifier(values, labels, train_mask, l2_weight)
    return float(accuracy_score(labels[test], classifier.predict(values[test])))
