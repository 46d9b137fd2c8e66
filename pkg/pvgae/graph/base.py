"""
Graph data model.

``Graph`` holds an undirected simple graph as a sorted, deduplicated edge
list together with its node feature matrix. ``NodeAnnotations`` carries the
per-node labels, sensitive attribute and the two boolean masks that define
which sensitive values were observed during training and which nodes are
held out for utility evaluation. ``LinkSplit`` is the result of holding out
links for link-prediction evaluation.

All three are immutable; operations return new instances.
"""

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from pvgae.utils.errors import ConsistencyError, ContractError, DimensionError


def canonical_edges(edges: np.ndarray) -> np.ndarray:
    """
    Normalize an edge array to sorted unique ``u < v`` rows.

    Self-loops are dropped.
    """
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if edges.size == 0:
        return np.zeros((0, 2), dtype=np.int64)
    ordered = np.sort(edges, axis=1)
    ordered = ordered[ordered[:, 0] != ordered[:, 1]]
    if ordered.size == 0:
        return np.zeros((0, 2), dtype=np.int64)
    return np.unique(ordered, axis=0)


def adjacency_from_edges(num_nodes: int, edges: np.ndarray) -> np.ndarray:
    """Dense symmetric 0/1 adjacency with a zero diagonal."""
    adjacency = np.zeros((num_nodes, num_nodes), dtype=np.float64)
    if len(edges):
        adjacency[edges[:, 0], edges[:, 1]] = 1.0
        adjacency[edges[:, 1], edges[:, 0]] = 1.0
    return adjacency


@dataclass(frozen=True)
class Graph:
    """
    Undirected graph with node features.

    :param num_nodes: Number of nodes ``N``; ids are ``0..N-1``.
    :param edges: Integer array [E, 2] with ``u < v``, sorted, no duplicates.
    :param features: Float array [N, D].
    """
    num_nodes: int
    edges: np.ndarray
    features: np.ndarray

    def __post_init__(self):
        edges = canonical_edges(self.edges)
        features = np.asarray(self.features, dtype=np.float64)
        if features.ndim != 2 or features.shape[0] != self.num_nodes:
            raise DimensionError("Graph features", (self.num_nodes, "D"), features.shape)
        if len(edges) and (edges.min() < 0 or edges.max() >= self.num_nodes):
            raise ConsistencyError(
                f"edge endpoint out of range for {self.num_nodes} nodes"
            )
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "features", features)

    @property
    def num_edges(self) -> int:
        return int(len(self.edges))

    @property
    def feature_dim(self) -> int:
        return int(self.features.shape[1])

    @property
    def adjacency(self) -> np.ndarray:
        return adjacency_from_edges(self.num_nodes, self.edges)

    def degrees(self) -> np.ndarray:
        return self.adjacency.sum(axis=1)

    def with_edges(self, edges: np.ndarray) -> "Graph":
        return Graph(self.num_nodes, edges, self.features)

    def permuted(self, order: np.ndarray) -> "Graph":
        """Relabel nodes so that new node ``i`` is old node ``order[i]``."""
        inverse = np.empty_like(order)
        inverse[order] = np.arange(len(order))
        return Graph(self.num_nodes, inverse[self.edges], self.features[order])


@dataclass(frozen=True)
class NodeAnnotations:
    """
    Per-node labels, sensitive attribute and masks.

    :param labels: Class id per node or ``-1`` when unlabeled; ``None`` when
                   the dataset carries no labels at all.
    :param sensitive: Dense sensitive class id per node.
    :param observed_mask: Nodes whose sensitive value is visible in training.
    :param utility_test_mask: Nodes held out for node classification.
    """
    labels: Optional[np.ndarray]
    sensitive: np.ndarray
    observed_mask: np.ndarray
    utility_test_mask: np.ndarray

    def __post_init__(self):
        sensitive = np.asarray(self.sensitive, dtype=np.int64)
        n = len(sensitive)
        for name in ("observed_mask", "utility_test_mask"):
            mask = np.asarray(getattr(self, name), dtype=bool)
            if mask.shape != (n,):
                raise DimensionError(f"NodeAnnotations.{name}", (n,), mask.shape)
            object.__setattr__(self, name, mask)
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64)
            if labels.shape != (n,):
                raise DimensionError("NodeAnnotations.labels", (n,), labels.shape)
            object.__setattr__(self, "labels", labels)
        if n and sensitive.min() < 0:
            raise ContractError("sensitive class ids must be non-negative")
        object.__setattr__(self, "sensitive", sensitive)

    @classmethod
    def create(cls, sensitive: np.ndarray, labels: Optional[np.ndarray] = None) -> "NodeAnnotations":
        """Annotations with every sensitive value observed and no test nodes."""
        n = len(sensitive)
        return cls(labels, sensitive, np.ones(n, dtype=bool), np.zeros(n, dtype=bool))

    @property
    def num_nodes(self) -> int:
        return int(len(self.sensitive))

    @property
    def num_sensitive_classes(self) -> int:
        return int(self.sensitive.max()) + 1 if self.num_nodes else 0

    @property
    def has_labels(self) -> bool:
        return self.labels is not None and bool(np.any(self.labels >= 0))

    def with_observed(self, mask: np.ndarray) -> "NodeAnnotations":
        return replace(self, observed_mask=mask)

    def with_test(self, mask: np.ndarray) -> "NodeAnnotations":
        return replace(self, utility_test_mask=mask)

    def permuted(self, order: np.ndarray) -> "NodeAnnotations":
        labels = None if self.labels is None else self.labels[order]
        return NodeAnnotations(labels, self.sensitive[order],
                               self.observed_mask[order], self.utility_test_mask[order])


@dataclass(frozen=True)
class LinkSplit:
    """
    Held-out link-prediction split.

    :param train_edges: Edges kept for training, [E_train, 2].
    :param test_pos: Held-out true edges, [k, 2].
    :param test_neg: Sampled non-edges, [k, 2].
    :param num_nodes: Node count of the source graph.
    """
    train_edges: np.ndarray
    test_pos: np.ndarray
    test_neg: np.ndarray
    num_nodes: int

    @property
    def train_adjacency(self) -> np.ndarray:
        return adjacency_from_edges(self.num_nodes, self.train_edges)

    def train_graph(self, graph: Graph) -> Graph:
        """``graph`` with the held-out positives removed."""
        return graph.with_edges(self.train_edges)


def normalize_adjacency(graph_or_adjacency) -> np.ndarray:
    """
    Symmetric GCN propagation matrix ``D^-1/2 (A + I) D^-1/2``.

    Accepts a ``Graph`` or a raw adjacency array. Self-loops make the
    normalization defined for isolated nodes.
    """
    if isinstance(graph_or_adjacency, Graph):
        adjacency = graph_or_adjacency.adjacency
    else:
        adjacency = np.asarray(graph_or_adjacency, dtype=np.float64)
    looped = adjacency + np.eye(adjacency.shape[0])
    inv_sqrt = 1.0 / np.sqrt(looped.sum(axis=1))
    return looped * inv_sqrt[:, None] * inv_sqrt[None, :]
