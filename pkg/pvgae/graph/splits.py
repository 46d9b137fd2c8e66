"""
Train/test splitting and sensitive-attribute masking.

Every function here is a pure function of its inputs and the random stream
it is handed: the same graph, fraction and seed give the same split.
"""

import numpy as np

from pvgae.graph.base import Graph, LinkSplit, NodeAnnotations
from pvgae.numerics.random import RandomSource
from pvgae.utils.errors import ContractError, InfeasibleSplitError
from pvgae.utils.logging import get_logger

log = get_logger("graph.splits")

MIN_EDGES = 10
# Rejection rounds before falling back to enumerating every non-edge.
_MAX_REJECTION_ROUNDS = 50


def round_half_up(value: float) -> int:
    return int(np.floor(value + 0.5))


def _pair_keys(pairs: np.ndarray, num_nodes: int) -> np.ndarray:
    return pairs[:, 0].astype(np.int64) * num_nodes + pairs[:, 1]


def sample_non_edges(graph: Graph, count: int, rng: RandomSource) -> np.ndarray:
    """
    Draw ``count`` distinct node pairs uniformly from the non-edges of ``graph``.

    Pairs are returned with ``u < v``; self-loops never appear.

    :raises InfeasibleSplitError: If the graph has fewer non-edges than ``count``.
    """
    n = graph.num_nodes
    available = n * (n - 1) // 2 - graph.num_edges
    if available < count:
        raise InfeasibleSplitError(
            f"need {count} negative pairs but the graph only has {available} non-edges"
        )

    taken = set(_pair_keys(graph.edges, n).tolist())
    chosen: list = []
    chosen_keys: set = set()

    for _ in range(_MAX_REJECTION_ROUNDS):
        missing = count - len(chosen)
        if missing == 0:
            break
        batch = rng.integers(0, n, size=(2 * missing + 8, 2))
        for u, v in batch:
            if u == v:
                continue
            u, v = (u, v) if u < v else (v, u)
            key = int(u) * n + int(v)
            if key in taken or key in chosen_keys:
                continue
            chosen_keys.add(key)
            chosen.append((int(u), int(v)))
            if len(chosen) == count:
                break

    if len(chosen) < count:
        log.debug(f"Rejection sampling stalled at {len(chosen)}/{count}; enumerating non-edges")
        rows, cols = np.triu_indices(n, k=1)
        keys = rows.astype(np.int64) * n + cols
        free = ~np.isin(keys, np.fromiter(taken | chosen_keys, dtype=np.int64))
        pool = np.stack([rows[free], cols[free]], axis=1)
        picks = rng.choice(len(pool), size=count - len(chosen), replace=False)
        chosen.extend(map(tuple, pool[np.sort(picks)].tolist()))

    return np.asarray(chosen, dtype=np.int64).reshape(-1, 2)


def split_links(graph: Graph, test_fraction: float, rng: RandomSource) -> LinkSplit:
    """
    Hold out a fraction of edges plus an equal number of sampled non-edges.

    :param graph: Source graph.
    :param test_fraction: Fraction of edges to hold out, in (0, 0.5).
    :param rng: Random stream.
    :return: LinkSplit whose positives and training edges partition the edge set.
    :raises InfeasibleSplitError: If the graph has too few edges or non-edges.
    """
    if not 0.0 < test_fraction < 0.5:
        raise ContractError(f"test_fraction must lie in (0, 0.5), got {test_fraction}")

    count = max(1, round_half_up(test_fraction * graph.num_edges))
    n = graph.num_nodes
    non_edges = n * (n - 1) // 2 - graph.num_edges
    if non_edges < count:
        raise InfeasibleSplitError(
            f"need {count} negative pairs but the graph only has {non_edges} non-edges"
        )
    if graph.num_edges < MIN_EDGES:
        raise InfeasibleSplitError(
            f"link split needs at least {MIN_EDGES} edges, graph has {graph.num_edges}"
        )

    order = rng.permutation(graph.num_edges)
    test_pos = graph.edges[np.sort(order[:count])]
    train_edges = graph.edges[np.sort(order[count:])]
    test_neg = sample_non_edges(graph, count, rng)

    log.debug(f"Link split: {len(train_edges)} train edges, {count} test positives/negatives")
    return LinkSplit(train_edges=train_edges, test_pos=test_pos, test_neg=test_neg, num_nodes=n)


def split_nodes(ann: NodeAnnotations, test_fraction: float, rng: RandomSource) -> NodeAnnotations:
    """
    Mark ``round(test_fraction * N)`` uniformly chosen nodes as utility test nodes.

    :raises ContractError: If the annotations carry no labels.
    """
    if ann.labels is None:
        raise ContractError("split_nodes needs node labels")
    if not 0.0 <= test_fraction < 1.0:
        raise ContractError(f"test_fraction must lie in [0, 1), got {test_fraction}")

    n = ann.num_nodes
    mask = np.zeros(n, dtype=bool)
    mask[rng.choice(n, size=round_half_up(test_fraction * n), replace=False)] = True
    return ann.with_test(mask)


def mask_sensitive(ann: NodeAnnotations, observed_ratio: float, rng: RandomSource) -> NodeAnnotations:
    """
    Observe the sensitive attribute on exactly ``round(observed_ratio * N)`` nodes.

    At least one node is always observed.
    """
    if not 0.0 < observed_ratio <= 1.0:
        raise ContractError(f"observed_ratio must lie in (0, 1], got {observed_ratio}")

    n = ann.num_nodes
    count = min(n, max(1, round_half_up(observed_ratio * n)))
    mask = np.zeros(n, dtype=bool)
    mask[rng.choice(n, size=count, replace=False)] = True
    return ann.with_observed(mask)
