"""
Graph data: the graph model, dataset files, splits and the synthetic
block-model generator.
"""

from pvgae.graph.base import Graph, LinkSplit, NodeAnnotations, normalize_adjacency
from pvgae.graph.io import load_dataset, load_graph, save_dataset
from pvgae.graph.sbm import SbmConfig, generate_sbm
from pvgae.graph.splits import mask_sensitive, split_links, split_nodes

__all__ = [
    "Graph",
    "LinkSplit",
    "NodeAnnotations",
    "normalize_adjacency",
    "load_dataset",
    "load_graph",
    "save_dataset",
    "SbmConfig",
    "generate_sbm",
    "mask_sensitive",
    "split_links",
    "split_nodes",
]
