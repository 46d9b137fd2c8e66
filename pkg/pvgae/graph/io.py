"""
Dataset files.

A dataset is three text files plus an optional provenance sidecar:

- ``edges.txt``: one undirected edge ``u v`` per line, ``#`` starts a comment.
- ``features.csv``: row ``i`` holds the D feature values of node ``i``, no header.
- ``annotations.csv``: header ``label,sensitive``; row ``i`` describes node ``i``.
  An empty label means the node is unlabeled.
- ``provenance.json``: how the dataset was produced (generator settings, seed).

The feature file defines the node count and ordering.
"""

import csv
import json
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import numpy as np

from pvgae.graph.base import Graph, NodeAnnotations
from pvgae.utils.errors import ConsistencyError, ParseError
from pvgae.utils.logging import get_logger

log = get_logger("graph.io")

EDGE_FILE = "edges.txt"
FEATURE_FILE = "features.csv"
ANNOTATION_FILE = "annotations.csv"
PROVENANCE_FILE = "provenance.json"


def _require(path: Path) -> Path:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Dataset file not found: {path}")
    return path


def read_features(path: Path) -> np.ndarray:
    path = _require(path)
    try:
        features = np.loadtxt(path, delimiter=",", ndmin=2, dtype=np.float64)
    except ValueError as e:
        raise ParseError(path, None, f"malformed feature file ({e})") from e
    if not np.all(np.isfinite(features)):
        raise ParseError(path, None, "feature values must be finite")
    return features


def read_edges(path: Path, num_nodes: int) -> np.ndarray:
    """
    Parse an edge list, checking every id against ``num_nodes``.

    Self-loops are dropped with a warning; duplicates are merged later by
    ``Graph``.
    """
    path = _require(path)
    edges = []
    self_loops = 0
    with open(path) as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ParseError(path, lineno, f"expected 'u v', got {line!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError(path, lineno, f"node ids must be integers, got {line!r}") from None
            if u < 0 or v < 0:
                raise ParseError(path, lineno, f"negative node id in {line!r}")
            if u >= num_nodes or v >= num_nodes:
                raise ConsistencyError(
                    f"node id {max(u, v)} out of range; feature file defines {num_nodes} nodes",
                    path=path, line=lineno,
                )
            if u == v:
                self_loops += 1
                continue
            edges.append((u, v))
    if self_loops:
        log.warning(f"Dropped {self_loops} self-loop(s) from {path}")
    return np.asarray(edges, dtype=np.int64).reshape(-1, 2)


def _dense_ids(values: np.ndarray) -> np.ndarray:
    _, inverse = np.unique(values, return_inverse=True)
    return inverse.astype(np.int64)


def read_annotations(path: Path, num_nodes: int) -> NodeAnnotations:
    path = _require(path)
    labels, sensitive = [], []
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        fields = [name.strip() for name in (reader.fieldnames or [])]
        if fields[:2] != ["label", "sensitive"]:
            raise ParseError(path, 1, f"expected header 'label,sensitive', got {','.join(fields)!r}")
        reader.fieldnames = fields
        for row in reader:
            lineno = reader.line_num
            try:
                label = (row["label"] or "").strip()
                labels.append(int(label) if label else -1)
                sensitive.append(int((row["sensitive"] or "").strip()))
            except ValueError:
                raise ParseError(path, lineno, f"class ids must be integers, got {row}") from None

    if len(sensitive) != num_nodes:
        raise ConsistencyError(
            f"annotation file has {len(sensitive)} rows but the feature file has {num_nodes}",
            path=path,
        )

    labels_arr = np.asarray(labels, dtype=np.int64)
    labelled = labels_arr >= 0
    if labelled.any():
        labels_arr[labelled] = _dense_ids(labels_arr[labelled])
        label_out: Optional[np.ndarray] = labels_arr
    else:
        label_out = None
    return NodeAnnotations.create(sensitive=_dense_ids(np.asarray(sensitive)), labels=label_out)


def load_graph(edge_path: Path,
               feature_path: Path,
               annotation_path: Path
               ) -> Tuple[Graph, NodeAnnotations]:
    """
    Read a dataset from its three files.

    :return: Tuple of (graph, annotations) with every sensitive value observed.
    :raises ParseError: On malformed lines, with path and line number.
    :raises ConsistencyError: When files disagree on the node count.
    """
    features = read_features(feature_path)
    num_nodes = features.shape[0]
    edges = read_edges(edge_path, num_nodes)
    ann = read_annotations(annotation_path, num_nodes)
    graph = Graph(num_nodes, edges, features)
    log.info(f"Loaded graph: {num_nodes} nodes, {graph.num_edges} edges, {graph.feature_dim} features")
    return graph, ann


def save_dataset(graph: Graph,
                 ann: NodeAnnotations,
                 directory: Path,
                 provenance: Optional[Dict[str, Any]] = None
                 ) -> Dict[str, Path]:
    """
    Write a dataset in the three-file format plus provenance sidecar.

    Output is byte-for-byte reproducible for identical inputs.

    :return: Mapping from file role to written path.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = {
        "edges": directory / EDGE_FILE,
        "features": directory / FEATURE_FILE,
        "annotations": directory / ANNOTATION_FILE,
        "provenance": directory / PROVENANCE_FILE,
    }

    with open(paths["edges"], "w") as f:
        f.write(f"# {graph.num_nodes} nodes, {graph.num_edges} undirected edges\n")
        for u, v in graph.edges:
            f.write(f"{u} {v}\n")

    np.savetxt(paths["features"], graph.features, delimiter=",", fmt="%.17g")

    with open(paths["annotations"], "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["label", "sensitive"])
        labels = ann.labels if ann.labels is not None else np.full(ann.num_nodes, -1)
        for label, s in zip(labels, ann.sensitive):
            writer.writerow(["" if label < 0 else int(label), int(s)])

    with open(paths["provenance"], "w") as f:
        json.dump(provenance or {}, f, indent=2, sort_keys=True)
        f.write("\n")

    log.info(f"Dataset written to {directory}")
    return paths


def load_dataset(directory: Path) -> Tuple[Graph, NodeAnnotations, Dict[str, Any]]:
    """
    Read a dataset directory written by ``save_dataset``.

    :return: Tuple of (graph, annotations, provenance); provenance is empty
             when the sidecar is absent.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"Dataset directory not found: {directory}")
    graph, ann = load_graph(directory / EDGE_FILE, directory / FEATURE_FILE, directory / ANNOTATION_FILE)
    provenance: Dict[str, Any] = {}
    sidecar = directory / PROVENANCE_FILE
    if sidecar.is_file():
        with open(sidecar) as f:
            provenance = json.load(f)
    return graph, ann, provenance
