"""
End-to-end experiment pipeline shared by the CLI and the sweep runner.

Key features:
- Dataset loading, or generation from the synthetic block model
- Link split, utility node split and sensitive masking, each from its own
  derived random stream of the run seed
- Training of either model kind and embedding export
- Full evaluation into one ``EvalReport`` plus provenance

Given the same configuration and seed, every step reproduces the same
result; evaluating an embedding file later rebuilds the identical splits
from the seed stored in the file header.
"""

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from pvgae.evaluation.attack import SAMPLING_POLICY, attack_inference, public_secret_report
from pvgae.evaluation.metrics import link_auc, node_classification
from pvgae.evaluation.report import EvalReport
from pvgae.graph.base import Graph, LinkSplit, NodeAnnotations
from pvgae.graph.io import load_dataset
from pvgae.graph.sbm import generate_sbm
from pvgae.graph.splits import mask_sensitive, split_links, split_nodes
from pvgae.model.autoencoder import GraphAutoencoder
from pvgae.numerics.random import RandomSource
from pvgae.training.export import EmbeddingMatrix, export_embeddings
from pvgae.training.history import TrainHistory
from pvgae.training.trainer import ProgressCallback, train_pvgae, train_vgae_baseline
from pvgae.utils.config import ExperimentConfig
from pvgae.utils.errors import ConsistencyError, DegenerateLabelError
from pvgae.utils.logging import get_logger

log = get_logger("experiment")

Dataset = Tuple[Graph, NodeAnnotations, Dict[str, Any]]


@dataclass(frozen=True)
class PreparedData:
    """
    A dataset with its evaluation splits and training masks applied.

    :param graph: Full graph, all edges.
    :param ann: Annotations with utility test and observed masks set.
    :param split: Held-out link split.
    :param provenance: How the dataset was obtained.
    """
    graph: Graph
    ann: NodeAnnotations
    split: LinkSplit
    provenance: Dict[str, Any]

    @property
    def train_graph(self) -> Graph:
        return self.split.train_graph(self.graph)


@dataclass
class ExperimentResult:
    report: EvalReport
    provenance: Dict[str, Any]
    model: GraphAutoencoder
    history: TrainHistory
    embedding: EmbeddingMatrix
    data: PreparedData


def load_or_generate(cfg: ExperimentConfig) -> Dataset:
    """
    Read ``cfg.dataset.path`` or sample the synthetic block model.

    :return: Tuple of (graph, annotations, provenance).
    """
    if cfg.dataset.path:
        graph, ann, provenance = load_dataset(Path(cfg.dataset.path).expanduser())
        return graph, ann, {**provenance, "source": str(cfg.dataset.path)}
    graph, ann = generate_sbm(cfg.dataset.synthetic, RandomSource(cfg.dataset.seed).derive("dataset"))
    provenance = {"generator": "sbm", "sbm": cfg.dataset.synthetic.to_dict(), "seed": cfg.dataset.seed}
    return graph, ann, provenance


def prepare_data(cfg: ExperimentConfig, seed: int, dataset: Optional[Dataset] = None) -> PreparedData:
    """
    Apply the link split, node split and sensitive mask for run ``seed``.

    :param cfg: Experiment configuration.
    :param seed: Run seed; the three steps use its ``links``, ``nodes`` and
                 ``observed`` streams.
    :param dataset: Already loaded dataset; loaded or generated when None.
    """
    graph, ann, provenance = dataset if dataset is not None else load_or_generate(cfg)
    rng = RandomSource(seed)
    split = split_links(graph, cfg.eval.link_test_fraction, rng.derive("links"))
    if ann.labels is not None:
        ann = split_nodes(ann, cfg.eval.node_test_fraction, rng.derive("nodes"))
    ann = mask_sensitive(ann, cfg.train.observed_ratio, rng.derive("observed"))
    log.debug(
        f"Prepared data: {len(split.train_edges)} train edges, "
        f"{int(ann.utility_test_mask.sum())} test nodes, {int(ann.observed_mask.sum())} observed"
    )
    return PreparedData(graph=graph, ann=ann, split=split, provenance=provenance)


def train_model(cfg: ExperimentConfig,
                data: PreparedData,
                seed: int,
                progress_callback: Optional[ProgressCallback] = None
                ) -> Tuple[GraphAutoencoder, TrainHistory, EmbeddingMatrix]:
    """
    Train the configured model kind on the training graph and export embeddings.

    :raises TrainingAborted: If training hits a non-finite value.
    """
    train_cfg = replace(cfg.train_config(), seed=seed)
    rng = RandomSource(seed).derive("train")
    if cfg.train.model == "vgae":
        model, history = train_vgae_baseline(data.train_graph, train_cfg, rng, progress_callback)
    else:
        model, history = train_pvgae(data.train_graph, data.ann, train_cfg, rng, progress_callback)
    embedding = export_embeddings(model, data.train_graph, seed=seed, config_hash=cfg.config_hash())
    return model, history, embedding


def evaluate_embeddings(cfg: ExperimentConfig,
                        data: PreparedData,
                        embedding: EmbeddingMatrix,
                        axis: str = "single",
                        value: Optional[float] = None
                        ) -> Tuple[EvalReport, Dict[str, Any]]:
    """
    Compute every utility and privacy metric for one embedding.

    Both attacker kinds draw from the same stream, so they see the same
    attacker nodes and folds. Group metrics are None when every node (or
    none) is observed.

    :return: Tuple of (report, provenance).
    :raises ConsistencyError: If the embedding and dataset disagree on N.
    """
    if embedding.num_nodes != data.graph.num_nodes:
        raise ConsistencyError(
            f"embedding has {embedding.num_nodes} rows but the dataset has {data.graph.num_nodes} nodes"
        )
    if embedding.config_hash not in ("-", cfg.config_hash()):
        log.warning(f"Embedding config hash {embedding.config_hash} differs from current config {cfg.config_hash()}")

    seed = embedding.seed
    rng = RandomSource(seed).derive("eval")
    ann = data.ann
    attacker = cfg.eval.attacker

    node_acc = None
    if ann.has_labels and ann.utility_test_mask.any():
        try:
            node_acc = node_classification(embedding, ann.labels, ann.utility_test_mask,
                                           l2_weight=cfg.eval.l2_weight)
        except DegenerateLabelError as e:
            log.warning(f"Skipping node classification: {e}")

    attack_rng = rng.derive("attack")
    attack_mlp = attack_inference(embedding, ann.sensitive, attacker.with_kind("mlp"), attack_rng)
    attack_margin = attack_inference(embedding, ann.sensitive, attacker.with_kind("margin"), attack_rng)

    groups = None
    observed = int(ann.observed_mask.sum())
    if 0 < observed < ann.num_nodes:
        groups = public_secret_report(embedding, ann, attacker, attack_rng, cfg.eval.l2_weight)

    report = EvalReport(
        axis=axis,
        value=value,
        seed=seed,
        link_auc=link_auc(embedding, data.split),
        node_clf_acc=node_acc,
        attack_acc_mlp=attack_mlp,
        attack_acc_margin=attack_margin,
        public_acc=groups.public_acc if groups else None,
        secret_acc=groups.secret_acc if groups else None,
        public_attack=groups.public_attack if groups else None,
        secret_attack=groups.secret_attack if groups else None,
    )
    provenance = {
        "config_hash": cfg.config_hash(),
        "embedding_config_hash": embedding.config_hash,
        "seed": seed,
        "model": cfg.train.model,
        "dataset": data.provenance,
        "attacker_kind": attacker.kind,
        "attacker_sampling": SAMPLING_POLICY,
        "attacker_observed_fraction": attacker.observed_fraction,
        "group_sizes": {"public": observed, "secret": ann.num_nodes - observed},
        "link_test_pairs": int(len(data.split.test_pos)),
        "utility_test_nodes": int(ann.utility_test_mask.sum()),
    }
    return report, provenance


def run_experiment(cfg: ExperimentConfig,
                   seed: int,
                   axis: str = "single",
                   value: Optional[float] = None,
                   dataset: Optional[Dataset] = None,
                   progress_callback: Optional[ProgressCallback] = None
                   ) -> ExperimentResult:
    """
    Prepare, train, export and evaluate one configuration.

    :raises TrainingAborted: If training hits a non-finite value.
    """
    data = prepare_data(cfg, seed, dataset)
    model, history, embedding = train_model(cfg, data, seed, progress_callback)
    report, provenance = evaluate_embeddings(cfg, data, embedding, axis=axis, value=value)
    log.info(
        f"Run {cfg.train.model} seed={seed} {axis}={value}: link_auc={report.link_auc:.4f} "
        f"attack_mlp={report.attack_acc_mlp:.4f}"
    )
    return ExperimentResult(report, provenance, model, history, embedding, data)

