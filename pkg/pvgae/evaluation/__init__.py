"""
Utility and privacy evaluation: link AUC, node classification,
attribute-inference attacks and reports. Sweeps live in
``pvgae.evaluation.sweep``.
"""

from pvgae.evaluation.metrics import auc_from_scores, link_auc, node_classification
from pvgae.evaluation.attack import (
    AttackerConfig,
    AttackResult,
    GroupReport,
    attack_inference,
    public_secret_report,
    run_attack,
)
from pvgae.evaluation.report import METRICS, EvalReport, append_report, load_reports

__all__ = [
    "auc_from_scores",
    "link_auc",
    "node_classification",
    "AttackerConfig",
    "AttackResult",
    "GroupReport",
    "attack_inference",
    "public_secret_report",
    "run_attack",
    "METRICS",
    "EvalReport",
    "append_report",
    "load_reports",
]
