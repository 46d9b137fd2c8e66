"""
Evaluation reports.

One ``EvalReport`` per evaluated configuration, appended as a JSON line to
the report file. Provenance for the same record (config hash, dataset,
attacker sampling policy, group sizes) is appended to a sidecar file with
the suffix ``.provenance.jsonl`` so the report itself keeps a fixed field
list.
"""

import json
from dataclasses import dataclass, asdict, fields
from pathlib import Path
from typing import Any, Dict, List, Optional

from pvgae.utils.errors import ContractError, FormatError
from pvgae.utils.logging import get_logger

log = get_logger("evaluation.report")

METRICS = (
    "link_auc",
    "node_clf_acc",
    "attack_acc_mlp",
    "attack_acc_margin",
    "public_acc",
    "secret_acc",
    "public_attack",
    "secret_attack",
)


@dataclass(frozen=True)
class EvalReport:
    """
    Utility and privacy metrics of one (axis value, seed) configuration.

    Metrics that could not be computed (for example the group metrics when
    every node is observed) are None.
    """
    axis: str
    value: Optional[float]
    seed: int
    link_auc: Optional[float] = None
    node_clf_acc: Optional[float] = None
    attack_acc_mlp: Optional[float] = None
    attack_acc_margin: Optional[float] = None
    public_acc: Optional[float] = None
    secret_acc: Optional[float] = None
    public_attack: Optional[float] = None
    secret_attack: Optional[float] = None

    def __post_init__(self):
        for name in METRICS:
            value = getattr(self, name)
            if value is not None and not 0.0 <= value <= 1.0:
                raise ContractError(f"metric {name} must lie in [0, 1], got {value}")

    def metrics(self) -> Dict[str, Optional[float]]:
        return {name: getattr(self, name) for name in METRICS}

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "EvalReport":
        known = {f.name for f in fields(cls)}
        if set(data) != known:
            raise FormatError(f"report record fields {sorted(data)} do not match {sorted(known)}")
        return cls(**data)


def provenance_path(report_path: Path) -> Path:
    report_path = Path(report_path)
    return report_path.with_name(report_path.stem + ".provenance.jsonl")


def append_report(path: Path, report: EvalReport, provenance: Optional[Dict[str, Any]] = None) -> Path:
    """
    Append ``report`` to the JSONL report file and its provenance to the sidecar.

    :return: The report path.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "a") as f:
        f.write(json.dumps(report.to_dict()) + "\n")
    with open(provenance_path(path), "a") as f:
        f.write(json.dumps(provenance or {}, sort_keys=True) + "\n")
    log.info(f"Report appended to {path}")
    return path


def load_reports(path: Path) -> List[EvalReport]:
    """
    Read every record of a report file.

    :raises FormatError: On a line that is not a report record.
    """
    path = Path(path)
    reports = []
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                reports.append(EvalReport.from_dict(json.loads(line)))
            except json.JSONDecodeError as e:
                raise FormatError(f"{path}:{lineno}: invalid JSON ({e})") from e
    return reports
