"""
Per-epoch training records and their CSV form.
"""

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np

from pvgae.objectives import LossBreakdown
from pvgae.utils.errors import FormatError

COLUMNS = ("epoch", "kl_x", "recon_x", "kl_s", "recon_s", "penalty", "total_graph", "total_sensitive")


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    losses: LossBreakdown
    seconds: float = 0.0


@dataclass
class TrainHistory:
    """
    Ordered epoch records of one training run.
    """
    records: List[EpochRecord] = field(default_factory=list)

    def append(self, record: EpochRecord) -> None:
        self.records.append(record)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def last(self) -> Optional[LossBreakdown]:
        return self.records[-1].losses if self.records else None

    @property
    def total_seconds(self) -> float:
        return float(sum(r.seconds for r in self.records))

    def column(self, name: str) -> np.ndarray:
        """Values of one loss field across epochs."""
        if name == "epoch":
            return np.array([r.epoch for r in self.records], dtype=np.int64)
        return np.array([getattr(r.losses, name) for r in self.records], dtype=np.float64)

    def save(self, path: Path) -> Path:
        """Write the history CSV; floats keep full precision."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(COLUMNS)
            for record in self.records:
                values = record.losses.to_dict()
                writer.writerow([record.epoch] + [format(values[c], ".17g") for c in COLUMNS[1:]])
        return path

    @classmethod
    def load(cls, path: Path) -> "TrainHistory":
        """
        Read a history CSV written by ``save``.

        :raises FormatError: If the header does not match the expected columns.
        """
        path = Path(path)
        history = cls()
        with open(path, newline="") as f:
            reader = csv.reader(f)
            header = next(reader, None)
            if tuple(header or ()) != COLUMNS:
                raise FormatError(f"{path}: expected columns {','.join(COLUMNS)}")
            for row in reader:
                values = dict(zip(COLUMNS[1:], map(float, row[1:])))
                history.append(EpochRecord(epoch=int(row[0]), losses=LossBreakdown(**values)))
        return history
