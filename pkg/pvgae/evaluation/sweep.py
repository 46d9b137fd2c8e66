"""
Parameter sweeps.

This module runs one full train + evaluate cycle per (axis value, seed)
cell and aggregates the reports into a long-form summary CSV.

Key features:
- Three sweep axes: penalty weight, embedding dimension, observed ratio
- Every cell configuration validated before any work starts
- Parallel execution in worker processes, or sequential with one worker
- Failed cells are recorded and the sweep continues
- Results sorted by (value, seed) regardless of completion order
- Progress tracking with callbacks

The dataset is loaded or generated once and shared by every cell; each
cell derives its own splits, masks and training noise from its seed.
"""

import csv
import time
from pathlib import Path
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple
from concurrent.futures import ProcessPoolExecutor, as_completed

import numpy as np

from pvgae.evaluation.report import METRICS, EvalReport
from pvgae.experiment import Dataset, load_or_generate, run_experiment
from pvgae.utils.config import ExperimentConfig
from pvgae.utils.errors import ConfigError, ContractError
from pvgae.utils.logging import get_logger

log = get_logger("sweep")

# Accepted axis names → (canonical name, config section, field)
AXES: Dict[str, Tuple[str, str, str]] = {
    "beta": ("beta", "train", "beta"),
    "dim": ("dim", "model", "latent_dim"),
    "dimension": ("dim", "model", "latent_dim"),
    "latent_dim": ("dim", "model", "latent_dim"),
    "ratio": ("ratio", "train", "observed_ratio"),
    "observed_ratio": ("ratio", "train", "observed_ratio"),
}


@dataclass
class SweepCell:
    """
    Outcome of one (value, seed) cell.
    """
    axis: str
    value: float
    seed: int
    report: Optional[EvalReport] = None
    provenance: Dict[str, Any] = field(default_factory=dict)
    error: Optional[str] = None
    duration_seconds: float = 0.0

    @property
    def failed(self) -> bool:
        return self.report is None


def resolve_axis(axis: str) -> str:
    """
    Canonical axis name.

    :raises ConfigError: If ``axis`` is not a known sweep axis.
    """
    try:
        return AXES[axis.lower()][0]
    except KeyError:
        raise ConfigError(f"unknown sweep axis {axis!r}; expected one of beta, dim, ratio") from None


def configure_cell(base: ExperimentConfig, axis: str, value: float) -> ExperimentConfig:
    """
    Copy of ``base`` with the axis field set to ``value``, validated.

    :raises ConfigError: If the resulting configuration is invalid.
    """
    _, section, name = AXES[axis.lower()]
    cfg = base.copy()
    target = getattr(cfg, section)
    setattr(target, name, int(value) if isinstance(getattr(target, name), int) else float(value))
    cfg.validate()
    return cfg


def run_cell(cfg: ExperimentConfig, axis: str, value: float, seed: int, dataset: Dataset) -> SweepCell:
    """
    Execute one cell, catching every failure into the returned cell.

    Top-level so worker processes can pickle it.
    """
    started = time.time()
    cell = SweepCell(axis=axis, value=value, seed=seed)
    try:
        result = run_experiment(cfg, seed, axis=axis, value=value, dataset=dataset)
        cell.report = result.report
        cell.provenance = result.provenance
    except Exception as e:
        # Store error but don't raise - allow the sweep to continue
        log.error(f"Sweep cell {axis}={value} seed={seed} failed: {e}")
        cell.error = f"{type(e).__name__}: {e}"
    cell.duration_seconds = time.time() - started
    return cell


def run_sweep(base: ExperimentConfig,
              axis: str,
              values: Sequence[float],
              seeds: Sequence[int],
              workers: Optional[int] = None,
              progress_callback: Optional[Callable[[int, int, SweepCell], None]] = None
              ) -> List[SweepCell]:
    """
    Run every (value, seed) combination of a sweep.

    :param base: Configuration shared by all cells.
    :param axis: ``beta``, ``dim`` or ``ratio`` (aliases accepted).
    :param values: Axis values; must be non-empty.
    :param seeds: Run seeds; must be non-empty.
    :param workers: Worker processes (default: ``base.sweep`` setting; 1 = sequential).
    :param progress_callback: Optional callback(completed, total, cell).
    :return: Cells sorted by (value, seed).
    :raises ContractError: If ``values`` or ``seeds`` is empty.
    :raises ConfigError: If the axis or any cell configuration is invalid.
    """
    canonical = resolve_axis(axis)
    if not values:
        raise ContractError("sweep needs at least one axis value")
    if not seeds:
        raise ContractError("sweep needs at least one seed")

    configs = {value: configure_cell(base, axis, value) for value in values}
    dataset = load_or_generate(base)
    jobs = [(value, seed) for value in values for seed in seeds]
    workers = min(workers if workers is not None else base.sweep.resolved_workers(), len(jobs))
    log.info(f"Sweep over {canonical}: {len(values)} values x {len(seeds)} seeds, {workers} worker(s)")

    cells: List[SweepCell] = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            futures = [
                executor.submit(run_cell, configs[value], canonical, value, seed, dataset)
                for value, seed in jobs
            ]
            for future in as_completed(futures):
                cell = future.result()
                cells.append(cell)
                if progress_callback:
                    progress_callback(len(cells), len(jobs), cell)
    else:
        for value, seed in jobs:
            cell = run_cell(configs[value], canonical, value, seed, dataset)
            cells.append(cell)
            if progress_callback:
                progress_callback(len(cells), len(jobs), cell)

    cells.sort(key=lambda c: (c.value, c.seed))
    failed = sum(c.failed for c in cells)
    if failed:
        log.warning(f"{failed} of {len(cells)} sweep cells failed")
    return cells


def summarize(values: Sequence[Optional[float]]) -> Tuple[float, float]:
    """Mean and population standard deviation of the non-missing values."""
    finite = np.array([v for v in values if v is not None and np.isfinite(v)], dtype=np.float64)
    if finite.size == 0:
        return float("nan"), float("nan")
    return float(finite.mean()), float(finite.std())


def write_summary(cells: Sequence[SweepCell], path: Path) -> Path:
    """
    Write the long-form summary CSV.

    Columns: ``axis, value, metric, seed_<k>..., mean, std, failed`` with
    one row per (value, metric). Missing entries are left empty; ``failed``
    counts the failed seeds of that value.

    :return: The written path.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    seeds = sorted({c.seed for c in cells})
    values = sorted({c.value for c in cells})

    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["axis", "value", "metric"] + [f"seed_{s}" for s in seeds] + ["mean", "std", "failed"])
        for value in values:
            row_cells = {c.seed: c for c in cells if c.value == value}
            axis = next(iter(row_cells.values())).axis
            failed = sum(c.failed for c in row_cells.values())
            for metric in METRICS:
                per_seed = [
                    getattr(row_cells[s].report, metric)
                    if s in row_cells and not row_cells[s].failed else None
                    for s in seeds
                ]
                mean, std = summarize(per_seed)
                writer.writerow(
                    [axis, format(value, "g"), metric]
                    + ["" if v is None else format(v, ".6f") for v in per_seed]
                    + ["" if np.isnan(mean) else format(mean, ".6f"),
                       "" if np.isnan(std) else format(std, ".6f"),
                       failed]
                )
    log.info(f"Sweep summary written to {path}")
    return path
