"""
Configuration management for pvgae.

This module provides a hierarchical configuration system with support for
YAML files, environment variable overrides, and programmatic access. The
configuration covers the whole experiment: logging, the dataset (a file
directory or the synthetic block model), model dimensions, training
hyperparameters, evaluation protocol and sweep parallelism.

Configuration sources (in order of precedence):
1. Command-line flags (applied by the CLI)
2. Environment variables (PVGAE_* prefix)
3. YAML configuration file (~/.pvgae/config.yaml or --config)
4. Default values defined in dataclasses

Key features:
- Hierarchical configuration with nested sections
- Type-safe dataclass-based configuration
- Unknown sections or keys are rejected, never silently ignored
- YAML file persistence
- Environment variable overrides
- Global singleton instance
- Stable configuration hash for run provenance

Configuration sections:
- logging: Log level, file output, verbosity, loss log interval
- dataset: Dataset directory or synthetic generator settings
- model: Latent and hidden dimensions
- train: Model kind, penalty weight, epochs, learning rates, seed
- eval: Split fractions, classifier regularization, attacker
- sweep: Worker count
"""

import os
import copy
import yaml
from pathlib import Path
from typing import Any, Dict, Optional
from dataclasses import dataclass, field, asdict, fields, is_dataclass

from pvgae.evaluation.attack import AttackerConfig
from pvgae.graph.sbm import SbmConfig
from pvgae.training.trainer import TrainConfig
from pvgae.utils.errors import ConfigError
from pvgae.utils.logging import get_logger
from pvgae.utils.misc import config_hash

log = get_logger("config")

MODEL_KINDS = ("pvgae", "vgae")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def config_dir() -> Path:
    """Directory holding the user configuration (~/.pvgae)."""
    return Path.home() / ".pvgae"


def default_config_file() -> Path:
    return config_dir() / "config.yaml"


@dataclass
class LoggingConfig:
    """
    Logging configuration section.
    """
    # Log level: DEBUG, INFO, WARNING, ERROR, CRITICAL
    level: str = "INFO"
    # Optional path to log file (None = stderr only)
    file: Optional[str] = None
    # Include logger name and line number in every message
    verbose: bool = False
    # Epochs between training loss lines
    log_interval: int = 50


@dataclass
class DatasetConfig:
    """
    Dataset configuration section.
    """
    # Directory with edges.txt / features.csv / annotations.csv (None = synthetic)
    path: Optional[str] = None
    # Seed of the synthetic generator
    seed: int = 0
    # Block-model settings used when path is None
    synthetic: SbmConfig = field(default_factory=SbmConfig)


@dataclass
class ModelConfig:
    """
    Model dimensions section.
    """
    # Embedding dimension d
    latent_dim: int = 32
    # Graph convolution width h
    hidden_dim: int = 64


@dataclass
class TrainOptions:
    """
    Training section.
    """
    # Which model to train: pvgae or vgae
    model: str = "pvgae"
    beta: float = 10.0
    epochs: int = 500
    sensitive_epochs: int = 1
    lr_sensitive: float = 0.005
    lr_graph: float = 0.005
    seed: int = 0
    # Fraction of nodes whose sensitive attribute is visible during training
    observed_ratio: float = 1.0


@dataclass
class EvalConfig:
    """
    Evaluation protocol section.
    """
    # Fraction of edges held out for link prediction
    link_test_fraction: float = 0.1
    # Fraction of nodes held out for node classification
    node_test_fraction: float = 0.2
    # L2 weight of the downstream logistic regression
    l2_weight: float = 1e-4
    attacker: AttackerConfig = field(default_factory=AttackerConfig)


@dataclass
class SweepConfig:
    """
    Sweep execution section.
    """
    # Parallel worker processes (0 = all available cores)
    workers: int = 0

    def resolved_workers(self) -> int:
        return self.workers or (os.cpu_count() or 1)


@dataclass
class ExperimentConfig:
    """
    Root configuration container for pvgae.

    Provides access to all configuration sections and convenience methods
    for validation, hashing and persistence. Uses dataclass fields with
    factory functions to ensure each section has independent default
    instances.
    """

    logging: LoggingConfig = field(default_factory=LoggingConfig)
    dataset: DatasetConfig = field(default_factory=DatasetConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainOptions = field(default_factory=TrainOptions)
    eval: EvalConfig = field(default_factory=EvalConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    # Root directory for run outputs
    output_dir: str = "runs"

    def train_config(self) -> TrainConfig:
        """
        Merge the model and train sections into a ``TrainConfig``.

        :return: Training configuration for the trainer.
        """
        return TrainConfig(
            beta=self.train.beta,
            epochs=self.train.epochs,
            sensitive_epochs=self.train.sensitive_epochs,
            lr_sensitive=self.train.lr_sensitive,
            lr_graph=self.train.lr_graph,
            latent_dim=self.model.latent_dim,
            hidden_dim=self.model.hidden_dim,
            seed=self.train.seed,
            observed_ratio=self.train.observed_ratio,
            log_interval=self.logging.log_interval,
        )

    def validate(self) -> None:
        """
        Check every section.

        Called by every command before anything is written to disk.

        :raises ConfigError: On the first invalid value found.
        """
        if str(self.logging.level).upper() not in LOG_LEVELS:
            raise ConfigError(f"logging.level must be one of {', '.join(LOG_LEVELS)}, got {self.logging.level!r}")
        if self.train.model not in MODEL_KINDS:
            raise ConfigError(f"train.model must be one of {', '.join(MODEL_KINDS)}, got {self.train.model!r}")
        self.dataset.synthetic.validate()
        self.train_config().validate()
        if not 0.0 < self.eval.link_test_fraction < 0.5:
            raise ConfigError(f"eval.link_test_fraction must lie in (0, 0.5), got {self.eval.link_test_fraction}")
        if not 0.0 <= self.eval.node_test_fraction < 1.0:
            raise ConfigError(f"eval.node_test_fraction must lie in [0, 1), got {self.eval.node_test_fraction}")
        if self.eval.l2_weight <= 0:
            raise ConfigError(f"eval.l2_weight must be positive, got {self.eval.l2_weight}")
        self.eval.attacker.validate()
        if self.sweep.workers < 0:
            raise ConfigError(f"sweep.workers must be non-negative, got {self.sweep.workers}")
        if not self.output_dir:
            raise ConfigError("output_dir must not be empty")

    def config_hash(self) -> str:
        """
        Digest of the experiment-defining sections.

        Covers dataset, model, train and eval; the training seed is left
        out because run directories and embedding headers carry it
        separately.

        :return: First 12 hex characters of the SHA-256 digest.
        """
        payload = {
            "dataset": asdict(self.dataset),
            "model": asdict(self.model),
            "train": {k: v for k, v in asdict(self.train).items() if k != "seed"},
            "eval": asdict(self.eval),
        }
        return config_hash(payload)

    def copy(self) -> "ExperimentConfig":
        return copy.deepcopy(self)

    def to_dict(self) -> dict:
        """
        Convert configuration to dictionary.

        :return: Nested dictionary representation of all configuration sections.
        """
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        """
        Build a configuration from a nested dictionary.

        :raises ConfigError: On unknown keys or values of the wrong type.
        """
        cfg = cls()
        _apply_dict(cfg, data or {}, "")
        return cfg

    def save(self, path: Path = None) -> Path:
        """
        Save configuration to YAML file.

        Creates parent directories if they don't exist.

        :param path: Path to save config file (default: ~/.pvgae/config.yaml).
        :return: The written path.
        """
        path = Path(path or default_config_file())
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as f:
            yaml.safe_dump(self.to_dict(), f, default_flow_style=False, sort_keys=False)
        log.info(f"Config saved to {path}")
        return path


# Global configuration instance
config = ExperimentConfig()


def _coerce(value: Any, current: Any, where: str) -> Any:
    """Convert ``value`` to the type of the field's current value."""
    if isinstance(current, bool):
        if isinstance(value, bool):
            return value
        if isinstance(value, str) and value.lower() in ("true", "1", "yes", "false", "0", "no"):
            return value.lower() in ("true", "1", "yes")
        raise ConfigError(f"{where} must be a boolean, got {value!r}")
    try:
        if isinstance(current, int):
            if isinstance(value, float) and not value.is_integer():
                raise ValueError
            return int(value)
        if isinstance(current, float):
            return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{where} must be a number, got {value!r}") from None
    if value is None or isinstance(value, str):
        return value
    return str(value)


def _apply_dict(target: Any, data: Dict[str, Any], prefix: str) -> None:
    """
    Recursively copy ``data`` into the dataclass ``target``.

    :raises ConfigError: On unknown keys or a mapping where a value is expected.
    """
    if not isinstance(data, dict):
        raise ConfigError(f"section {prefix.rstrip('.') or '<root>'} must be a mapping")
    known = {f.name for f in fields(target)}
    for key, value in data.items():
        where = f"{prefix}{key}"
        if key not in known:
            raise ConfigError(f"unknown configuration key {where!r}")
        current = getattr(target, key)
        if is_dataclass(current):
            _apply_dict(current, value or {}, f"{where}.")
        elif isinstance(value, dict):
            raise ConfigError(f"{where} must be a single value, not a section")
        else:
            setattr(target, key, _coerce(value, current, where))


def _apply_env_vars(cfg: ExperimentConfig) -> None:
    """
    Apply environment variable overrides to configuration.

    Checks for PVGAE_* environment variables and applies them as overrides.
    Handles type conversion based on the target field type.

    :param cfg: Configuration instance to update.
    """
    env_mappings = {
        "PVGAE_LOG_LEVEL": ("logging", "level"),
        "PVGAE_LOG_FILE": ("logging", "file"),
        "PVGAE_SEED": ("train", "seed"),
        "PVGAE_OUTPUT_DIR": (None, "output_dir"),
        "PVGAE_WORKERS": ("sweep", "workers"),
        "PVGAE_BETA": ("train", "beta"),
        "PVGAE_EPOCHS": ("train", "epochs"),
    }
    for env_var, (section, key) in env_mappings.items():
        value = os.environ.get(env_var)
        if value is None:
            continue
        section_obj = getattr(cfg, section) if section else cfg
        setattr(section_obj, key, _coerce(value, getattr(section_obj, key), env_var))
        log.debug(f"Config override from {env_var}: {section or 'root'}.{key} = {value}")


def load_config(config_path: Path = None) -> ExperimentConfig:
    """
    Load configuration from file and environment variables.

    Loads configuration in the following order:
    1. Reset to default values
    2. Load from YAML file (if it exists)
    3. Apply environment variable overrides

    Updates the global config instance and returns it.

    :param config_path: Optional path to config file (default: ~/.pvgae/config.yaml).
    :return: Updated global configuration instance.
    :raises ConfigError: If an explicitly given file is missing, or any file
                         is malformed or contains unknown keys.
    """
    global config

    config = ExperimentConfig()

    if config_path is not None and not Path(config_path).exists():
        raise ConfigError(f"config file not found: {config_path}")
    path = Path(config_path) if config_path else default_config_file()
    if path.exists():
        try:
            with open(path) as f:
                data = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"malformed YAML in {path}: {e}") from e
        _apply_dict(config, data, "")
        log.debug(f"Loaded config from {path}")

    _apply_env_vars(config)
    return config


def init_config_file(path: Path = None, force: bool = False) -> bool:
    """
    Create a default configuration file.

    :param path: Destination (default: ~/.pvgae/config.yaml).
    :param force: Overwrite an existing file.
    :return: True if a file was written.
    """
    path = Path(path or default_config_file())
    if path.exists() and not force:
        return False
    ExperimentConfig().save(path)
    log.info(f"Created default config at {path}")
    return True


def get_config() -> ExperimentConfig:
    """
    Get the global configuration instance.

    :return: Global configuration instance.
    """
    return config
