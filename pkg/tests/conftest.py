"""
Pytest configuration and shared fixtures for pvgae tests.

This module provides:
- Custom markers for test categorization
- Opt-in execution of slow, desk-scale tests
- Shared fixtures for test isolation
- Small graphs and configurations that train in well under a second
"""

import tempfile
import shutil
from pathlib import Path

import numpy as np
import pytest


# =============================================================================
# Pytest Hooks and Configuration
# =============================================================================

def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="Run slow desk-scale tests")


def pytest_configure(config):
    """Register custom markers."""
    config.addinivalue_line(
        "markers", "unit: Unit tests (fast, no external dependencies)"
    )
    config.addinivalue_line(
        "markers", "integration: Integration tests (end-to-end pipeline, CLI and sweeps)"
    )
    config.addinivalue_line(
        "markers", "slow: Slow tests (desk-scale training runs, minutes)"
    )


def pytest_collection_modifyitems(config, items):
    """Skip slow tests unless --runslow is given."""
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="slow test, use --runslow to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


# =============================================================================
# Directory and Path Fixtures
# =============================================================================

@pytest.fixture
def temp_dir():
    """Create a temporary directory for test files.

    Yields:
        Path: Path to temporary directory, cleaned up after test.
    """
    tmpdir = tempfile.mkdtemp(prefix="pvgae_test_")
    yield Path(tmpdir)
    shutil.rmtree(tmpdir, ignore_errors=True)


@pytest.fixture
def temp_config_dir(temp_dir, monkeypatch):
    """Create a temporary config directory and patch the home directory.

    Environment overrides are cleared so a developer's shell settings
    cannot leak into the test.

    Yields:
        Path: Path to .pvgae config directory
    """
    config_dir = temp_dir / ".pvgae"
    config_dir.mkdir(parents=True)

    monkeypatch.setenv("HOME", str(temp_dir))
    for name in ("PVGAE_LOG_LEVEL", "PVGAE_LOG_FILE", "PVGAE_SEED", "PVGAE_OUTPUT_DIR",
                 "PVGAE_WORKERS", "PVGAE_BETA", "PVGAE_EPOCHS"):
        monkeypatch.delenv(name, raising=False)

    yield config_dir


# =============================================================================
# Configuration Fixtures
# =============================================================================

@pytest.fixture
def default_config():
    """Get a fresh default config instance.

    Returns:
        ExperimentConfig: Default configuration object
    """
    from pvgae.utils.config import ExperimentConfig
    return ExperimentConfig()


TINY_CONFIG = """
logging:
  level: WARNING
  log_interval: 1

dataset:
  seed: 3
  synthetic:
    num_nodes: 60
    num_blocks: 2
    p_in: 0.3
    p_out: 0.02
    feature_dim: 6
    flip_prob: 0.1

model:
  latent_dim: 4
  hidden_dim: 8

train:
  beta: 5.0
  epochs: 6
  lr_sensitive: 0.01
  lr_graph: 0.01
  observed_ratio: 0.5

eval:
  attacker:
    folds: 3
    hidden_dim: 8
    epochs: 50

sweep:
  workers: 1
"""


@pytest.fixture
def config_file(temp_config_dir):
    """Create a small, fast test config file in the default location.

    Returns:
        Path: Path to created config file
    """
    config_path = temp_config_dir / "config.yaml"
    config_path.write_text(TINY_CONFIG)
    return config_path


@pytest.fixture
def tiny_config(temp_dir):
    """Experiment configuration matching TINY_CONFIG, writing under temp_dir.

    Returns:
        ExperimentConfig: Small configuration that trains in well under a second
    """
    import yaml
    from pvgae.utils.config import ExperimentConfig

    cfg = ExperimentConfig.from_dict(yaml.safe_load(TINY_CONFIG))
    cfg.output_dir = str(temp_dir / "runs")
    return cfg


# =============================================================================
# Sample Data Fixtures
# =============================================================================

@pytest.fixture
def small_graph():
    """Two triangles joined by one bridge, plus a pendant node.

    Returns:
        Graph: 7 nodes, 8 edges, 3 features
    """
    from pvgae.graph.base import Graph

    edges = np.array([[0, 1], [0, 2], [1, 2], [2, 3], [3, 4], [3, 5], [4, 5], [5, 6]])
    features = np.arange(21, dtype=np.float64).reshape(7, 3) / 10.0
    return Graph(num_nodes=7, edges=edges, features=features)


@pytest.fixture
def small_annotations():
    """Annotations for small_graph: two sensitive groups, two labels.

    Returns:
        NodeAnnotations: Fully observed, no test nodes
    """
    from pvgae.graph.base import NodeAnnotations

    return NodeAnnotations.create(
        sensitive=np.array([0, 0, 0, 1, 1, 1, 1]),
        labels=np.array([0, 1, 0, 1, 0, 1, 0]),
    )


@pytest.fixture
def sbm_dataset(tiny_config):
    """Synthetic dataset sampled from tiny_config's block model.

    Returns:
        tuple: (graph, annotations, provenance)
    """
    from pvgae.experiment import load_or_generate
    return load_or_generate(tiny_config)
