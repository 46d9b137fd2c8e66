"""
Integration tests for the end-to-end pipeline.

These tests train real (tiny) models and run the full evaluation harness,
the sweep runner and the command-line chain.
Run with: pytest tests/integration/test_pipeline.py -m integration
"""

import numpy as np
import pytest
from typer.testing import CliRunner


runner = CliRunner()


@pytest.mark.integration
class TestRunExperiment:
    """Tests for run_experiment."""

    def test_report_is_complete(self, tiny_config, sbm_dataset):
        """Test that one run fills every metric with a value in [0, 1]."""
        from pvgae.evaluation.report import METRICS
        from pvgae.experiment import run_experiment

        result = run_experiment(tiny_config, seed=0, dataset=sbm_dataset)

        for name in METRICS:
            value = getattr(result.report, name)
            assert value is not None, name
            assert 0.0 <= value <= 1.0
        assert result.provenance["group_sizes"] == {"public": 30, "secret": 30}
        assert len(result.history) == tiny_config.train.epochs

    def test_full_observation_has_no_groups(self, tiny_config, sbm_dataset):
        """Test that group metrics are left empty when every node is observed."""
        from pvgae.experiment import run_experiment

        tiny_config.train.observed_ratio = 1.0
        report = run_experiment(tiny_config, seed=0, dataset=sbm_dataset).report

        assert report.public_attack is None
        assert report.secret_attack is None
        assert report.attack_acc_mlp is not None

    def test_baseline_model(self, tiny_config, sbm_dataset):
        """Test that the baseline runs through the same harness."""
        from pvgae.experiment import run_experiment

        tiny_config.train.model = "vgae"
        result = run_experiment(tiny_config, seed=1, dataset=sbm_dataset)

        assert result.history.column("penalty").tolist() == [0.0] * tiny_config.train.epochs
        assert result.report.link_auc is not None

    def test_zero_beta_trajectory_matches_baseline(self, tiny_config, sbm_dataset):
        """Test that beta=0 with full observation reproduces the baseline loss trajectory."""
        from pvgae.experiment import run_experiment

        tiny_config.train.beta = 0.0
        tiny_config.train.observed_ratio = 1.0
        tiny_config.train.epochs = 20
        pvgae = run_experiment(tiny_config, seed=2, dataset=sbm_dataset)
        tiny_config.train.model = "vgae"
        vgae = run_experiment(tiny_config, seed=2, dataset=sbm_dataset)

        for column in ("kl_x", "recon_x", "total_graph"):
            np.testing.assert_allclose(pvgae.history.column(column), vgae.history.column(column),
                                       rtol=0, atol=1e-9)
        np.testing.assert_array_equal(pvgae.embedding.values, vgae.embedding.values)


@pytest.mark.integration
class TestGradientAcceptance:
    """Finite-difference checks of both branch objectives on a random graph."""

    @staticmethod
    def _setup():
        from pvgae.graph.base import Graph, NodeAnnotations, normalize_adjacency
        from pvgae.model.autoencoder import PvgaeModel
        from pvgae.numerics import RandomSource

        rng = np.random.default_rng(12)
        pairs = np.array([(i, j) for i in range(12) for j in range(i + 1, 12)])
        edges = pairs[rng.random(len(pairs)) < 0.3]
        graph = Graph(num_nodes=12, edges=edges, features=rng.standard_normal((12, 5)))
        ann = NodeAnnotations.create(sensitive=rng.integers(0, 2, 12))
        model = PvgaeModel(5, 8, 4, 2, rng=RandomSource(3))
        return graph, ann, model, normalize_adjacency(graph)

    @staticmethod
    def _compare(fn, params):
        from pvgae.numerics import Tensor, backward
        from pvgae.numerics.gradcheck import numerical_gradient

        tracked = {k: Tensor(v.data, requires_grad=True) for k, v in params.items()}
        analytic = backward(fn(tracked), tracked)
        for name in params:
            numeric = numerical_gradient(fn, params, name, 1e-5)
            np.testing.assert_allclose(analytic[name], numeric, rtol=1e-4, atol=1e-8, err_msg=name)

    def test_graph_objective(self):
        """Test every graph-group gradient of the penalized graph objective."""
        from pvgae.numerics import RandomSource
        from pvgae.objectives import loss_graph

        graph, _, model, adj_norm = self._setup()
        frozen = model.parameters("sensitive")

        def fn(params):
            model.params = {**frozen, **params}
            return loss_graph(model, adj_norm, graph.features, graph.adjacency, 1.0, RandomSource(5))[0]

        self._compare(fn, model.parameters("graph"))

    def test_sensitive_objective(self):
        """Test every sensitive-group gradient of the sensitive objective."""
        from pvgae.numerics import RandomSource
        from pvgae.objectives import loss_sensitive

        graph, ann, model, adj_norm = self._setup()
        frozen = model.parameters("graph")

        def fn(params):
            model.params = {**frozen, **params}
            return loss_sensitive(model, adj_norm, graph.features, ann.sensitive, ann.observed_mask,
                                  RandomSource(5))[0]

        self._compare(fn, model.parameters("sensitive"))


@pytest.mark.integration
class TestClosedFormOracles:
    """Monte-Carlo checks of the closed-form divergences."""

    def test_gaussian_kl_matches_monte_carlo(self):
        """Test KL to the prior against a sampled estimate."""
        from pvgae.model.layers import GaussianPosterior
        from pvgae.numerics import Tensor
        from pvgae.objectives import gaussian_kl

        rng = np.random.default_rng(0)
        for mean, var in ((0.0, 2.0), (0.7, 0.5), (-1.0, 1.0)):
            post = GaussianPosterior(Tensor([[mean]]), Tensor([[np.log(var)]]))
            x = mean + np.sqrt(var) * rng.standard_normal(1_000_000)
            estimate = np.mean(-0.5 * np.log(var) - (x - mean) ** 2 / (2 * var) + x ** 2 / 2)

            assert gaussian_kl(post).item() == pytest.approx(estimate, abs=2e-2)

    def test_penalty_matches_monte_carlo(self):
        """Test the penalty against a sampled KL of the auxiliary variable's distribution."""
        from pvgae.numerics import Tensor
        from pvgae.objectives import independence_penalty

        rng = np.random.default_rng(1)
        for rho in (0.0, 0.5, 0.8):
            zx = rng.standard_normal((100_000, 1))
            zs = rho * zx + np.sqrt(1 - rho ** 2) * rng.standard_normal((100_000, 1))
            penalty, stats = independence_penalty(Tensor(zx), Tensor(zs))

            var = 1.0 + rho
            x = np.sqrt(var) * rng.standard_normal(1_000_000)
            estimate = np.mean(-0.5 * np.log(var) - x ** 2 / (2 * var) + x ** 2 / 2)

            assert penalty.item() == pytest.approx(estimate, abs=2e-2)
            assert stats.implied_rho[0] == pytest.approx(rho, abs=2e-2)

    def test_mutual_info_matches_binned_estimate(self):
        """Test the Gaussian mutual information against a histogram estimate."""
        from pvgae.objectives import mutual_info_gaussian

        rng = np.random.default_rng(2)
        for rho in (0.0, 0.5, 0.8):
            x = rng.standard_normal(1_000_000)
            y = rho * x + np.sqrt(1 - rho ** 2) * rng.standard_normal(1_000_000)
            joint, _, _ = np.histogram2d(x, y, bins=80, range=[[-5, 5], [-5, 5]])
            pxy = joint / joint.sum()
            px = pxy.sum(axis=1, keepdims=True)
            py = pxy.sum(axis=0, keepdims=True)
            nz = pxy > 0
            estimate = float(np.sum(pxy[nz] * np.log(pxy[nz] / (px @ py)[nz])))

            assert mutual_info_gaussian(rho) == pytest.approx(estimate, abs=0.03)

    def test_penalty_increases_with_correlation(self):
        """Test that the mean penalty over seeds grows strictly with |rho|."""
        from pvgae.numerics import Tensor
        from pvgae.objectives import independence_penalty

        means = []
        for rho in (0.0, 0.3, 0.6, 0.9):
            values = []
            for seed in range(5):
                rng = np.random.default_rng(seed)
                zx = rng.standard_normal((10_000, 4))
                zs = rho * zx + np.sqrt(1 - rho ** 2) * rng.standard_normal((10_000, 4))
                values.append(independence_penalty(Tensor(zx), Tensor(zs))[0].item())
            means.append(np.mean(values))

        assert means[0] < 1e-3
        assert all(a < b for a, b in zip(means, means[1:]))


@pytest.mark.integration
class TestLinkCeiling:
    """Upper bound on held-out link AUC for a plain block model."""

    def test_block_oracle_bounds_link_auc(self):
        """Test that the same-block scorer on the default dataset stays well below 0.85."""
        from pvgae.evaluation.metrics import auc_from_scores
        from pvgae.experiment import prepare_data
        from pvgae.graph.sbm import balanced_assignment
        from pvgae.utils.config import ExperimentConfig

        cfg = ExperimentConfig()
        blocks = balanced_assignment(cfg.dataset.synthetic.num_nodes, cfg.dataset.synthetic.num_blocks)
        aucs = []
        for seed in range(3):
            split = prepare_data(cfg, seed).split
            same = lambda pairs: (blocks[pairs[:, 0]] == blocks[pairs[:, 1]]).astype(np.float64)
            aucs.append(auc_from_scores(same(split.test_pos), same(split.test_neg)))

        assert 0.62 < np.median(aucs) < 0.78


@pytest.mark.integration
class TestSweep:
    """Tests for run_sweep."""

    def test_sequential_sweep_and_summary(self, tiny_config, temp_dir):
        """Test a two-value sweep and its summary file."""
        from pvgae.evaluation.sweep import run_sweep, write_summary

        cells = run_sweep(tiny_config, "beta", [0.0, 10.0], [0], workers=1)
        path = write_summary(cells, temp_dir / "summary.csv")

        assert [(c.value, c.seed) for c in cells] == [(0.0, 0), (10.0, 0)]
        assert not any(c.failed for c in cells)
        assert all(c.report.axis == "beta" for c in cells)
        lines = path.read_text().splitlines()
        assert lines[0] == "axis,value,metric,seed_0,mean,std,failed"
        assert len(lines) == 1 + 2 * 8

    def test_parallel_matches_sequential(self, tiny_config):
        """Test that worker processes produce the same reports as a sequential run."""
        from pvgae.evaluation.sweep import run_sweep

        sequential = run_sweep(tiny_config, "dim", [2, 4], [0, 1], workers=1)
        parallel = run_sweep(tiny_config, "dim", [2, 4], [0, 1], workers=2)

        assert [c.report for c in sequential] == [c.report for c in parallel]

    def test_failed_cell_is_recorded(self, tiny_config, monkeypatch):
        """Test that one failing cell does not stop the sweep."""
        import pvgae.evaluation.sweep as sweep
        from pvgae.utils.errors import NumericError

        original = sweep.run_experiment

        def flaky(cfg, seed, **kwargs):
            if seed == 1:
                raise NumericError("overflow in test")
            return original(cfg, seed, **kwargs)

        monkeypatch.setattr(sweep, "run_experiment", flaky)
        cells = sweep.run_sweep(tiny_config, "ratio", [0.5], [0, 1], workers=1)

        assert [c.failed for c in cells] == [False, True]
        assert "NumericError" in cells[1].error


@pytest.mark.integration
class TestCommandChain:
    """Tests for gen-synth → train → embed → eval through the CLI."""

    def test_chain_on_generated_dataset(self, config_file, temp_config_dir, temp_dir):
        """Test the full chain against a dataset directory written by gen-synth."""
        from pvgae.cmd.pvgae_cli import app
        from pvgae.evaluation.report import load_reports

        data_dir = temp_dir / "data"
        runs = temp_dir / "runs"
        result = runner.invoke(app, ["gen-synth", "--output", str(data_dir)])
        assert result.exit_code == 0, result.output

        result = runner.invoke(app, ["--out", str(runs), "train", "--dataset", str(data_dir), "--beta", "20"])
        assert result.exit_code == 0, result.output
        run_dir = next(runs.iterdir())
        assert not (run_dir / "dataset").exists()

        result = runner.invoke(app, ["embed", str(run_dir / "checkpoint.npz"), "--output", str(temp_dir / "e.txt")])
        assert result.exit_code == 0, result.output
        assert (temp_dir / "e.txt").read_bytes() == (run_dir / "embeddings.txt").read_bytes()

        result = runner.invoke(app, ["eval", str(temp_dir / "e.txt"), "--dataset", str(data_dir),
                                     "--report", str(temp_dir / "r.jsonl")])
        assert result.exit_code == 0, result.output
        assert len(load_reports(temp_dir / "r.jsonl")) == 1

    def test_train_is_byte_reproducible(self, config_file, temp_config_dir, temp_dir):
        """Test that two identical train invocations write identical embedding files."""
        from pvgae.cmd.pvgae_cli import app

        outputs = []
        for name in ("first", "second"):
            result = runner.invoke(app, ["--out", str(temp_dir / name), "--seed", "5", "train"])
            assert result.exit_code == 0, result.output
            run_dir = next((temp_dir / name).iterdir())
            outputs.append((run_dir / "embeddings.txt").read_bytes())

        assert outputs[0] == outputs[1]

    def test_sweep_command(self, config_file, temp_config_dir, temp_dir):
        """Test that sweep writes its summary and report files."""
        from pvgae.cmd.pvgae_cli import app
        from pvgae.evaluation.report import load_reports

        runs = temp_dir / "runs"
        result = runner.invoke(app, ["--out", str(runs), "sweep", "--axis", "beta",
                                     "--values", "0,5", "--seeds", "1"])

        assert result.exit_code == 0, result.output
        sweep_dir = next(runs.iterdir())
        assert sweep_dir.name.startswith("sweep-beta-")
        assert (sweep_dir / "summary.csv").exists()
        assert len(load_reports(sweep_dir / "reports.jsonl")) == 2
