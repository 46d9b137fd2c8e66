"""
Unit tests for pvgae.training.

Tests cover:
- Training configuration validation and hashing
- Alternating optimization of the privacy-preserving model
- Baseline equivalence at zero penalty weight
- Abort handling on non-finite values
- History and embedding files
"""

import numpy as np
import pytest


@pytest.fixture
def prepared(tiny_config, sbm_dataset):
    from pvgae.experiment import prepare_data
    return prepare_data(tiny_config, 0, sbm_dataset)


def _train_cfg(tiny_config, **overrides):
    from dataclasses import replace
    return replace(tiny_config.train_config(), **overrides)


class TestTrainConfig:
    """Tests for TrainConfig."""

    @pytest.mark.unit
    def test_defaults(self):
        """Test documented defaults."""
        from pvgae.training.trainer import TrainConfig

        cfg = TrainConfig()

        assert cfg.beta == 10.0
        assert cfg.sensitive_epochs == 1
        assert cfg.observed_ratio == 1.0

    @pytest.mark.unit
    @pytest.mark.parametrize("field,value", [
        ("epochs", 0), ("sensitive_epochs", 0), ("lr_graph", 0.0),
        ("beta", -1.0), ("latent_dim", 0), ("observed_ratio", 0.0), ("observed_ratio", 1.5),
    ])
    def test_invalid(self, field, value):
        """Test that out-of-range values raise ConfigError."""
        from pvgae.training.trainer import TrainConfig
        from pvgae.utils.errors import ConfigError

        with pytest.raises(ConfigError):
            TrainConfig(**{field: value}).validate()

    @pytest.mark.unit
    def test_hash_ignores_log_interval(self):
        """Test that only settings affecting weights change the hash."""
        from pvgae.training.trainer import TrainConfig

        assert TrainConfig(log_interval=1).config_hash() == TrainConfig(log_interval=99).config_hash()
        assert TrainConfig(beta=1.0).config_hash() != TrainConfig(beta=2.0).config_hash()


class TestPvgaeTrainer:
    """Tests for the alternating trainer."""

    @pytest.mark.unit
    def test_history_and_callback(self, tiny_config, prepared):
        """Test one history record and one callback per epoch."""
        from pvgae.numerics import RandomSource
        from pvgae.training.trainer import train_pvgae

        calls = []
        cfg = _train_cfg(tiny_config, epochs=4)
        _, history = train_pvgae(prepared.train_graph, prepared.ann, cfg, RandomSource(0),
                                 lambda done, total, losses: calls.append((done, total)))

        assert len(history) == 4
        assert calls == [(1, 4), (2, 4), (3, 4), (4, 4)]
        assert history.column("epoch").tolist() == [1, 2, 3, 4]
        assert history.last.beta == cfg.beta

    @pytest.mark.unit
    def test_deterministic(self, tiny_config, prepared):
        """Test that the same seed reproduces identical parameters."""
        from pvgae.numerics import RandomSource
        from pvgae.training.trainer import train_pvgae

        cfg = _train_cfg(tiny_config, epochs=3)
        a, _ = train_pvgae(prepared.train_graph, prepared.ann, cfg, RandomSource(2))
        b, _ = train_pvgae(prepared.train_graph, prepared.ann, cfg, RandomSource(2))

        for name, tensor in a.params.items():
            np.testing.assert_array_equal(tensor.data, b.params[name].data)

    @pytest.mark.unit
    def test_reconstruction_improves(self, tiny_config, prepared):
        """Test that the graph reconstruction loss decreases over training."""
        from pvgae.numerics import RandomSource
        from pvgae.training.trainer import train_pvgae

        cfg = _train_cfg(tiny_config, epochs=60, beta=1.0, lr_graph=0.02)
        _, history = train_pvgae(prepared.train_graph, prepared.ann, cfg, RandomSource(0))
        recon = history.column("recon_x")

        assert recon[-10:].mean() < recon[:10].mean()

    @pytest.mark.unit
    def test_sensitive_step_leaves_graph_params(self, tiny_config, prepared):
        """Test that a sensitive step changes only the sensitive group."""
        from pvgae.numerics import RandomSource
        from pvgae.training.trainer import PvgaeTrainer

        trainer = PvgaeTrainer(prepared.train_graph, prepared.ann, _train_cfg(tiny_config), RandomSource(0))
        before = {k: v.numpy() for k, v in trainer.model.params.items()}
        trainer.sensitive_step(RandomSource(1))

        for name in trainer.model.parameters("graph"):
            np.testing.assert_array_equal(trainer.model.params[name].data, before[name])
        assert any(not np.array_equal(trainer.model.params[n].data, before[n])
                   for n in trainer.model.parameters("sensitive"))

    @pytest.mark.unit
    def test_graph_step_leaves_sensitive_params(self, tiny_config, prepared):
        """Test that a graph step changes only the graph group."""
        from pvgae.numerics import RandomSource
        from pvgae.training.trainer import PvgaeTrainer

        trainer = PvgaeTrainer(prepared.train_graph, prepared.ann, _train_cfg(tiny_config), RandomSource(0))
        before = {k: v.numpy() for k, v in trainer.model.params.items()}
        trainer.graph_step(RandomSource(1))

        for name in trainer.model.parameters("sensitive"):
            np.testing.assert_array_equal(trainer.model.params[name].data, before[name])

    @pytest.mark.unit
    def test_empty_observed_mask(self, tiny_config, prepared):
        """Test that training without observed sensitive values is rejected."""
        from pvgae.numerics import RandomSource
        from pvgae.training.trainer import PvgaeTrainer
        from pvgae.utils.errors import ContractError

        ann = prepared.ann.with_observed(np.zeros(prepared.ann.num_nodes, dtype=bool))
        with pytest.raises(ContractError):
            PvgaeTrainer(prepared.train_graph, ann, _train_cfg(tiny_config), RandomSource(0))

    @pytest.mark.unit
    def test_zero_beta_embeddings_match_baseline(self, tiny_config, prepared):
        """Test that beta=0 yields exactly the baseline's embeddings."""
        from pvgae.numerics import RandomSource
        from pvgae.training.export import export_embeddings
        from pvgae.training.trainer import train_pvgae, train_vgae_baseline

        cfg = _train_cfg(tiny_config, epochs=5, beta=0.0)
        pvgae, _ = train_pvgae(prepared.train_graph, prepared.ann, cfg, RandomSource(7))
        vgae, history = train_vgae_baseline(prepared.train_graph, cfg, RandomSource(7))

        np.testing.assert_array_equal(
            export_embeddings(pvgae, prepared.train_graph).values,
            export_embeddings(vgae, prepared.train_graph).values,
        )
        assert history.last.penalty == 0.0
        assert history.last.total_sensitive == 0.0

    @pytest.mark.unit
    def test_abort_keeps_partial_history(self, tiny_config, prepared, monkeypatch):
        """Test that a non-finite value aborts with the history so far."""
        from pvgae.numerics import RandomSource
        from pvgae.training.trainer import PvgaeTrainer
        from pvgae.utils.errors import NumericError, TrainingAborted

        original = PvgaeTrainer.run_epoch

        def failing(self, epoch):
            if epoch == 3:
                raise NumericError("synthetic overflow")
            return original(self, epoch)

        monkeypatch.setattr(PvgaeTrainer, "run_epoch", failing)
        trainer = PvgaeTrainer(prepared.train_graph, prepared.ann, _train_cfg(tiny_config), RandomSource(0))

        with pytest.raises(TrainingAborted) as exc_info:
            trainer.fit()

        assert exc_info.value.epoch == 3
        assert len(exc_info.value.history) == 2
        assert exc_info.value.last_losses is not None


class TestHistory:
    """Tests for TrainHistory persistence."""

    @pytest.mark.unit
    def test_save_load(self, temp_dir):
        """Test that a saved history reloads with identical values."""
        from pvgae.objectives import LossBreakdown
        from pvgae.training.history import EpochRecord, TrainHistory

        history = TrainHistory()
        history.append(EpochRecord(1, LossBreakdown(kl_x=0.1, recon_x=1.0 / 3.0, total_graph=0.5)))
        history.append(EpochRecord(2, LossBreakdown(penalty=2.5e-9)))
        loaded = TrainHistory.load(history.save(temp_dir / "history.csv"))

        assert len(loaded) == 2
        assert loaded.records[0].losses.recon_x == 1.0 / 3.0
        assert loaded.records[1].losses.penalty == 2.5e-9

    @pytest.mark.unit
    def test_bad_header(self, temp_dir):
        """Test that a foreign CSV is rejected."""
        from pvgae.training.history import TrainHistory
        from pvgae.utils.errors import FormatError

        path = temp_dir / "other.csv"
        path.write_text("a,b\n1,2\n")

        with pytest.raises(FormatError):
            TrainHistory.load(path)


class TestEmbeddingFile:
    """Tests for the embedding export format."""

    @pytest.mark.unit
    def test_header_and_exact_values(self, temp_dir):
        """Test the header line and exact value preservation."""
        from pvgae.training.export import EmbeddingMatrix, load_embeddings, save_embeddings

        values = np.random.default_rng(0).standard_normal((4, 3))
        path = save_embeddings(EmbeddingMatrix(values, seed=5, config_hash="abc123"), temp_dir / "emb.txt")
        loaded = load_embeddings(path)

        assert path.read_text().splitlines()[0] == "4 3 5 abc123"
        np.testing.assert_array_equal(loaded.values, values)
        assert loaded.seed == 5
        assert loaded.config_hash == "abc123"

    @pytest.mark.unit
    @pytest.mark.parametrize("content", [
        "4 3 0\n",
        "2 2 0 h\n1 2\n3\n",
        "3 2 0 h\n1 2\n3 4\n",
        "x 2 0 h\n1 2\n",
    ])
    def test_malformed(self, content, temp_dir):
        """Test that malformed headers and rows raise FormatError."""
        from pvgae.training.export import load_embeddings
        from pvgae.utils.errors import FormatError

        path = temp_dir / "emb.txt"
        path.write_text(content)

        with pytest.raises(FormatError):
            load_embeddings(path)

    @pytest.mark.unit
    def test_export_is_deterministic(self, tiny_config, prepared):
        """Test that exporting twice gives identical matrices."""
        from pvgae.model.autoencoder import PvgaeModel
        from pvgae.numerics import RandomSource
        from pvgae.training.export import export_embeddings

        model = PvgaeModel(prepared.graph.feature_dim, 8, 4, 2, rng=RandomSource(0))
        first = export_embeddings(model, prepared.train_graph)
        second = export_embeddings(model, prepared.train_graph)

        assert first.values.shape == (60, 4)
        np.testing.assert_array_equal(first.values, second.values)

    @pytest.mark.unit
    def test_non_finite_rejected(self):
        """Test that embeddings with NaN cannot be constructed."""
        from pvgae.training.export import EmbeddingMatrix
        from pvgae.utils.errors import NumericError

        with pytest.raises(NumericError):
            EmbeddingMatrix(np.array([[np.nan]]))
