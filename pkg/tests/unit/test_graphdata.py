"""
Unit tests for pvgae.graph.

Tests cover:
- Graph and annotation invariants
- Adjacency normalization
- Link, node and sensitive-attribute splits
- Synthetic block-model generation
- Dataset file reading and writing
"""

import numpy as np
import pytest


def _write_dataset(directory, edges="0 1\n1 2\n", features="1,0\n0,1\n1,1\n", annotations="label,sensitive\n0,1\n1,0\n,1\n"):
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "edges.txt").write_text(edges)
    (directory / "features.csv").write_text(features)
    (directory / "annotations.csv").write_text(annotations)
    return directory


class TestGraph:
    """Tests for the Graph and NodeAnnotations containers."""

    @pytest.mark.unit
    def test_edges_canonicalized(self):
        """Test that edges are oriented, deduplicated and self-loop free."""
        from pvgae.graph.base import Graph

        g = Graph(4, np.array([[1, 0], [0, 1], [2, 2], [3, 2]]), np.zeros((4, 1)))

        np.testing.assert_array_equal(g.edges, [[0, 1], [2, 3]])
        assert g.num_edges == 2

    @pytest.mark.unit
    def test_adjacency_symmetric_zero_diagonal(self, small_graph):
        """Test that the dense adjacency is symmetric with an empty diagonal."""
        a = small_graph.adjacency

        np.testing.assert_array_equal(a, a.T)
        assert np.trace(a) == 0
        assert a.sum() == 2 * small_graph.num_edges

    @pytest.mark.unit
    def test_out_of_range_edge(self):
        """Test that an endpoint beyond N is a consistency error."""
        from pvgae.graph.base import Graph
        from pvgae.utils.errors import ConsistencyError

        with pytest.raises(ConsistencyError):
            Graph(3, np.array([[0, 3]]), np.zeros((3, 2)))

    @pytest.mark.unit
    def test_feature_rows_must_match(self):
        """Test that feature rows must equal the node count."""
        from pvgae.graph.base import Graph
        from pvgae.utils.errors import DimensionError

        with pytest.raises(DimensionError):
            Graph(3, np.zeros((0, 2)), np.zeros((2, 2)))

    @pytest.mark.unit
    def test_permutation_preserves_structure(self, small_graph):
        """Test that relabelling nodes permutes the adjacency accordingly."""
        order = np.array([6, 5, 4, 3, 2, 1, 0])
        permuted = small_graph.permuted(order)

        np.testing.assert_array_equal(permuted.adjacency, small_graph.adjacency[np.ix_(order, order)])
        np.testing.assert_array_equal(permuted.features, small_graph.features[order])

    @pytest.mark.unit
    def test_annotations_defaults(self, small_annotations):
        """Test that create() observes every node and holds none out."""
        assert small_annotations.observed_mask.all()
        assert not small_annotations.utility_test_mask.any()
        assert small_annotations.num_sensitive_classes == 2
        assert small_annotations.has_labels

    @pytest.mark.unit
    def test_negative_sensitive_rejected(self):
        """Test that sensitive class ids must be non-negative."""
        from pvgae.graph.base import NodeAnnotations
        from pvgae.utils.errors import ContractError

        with pytest.raises(ContractError):
            NodeAnnotations.create(sensitive=np.array([0, -1]))


class TestNormalizeAdjacency:
    """Tests for the symmetric propagation matrix."""

    @pytest.mark.unit
    def test_single_edge(self):
        """Test that one edge between two nodes gives a uniform 0.5 matrix."""
        from pvgae.graph.base import normalize_adjacency

        np.testing.assert_allclose(normalize_adjacency(np.array([[0.0, 1.0], [1.0, 0.0]])), np.full((2, 2), 0.5))

    @pytest.mark.unit
    def test_isolated_node(self):
        """Test that an isolated node maps to itself with weight 1."""
        from pvgae.graph.base import normalize_adjacency

        out = normalize_adjacency(np.zeros((3, 3)))

        np.testing.assert_allclose(out, np.eye(3))

    @pytest.mark.unit
    def test_symmetric_spectrum_bounded(self, small_graph):
        """Test that the matrix is symmetric with eigenvalues in [-1, 1]."""
        from pvgae.graph.base import normalize_adjacency

        out = normalize_adjacency(small_graph)
        eig = np.linalg.eigvalsh(out)

        np.testing.assert_allclose(out, out.T)
        assert eig.max() <= 1.0 + 1e-9
        assert eig.min() >= -1.0 - 1e-9


class TestLinkSplit:
    """Tests for held-out link splits."""

    @pytest.mark.unit
    def test_partition_and_balance(self, sbm_dataset):
        """Test that positives and training edges partition E and negatives are non-edges."""
        from pvgae.graph.splits import split_links
        from pvgae.numerics import RandomSource

        graph, _, _ = sbm_dataset
        split = split_links(graph, 0.1, RandomSource(0))
        key = lambda pairs: set(map(tuple, pairs.tolist()))

        assert len(split.test_pos) == len(split.test_neg) == max(1, int(np.floor(0.1 * graph.num_edges + 0.5)))
        assert key(split.test_pos) | key(split.train_edges) == key(graph.edges)
        assert not key(split.test_pos) & key(split.train_edges)
        assert not key(split.test_neg) & key(graph.edges)
        assert len(key(split.test_neg)) == len(split.test_neg)
        assert all(u < v for u, v in split.test_neg)

    @pytest.mark.unit
    def test_deterministic(self, sbm_dataset):
        """Test that the same seed reproduces the same split."""
        from pvgae.graph.splits import split_links
        from pvgae.numerics import RandomSource

        graph, _, _ = sbm_dataset
        a = split_links(graph, 0.2, RandomSource(4))
        b = split_links(graph, 0.2, RandomSource(4))

        np.testing.assert_array_equal(a.test_pos, b.test_pos)
        np.testing.assert_array_equal(a.test_neg, b.test_neg)

    @pytest.mark.unit
    def test_too_few_edges(self, small_graph):
        """Test that a graph below the minimum edge count is infeasible."""
        from pvgae.graph.splits import split_links
        from pvgae.numerics import RandomSource
        from pvgae.utils.errors import InfeasibleSplitError

        with pytest.raises(InfeasibleSplitError):
            split_links(small_graph, 0.1, RandomSource(0))

    @pytest.mark.unit
    def test_complete_graph_has_no_negatives(self):
        """Test that a complete graph cannot supply negative pairs."""
        from pvgae.graph.base import Graph
        from pvgae.graph.splits import split_links
        from pvgae.numerics import RandomSource
        from pvgae.utils.errors import InfeasibleSplitError

        rows, cols = np.triu_indices(6, k=1)
        complete = Graph(6, np.stack([rows, cols], axis=1), np.zeros((6, 1)))

        with pytest.raises(InfeasibleSplitError):
            split_links(complete, 0.2, RandomSource(0))

    @pytest.mark.unit
    def test_fraction_bounds(self, sbm_dataset):
        """Test that the held-out fraction must lie strictly inside (0, 0.5)."""
        from pvgae.graph.splits import split_links
        from pvgae.numerics import RandomSource
        from pvgae.utils.errors import ContractError

        graph, _, _ = sbm_dataset
        for fraction in (0.0, 0.5):
            with pytest.raises(ContractError):
                split_links(graph, fraction, RandomSource(0))

    @pytest.mark.unit
    def test_dense_graph_uses_enumeration(self):
        """Test that negatives are found when almost every pair is an edge."""
        from pvgae.graph.base import Graph
        from pvgae.graph.splits import sample_non_edges
        from pvgae.numerics import RandomSource

        rows, cols = np.triu_indices(12, k=1)
        pairs = np.stack([rows, cols], axis=1)
        graph = Graph(12, pairs[3:], np.zeros((12, 1)))
        negatives = sample_non_edges(graph, 3, RandomSource(0))

        assert set(map(tuple, negatives.tolist())) == set(map(tuple, pairs[:3].tolist()))


class TestNodeMasks:
    """Tests for utility and sensitive masks."""

    @pytest.mark.unit
    def test_split_nodes_count(self, sbm_dataset):
        """Test that exactly round(fraction * N) nodes are held out."""
        from pvgae.graph.splits import split_nodes
        from pvgae.numerics import RandomSource

        _, ann, _ = sbm_dataset
        out = split_nodes(ann, 0.25, RandomSource(0))

        assert out.utility_test_mask.sum() == 15

    @pytest.mark.unit
    def test_split_nodes_requires_labels(self):
        """Test that splitting unlabeled annotations is rejected."""
        from pvgae.graph.base import NodeAnnotations
        from pvgae.graph.splits import split_nodes
        from pvgae.numerics import RandomSource
        from pvgae.utils.errors import ContractError

        with pytest.raises(ContractError):
            split_nodes(NodeAnnotations.create(np.array([0, 1, 0])), 0.3, RandomSource(0))

    @pytest.mark.unit
    def test_mask_sensitive_counts(self, sbm_dataset):
        """Test observed counts, the at-least-one rule and the full ratio."""
        from pvgae.graph.splits import mask_sensitive
        from pvgae.numerics import RandomSource

        _, ann, _ = sbm_dataset

        assert mask_sensitive(ann, 0.5, RandomSource(0)).observed_mask.sum() == 30
        assert mask_sensitive(ann, 0.001, RandomSource(0)).observed_mask.sum() == 1
        assert mask_sensitive(ann, 1.0, RandomSource(0)).observed_mask.all()

    @pytest.mark.unit
    def test_mask_sensitive_ratio_bounds(self, small_annotations):
        """Test that a zero ratio is rejected."""
        from pvgae.graph.splits import mask_sensitive
        from pvgae.numerics import RandomSource
        from pvgae.utils.errors import ContractError

        with pytest.raises(ContractError):
            mask_sensitive(small_annotations, 0.0, RandomSource(0))


class TestSbm:
    """Tests for the synthetic block model."""

    @pytest.mark.unit
    def test_shapes_and_balance(self):
        """Test node count, feature shape and balanced blocks."""
        from pvgae.graph.sbm import SbmConfig, generate_sbm
        from pvgae.numerics import RandomSource

        cfg = SbmConfig(num_nodes=31, num_blocks=3, flip_prob=0.0, feature_dim=5)
        graph, ann = generate_sbm(cfg, RandomSource(0))

        assert graph.num_nodes == 31
        assert graph.features.shape == (31, 5)
        assert sorted(np.bincount(ann.sensitive).tolist()) == [10, 10, 11]

    @pytest.mark.unit
    def test_within_block_denser(self):
        """Test that within-block edges clearly outnumber cross-block edges."""
        from pvgae.graph.sbm import SbmConfig, generate_sbm
        from pvgae.numerics import RandomSource

        cfg = SbmConfig(num_nodes=200, p_in=0.1, p_out=0.01, flip_prob=0.0)
        graph, ann = generate_sbm(cfg, RandomSource(1))
        same = ann.sensitive[graph.edges[:, 0]] == ann.sensitive[graph.edges[:, 1]]

        assert same.sum() > 4 * (~same).sum()

    @pytest.mark.unit
    def test_flip_changes_block(self):
        """Test that flip_prob=0.5 reassigns about half the nodes to another block."""
        from pvgae.graph.sbm import SbmConfig, balanced_assignment, generate_sbm
        from pvgae.numerics import RandomSource

        cfg = SbmConfig(num_nodes=400, num_blocks=4, flip_prob=0.5, feature_dim=6)
        _, ann = generate_sbm(cfg, RandomSource(2))
        changed = (ann.sensitive != balanced_assignment(400, 4)).mean()

        assert 0.4 < changed < 0.6

    @pytest.mark.unit
    def test_within_block_count_matches_expectation(self):
        """Test within- and cross-block edge counts against their binomial mean within 3 sigma."""
        from pvgae.graph.sbm import SbmConfig, generate_sbm
        from pvgae.numerics import RandomSource

        cfg = SbmConfig(num_nodes=300, num_blocks=2, p_in=0.05, p_out=0.005, flip_prob=0.0)
        graph, ann = generate_sbm(cfg, RandomSource(0))
        same = ann.sensitive[graph.edges[:, 0]] == ann.sensitive[graph.edges[:, 1]]

        within_pairs = 2 * (150 * 149 // 2)
        cross_pairs = 150 * 150
        expected_in, sigma_in = within_pairs * 0.05, np.sqrt(within_pairs * 0.05 * 0.95)
        expected_out, sigma_out = cross_pairs * 0.005, np.sqrt(cross_pairs * 0.005 * 0.995)

        assert expected_in == pytest.approx(1117.5)
        assert abs(same.sum() - expected_in) <= 3.0 * sigma_in
        assert abs((~same).sum() - expected_out) <= 3.0 * sigma_out

    @pytest.mark.unit
    def test_mean_degree_matches_expectation(self):
        """Test the mean degree against (block size - 1) p_in + (N - block size) p_out."""
        from pvgae.graph.sbm import SbmConfig, generate_sbm
        from pvgae.numerics import RandomSource

        cfg = SbmConfig(num_nodes=300, num_blocks=2, p_in=0.05, p_out=0.005, flip_prob=0.0)
        graph, _ = generate_sbm(cfg, RandomSource(7))
        degrees = graph.adjacency.sum(axis=1)

        expected = 149 * 0.05 + 150 * 0.005
        # Each edge touches two nodes, so the mean degree is 2|E|/N.
        variance = 2.0 * 2.0 * (150 * 149 * 0.05 * 0.95 + 150 * 150 * 0.005 * 0.995) / 300 ** 2
        assert degrees.mean() == pytest.approx(2.0 * graph.num_edges / 300)
        assert abs(degrees.mean() - expected) <= 3.0 * np.sqrt(variance)

    @pytest.mark.unit
    def test_equal_probabilities_rejected(self):
        """Test that p_in == p_out is rejected: the blocks would carry no structure."""
        from pvgae.graph.sbm import SbmConfig
        from pvgae.utils.errors import ConfigError

        with pytest.raises(ConfigError):
            SbmConfig(p_in=0.05, p_out=0.05).validate()

    @pytest.mark.unit
    def test_invalid_config(self):
        """Test that inverted probabilities and small feature dims are rejected."""
        from pvgae.graph.sbm import SbmConfig
        from pvgae.utils.errors import ConfigError

        with pytest.raises(ConfigError):
            SbmConfig(p_in=0.01, p_out=0.1).validate()
        with pytest.raises(ConfigError):
            SbmConfig(num_blocks=4, feature_dim=3).validate()

    @pytest.mark.unit
    def test_deterministic(self):
        """Test that the same seed reproduces the same dataset."""
        from pvgae.graph.sbm import SbmConfig, generate_sbm
        from pvgae.numerics import RandomSource

        g1, a1 = generate_sbm(SbmConfig(num_nodes=50), RandomSource(9))
        g2, a2 = generate_sbm(SbmConfig(num_nodes=50), RandomSource(9))

        np.testing.assert_array_equal(g1.edges, g2.edges)
        np.testing.assert_array_equal(g1.features, g2.features)
        np.testing.assert_array_equal(a1.sensitive, a2.sensitive)


class TestDatasetIO:
    """Tests for the three-file dataset format."""

    @pytest.mark.unit
    def test_load_minimal(self, temp_dir):
        """Test loading a small dataset with an unlabeled node."""
        from pvgae.graph.io import load_dataset

        graph, ann, provenance = load_dataset(_write_dataset(temp_dir / "ds"))

        assert graph.num_nodes == 3
        assert graph.num_edges == 2
        np.testing.assert_array_equal(ann.labels, [0, 1, -1])
        np.testing.assert_array_equal(ann.sensitive, [1, 0, 1])
        assert provenance == {}

    @pytest.mark.unit
    def test_sparse_ids_made_dense(self, temp_dir):
        """Test that sensitive ids such as 3 and 7 become 0 and 1."""
        from pvgae.graph.io import load_dataset

        directory = _write_dataset(temp_dir / "ds", annotations="label,sensitive\n5,7\n9,3\n5,7\n")
        _, ann, _ = load_dataset(directory)

        np.testing.assert_array_equal(ann.sensitive, [1, 0, 1])
        np.testing.assert_array_equal(ann.labels, [0, 1, 0])

    @pytest.mark.unit
    def test_out_of_range_id_names_line(self, temp_dir):
        """Test that an id beyond the feature rows reports the offending line."""
        from pvgae.graph.io import load_dataset
        from pvgae.utils.errors import ConsistencyError

        directory = _write_dataset(temp_dir / "ds", edges="0 1\n# comment\n1 7\n")

        with pytest.raises(ConsistencyError) as exc_info:
            load_dataset(directory)

        assert exc_info.value.line == 3
        assert "edges.txt:3" in str(exc_info.value)

    @pytest.mark.unit
    def test_malformed_edge_line(self, temp_dir):
        """Test that a non-integer edge line is a parse error."""
        from pvgae.graph.io import load_dataset
        from pvgae.utils.errors import ParseError

        with pytest.raises(ParseError):
            load_dataset(_write_dataset(temp_dir / "ds", edges="0 x\n"))

    @pytest.mark.unit
    def test_annotation_row_mismatch(self, temp_dir):
        """Test that annotation and feature row counts must agree."""
        from pvgae.graph.io import load_dataset
        from pvgae.utils.errors import ConsistencyError

        with pytest.raises(ConsistencyError):
            load_dataset(_write_dataset(temp_dir / "ds", annotations="label,sensitive\n0,1\n"))

    @pytest.mark.unit
    def test_self_loops_dropped(self, temp_dir):
        """Test that self-loops in the edge file are ignored."""
        from pvgae.graph.io import load_dataset

        graph, _, _ = load_dataset(_write_dataset(temp_dir / "ds", edges="0 0\n0 1\n2 2\n"))

        assert graph.num_edges == 1

    @pytest.mark.unit
    def test_missing_directory(self, temp_dir):
        """Test that a missing dataset directory raises FileNotFoundError."""
        from pvgae.graph.io import load_dataset

        with pytest.raises(FileNotFoundError):
            load_dataset(temp_dir / "nope")

    @pytest.mark.unit
    def test_save_is_reproducible(self, sbm_dataset, temp_dir):
        """Test that saving the same dataset twice gives identical bytes."""
        from pvgae.graph.io import load_dataset, save_dataset

        graph, ann, provenance = sbm_dataset
        first = save_dataset(graph, ann, temp_dir / "a", provenance)
        second = save_dataset(graph, ann, temp_dir / "b", provenance)

        for role in first:
            assert first[role].read_bytes() == second[role].read_bytes()

        loaded, loaded_ann, loaded_prov = load_dataset(temp_dir / "a")
        np.testing.assert_array_equal(loaded.edges, graph.edges)
        np.testing.assert_array_equal(loaded.features, graph.features)
        np.testing.assert_array_equal(loaded_ann.sensitive, ann.sensitive)
        assert loaded_prov == provenance
