import numpy as np
import pytest

from agnosbm import (Graph, ParameterError, Regime, SbmParams, cross_count,
                     neighborhood_shells, sample_sbm, split_edges)
from agnosbm.graphs import EdgeSubset, connected_component

from conftest import brute_cross_count


class TestSbmParams:
    def test_prior_must_sum_to_one(self):
        with pytest.raises(ParameterError):
            SbmParams(p=[0.5, 0.4], Q=[[1, 1], [1, 1]])

    def test_rejects_asymmetric_kernel(self):
        with pytest.raises(ParameterError):
            SbmParams(p=[0.5, 0.5], Q=[[1, 2], [3, 1]])

    def test_rejects_negative_kernel(self):
        with pytest.raises(ParameterError):
            SbmParams(p=[0.5, 0.5], Q=[[1, -1], [-1, 1]])

    def test_warns_on_equal_rows(self):
        with pytest.warns(UserWarning, match="rows"):
            SbmParams(p=[0.5, 0.5], Q=[[3.0, 3.0], [3.0, 3.0]])

    def test_probability_clamping_warns(self):
        params = SbmParams(p=[1.0], Q=[[5.0]], scale=10.0)
        with pytest.warns(UserWarning, match="clamping"):
            probs = params.edge_probabilities(4)
        assert probs.max() == 1.0


class TestGraph:
    def test_rejects_self_loop(self):
        with pytest.raises(ParameterError):
            Graph(3, [[0, 0]])

    def test_rejects_duplicate(self):
        with pytest.raises(ParameterError):
            Graph(3, [[0, 1], [1, 0]])

    def test_adjacency_is_symmetric_and_sorted(self):
        g = Graph(4, [[2, 0], [0, 1], [3, 2]])
        assert g.neighbors(0).tolist() == [1, 2]
        assert g.neighbors(2).tolist() == [0, 3]
        assert g.edge_count == 3
        assert int(g.degrees().sum()) == 2 * g.edge_count


class TestSampling:
    def test_zero_kernel_gives_no_edges(self):
        g, labels = sample_sbm(SbmParams(p=[1.0], Q=[[0.0]]), 100, 1)
        assert g.edge_count == 0
        assert len(labels) == 100

    def test_determinism(self, two_community_params):
        g1, l1 = sample_sbm(two_community_params, 500, 123)
        g2, l2 = sample_sbm(two_community_params, 500, 123)
        assert np.array_equal(g1.edges, g2.edges)
        assert np.array_equal(l1.labels, l2.labels)

    def test_mean_edge_count(self, two_community_params):
        # E[edges] for k=2, p=(1/2,1/2), Q=[[16,4],[4,16]] is n(a+b)/4.
        n = 10000
        expected = n * (16 + 4) / 4
        counts = [sample_sbm(two_community_params, n, seed)[0].edge_count
                  for seed in range(100)]
        mean = np.mean(counts)
        stderr = np.std(counts, ddof=1) / np.sqrt(len(counts))
        assert abs(mean - expected) <= 3 * stderr + 5  # +5 for the exact-pair bias

    def test_within_community_density_matches(self, two_community_params):
        n = 4000
        rates = []
        for seed in range(30):
            g, labels = sample_sbm(two_community_params, n, seed)
            inside = labels.labels[g.edges[:, 0]] == labels.labels[g.edges[:, 1]]
            zero = np.flatnonzero(labels.labels == 0)
            pairs = zero.size * (zero.size - 1) / 2
            within_zero = int((inside & (labels.labels[g.edges[:, 0]] == 0)).sum())
            rates.append(within_zero / pairs)
        mean = np.mean(rates)
        stderr = np.std(rates, ddof=1) / np.sqrt(len(rates))
        assert abs(mean - 16.0 / n) <= 3 * stderr


class TestSplit:
    def test_extremes(self, two_community_params):
        g, _ = sample_sbm(two_community_params, 300, 9)
        empty, full_rest = split_edges(g, 0.0, 1)
        assert len(empty) == 0 and full_rest.edge_count == g.edge_count
        everything, none_rest = split_edges(g, 1.0, 1)
        assert len(everything) == g.edge_count and none_rest.edge_count == 0

    def test_complementarity(self, two_community_params):
        g, _ = sample_sbm(two_community_params, 400, 2)
        subset, residual = split_edges(g, 0.3, 5)
        merged = np.concatenate([subset.edges, residual.edges])
        merged = merged[np.lexsort((merged[:, 1], merged[:, 0]))]
        assert np.array_equal(merged, g.edges)

    def test_binomial_concentration(self):
        g, _ = sample_sbm(SbmParams(p=[1.0], Q=[[2.0]]), 10000, 77)
        # trim/extend to exactly 10000 edges for the stated bound
        edges = g.edges[:10000]
        assert edges.shape[0] == 10000, "sampling produced too few edges for the test"
        g = Graph(g.n, edges)
        hits = 0
        for seed in range(100):
            subset, _ = split_edges(g, 0.5, seed)
            if abs(len(subset) - 5000) <= 4 * np.sqrt(10000 * 0.25):
                hits += 1
        assert hits >= 99

    def test_split_independent_of_sampling_stream(self, two_community_params):
        g, _ = sample_sbm(two_community_params, 300, 42)
        subset, _ = split_edges(g, 0.5, 42)  # same seed, different stream
        assert 0 < len(subset) < g.edge_count


class TestShells:
    def test_path(self):
        g = Graph(3, [[0, 1], [1, 2]])
        shells = neighborhood_shells(g, 0, 2)
        assert [s.tolist() for s in shells] == [[0], [1], [2]]

    def test_isolated(self):
        g = Graph(3, [[1, 2]])
        shells = neighborhood_shells(g, 0, 3)
        assert shells[0].tolist() == [0]
        assert all(s.size == 0 for s in shells[1:])

    def test_triangle(self):
        g = Graph(3, [[0, 1], [0, 2], [1, 2]])
        shells = neighborhood_shells(g, 0, 2)
        assert shells[1].tolist() == [1, 2]
        assert shells[2].size == 0

    def test_partition_property(self, two_community_params):
        g, _ = sample_sbm(two_community_params, 300, 8)
        shells = neighborhood_shells(g, 0, 20)
        stacked = np.concatenate(shells)
        assert stacked.size == np.unique(stacked).size  # disjoint
        component = connected_component(g, 0)
        assert np.array_equal(np.sort(stacked), component)


class TestCrossCount:
    def test_empty_subset(self):
        g = Graph(4, [[0, 1], [2, 3]])
        subset = EdgeSubset(4, np.empty((0, 2), dtype=np.int64), 2)
        assert cross_count(g, subset, 0, 3, 1, 1) == 0

    def test_hand_instance(self):
        residual = Graph(4, [[0, 1], [2, 3]])
        subset = EdgeSubset(4, np.array([[1, 2]]), 3)
        assert cross_count(residual, subset, 0, 3, 1, 1) == 1

    def test_depth_zero_edge(self):
        residual = Graph(2, np.empty((0, 2), dtype=np.int64))
        subset = EdgeSubset(2, np.array([[0, 1]]), 1)
        assert cross_count(residual, subset, 0, 1, 0, 0) == 1

    def test_symmetry_and_oracle(self, two_community_params):
        g, _ = sample_sbm(two_community_params, 250, 3)
        subset, residual = split_edges(g, 0.4, 7)
        rng = np.random.default_rng(0)
        for _ in range(25):
            v, v_prime = rng.integers(0, g.n, size=2)
            r, r_prime = rng.integers(0, 4, size=2)
            got = cross_count(residual, subset, int(v), int(v_prime), int(r), int(r_prime))
            flipped = cross_count(residual, subset, int(v_prime), int(v), int(r_prime), int(r))
            assert got == flipped
            assert got == brute_cross_count(residual, subset, int(v), int(v_prime),
                                            int(r), int(r_prime))
