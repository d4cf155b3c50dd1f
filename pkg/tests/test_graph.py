import math

import numpy as np
import pytest

from psgraph import (
    ValidationError,
    build_graph,
    directed_laplacian,
    erdos_renyi,
    induced_subgraph,
    set_distance,
)
from psgraph.graph import adjacency, undirected_neighbors, weakly_connected_components


class TestBuildGraph:
    def test_canonical_edges_sorted(self):
        g = build_graph(3, [(2, 1, 1.0), (0, 1, 2.0)])
        assert g.edges == ((0, 1, 2.0), (1, 2, 1.0))

    def test_undirected_reversed_duplicate_sums(self):
        g = build_graph(2, [(0, 1, 1.0), (1, 0, 2.0)])
        assert g.edges == ((0, 1, 3.0),)

    def test_directed_keeps_both_orientations(self):
        g = build_graph(2, [(0, 1, 1.0), (1, 0, 2.0)], directed=True)
        assert g.edges == ((0, 1, 1.0), (1, 0, 2.0))

    def test_default_labels_are_stringified_ids(self):
        g = build_graph(3, [])
        assert g.labels == ("0", "1", "2")

    def test_explicit_labels_and_lookup(self):
        g = build_graph(2, [(0, 1, 1.0)], labels=["a", "b"])
        assert g.label_of(1) == "b"
        assert g.id_of("a") == 0
        with pytest.raises(ValidationError):
            g.id_of("c")

    def test_label_count_mismatch(self):
        with pytest.raises(ValidationError):
            build_graph(2, [], labels=["only"])

    def test_duplicate_labels_rejected(self):
        with pytest.raises(ValidationError):
            build_graph(2, [], labels=["x", "x"])

    def test_endpoint_out_of_range(self):
        with pytest.raises(ValidationError):
            build_graph(2, [(0, 2, 1.0)])

    def test_negative_weight_rejected(self):
        with pytest.raises(ValidationError):
            build_graph(2, [(0, 1, -1.0)])

    def test_nonfinite_weight_rejected(self):
        with pytest.raises(ValidationError):
            build_graph(2, [(0, 1, float("nan"))])

    def test_self_loop_policy(self):
        with pytest.raises(ValidationError):
            build_graph(1, [(0, 0, 1.0)])
        g = build_graph(1, [(0, 0, 1.0)], allow_self_loops=True)
        assert g.edges == ((0, 0, 1.0),)

    def test_negative_vertex_count(self):
        with pytest.raises(ValidationError):
            build_graph(-1, [])


class TestShiftOperators:
    def test_adjacency_symmetric_for_undirected(self, path4):
        a = adjacency(path4)
        assert np.array_equal(a, a.T)
        assert a[0, 1] == 1.0 and a[0, 2] == 0.0

    def test_directed_laplacian_single_edge(self):
        g = build_graph(2, [(0, 1, 1.0)], directed=True)
        lap = directed_laplacian(g)
        assert np.allclose(lap, [[0.5, -0.5], [-0.5, 0.5]], atol=1e-12)

    def test_directed_laplacian_matches_undirected_laplacian(self, path4):
        a = adjacency(path4)
        classic = np.diag(a.sum(axis=1)) - a
        assert np.allclose(directed_laplacian(path4), classic, atol=1e-12)

    def test_directed_laplacian_symmetric_psd(self):
        g = build_graph(4, [(0, 1, 1.0), (1, 2, 2.0), (3, 0, 0.5)], directed=True)
        lap = directed_laplacian(g)
        assert np.allclose(lap, lap.T)
        assert np.linalg.eigvalsh(lap).min() >= -1e-12


class TestSubgraphsAndComponents:
    def test_induced_subgraph_mapping(self):
        g = build_graph(4, [(0, 1, 1.0), (1, 2, 2.0), (2, 3, 3.0)], labels="abcd")
        sub, mapping = induced_subgraph(g, [3, 1, 2])
        assert mapping == (1, 2, 3)
        assert sub.edges == ((0, 1, 2.0), (1, 2, 3.0))
        assert sub.labels == ("b", "c", "d")

    def test_induced_subgraph_drops_external_edges(self, path4):
        sub, _ = induced_subgraph(path4, [0, 2])
        assert sub.edges == ()

    def test_induced_subgraph_validation(self, path4):
        with pytest.raises(ValidationError):
            induced_subgraph(path4, [])
        with pytest.raises(ValidationError):
            induced_subgraph(path4, [0, 9])

    def test_star_minus_hub_splits(self):
        star = build_graph(4, [(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)])
        sub, _ = induced_subgraph(star, [1, 2, 3])
        comps = weakly_connected_components(sub)
        assert comps == [(0,), (1,), (2,)]

    def test_components_ordered_by_smallest_member(self):
        g = build_graph(5, [(3, 4, 1.0), (0, 1, 1.0)])
        assert weakly_connected_components(g) == [(0, 1), (2,), (3, 4)]

    def test_components_ignore_direction(self):
        g = build_graph(3, [(1, 0, 1.0), (2, 1, 1.0)], directed=True)
        assert weakly_connected_components(g) == [(0, 1, 2)]

    def test_empty_graph_components(self):
        assert weakly_connected_components(build_graph(0, [])) == []

    def test_neighbor_lists(self, path4):
        assert undirected_neighbors(path4) == [[1], [0, 2], [1, 3], [2]]


class TestSetDistance:
    def test_overlap_is_zero(self, path4):
        assert set_distance(path4, {0, 1}, {1, 2}) == 0

    def test_adjacent_sets(self, path4):
        assert set_distance(path4, {0}, {1, 3}) == 1

    def test_two_hops(self, path4):
        assert set_distance(path4, {0}, {2}) == 2

    def test_disconnected_is_inf(self):
        g = build_graph(4, [(0, 1, 1.0), (2, 3, 1.0)])
        assert set_distance(g, {0, 1}, {2}) == math.inf

    def test_empty_set_rejected(self, path4):
        with pytest.raises(ValidationError):
            set_distance(path4, set(), {1})


class TestErdosRenyi:
    def test_same_seed_same_graph(self):
        assert erdos_renyi(20, 0.3, seed=7) == erdos_renyi(20, 0.3, seed=7)

    def test_different_seed_differs(self):
        assert erdos_renyi(20, 0.3, seed=7) != erdos_renyi(20, 0.3, seed=8)

    def test_extreme_probabilities(self):
        assert erdos_renyi(5, 0.0, seed=0).edges == ()
        assert len(erdos_renyi(5, 1.0, seed=0).edges) == 10

    def test_probability_bounds(self):
        with pytest.raises(ValidationError):
            erdos_renyi(5, 1.5, seed=0)

    def test_mean_edge_count_near_expectation(self):
        # 2016 vertex pairs at p = 0.06 make 120.96 expected edges.
        counts = [len(erdos_renyi(64, 0.06, seed=s).edges) for s in range(1000)]
        mean = np.mean(counts)
        assert abs(mean - 120.96) <= 0.1 * 120.96
