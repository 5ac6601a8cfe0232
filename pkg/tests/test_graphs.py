"""Affinity construction, noise edges, Laplacian variants, and file formats."""

import numpy as np
import pytest

from wavemetric import (
    AffinityConfig,
    IsolatedVertexError,
    LaplacianSpec,
    PointCloud,
    ValidationError,
    WeightedGraph,
    add_noise_edges,
    build_affinity,
    laplacian,
    read_edge_list,
    read_point_csv,
    write_edge_list,
    write_point_csv,
)


def _random_cloud(seed, n=20, d=3):
    rng = np.random.default_rng(seed)
    return PointCloud(rng.standard_normal((n, d)))


class TestBuildAffinity:
    def test_zero_distance_gives_weight_one(self):
        cloud = PointCloud(np.array([[0.0, 0.0], [0.0, 0.0]]))
        g = build_affinity(cloud, AffinityConfig(epsilon=0.7))
        assert g.weights[0, 1] == 1.0

    def test_unit_distance_unit_bandwidth(self):
        cloud = PointCloud(np.array([[0.0], [1.0]]))
        g = build_affinity(cloud, AffinityConfig(epsilon=1.0))
        np.testing.assert_allclose(g.weights[0, 1], np.exp(-1.0), rtol=1e-15)

    def test_three_collinear_points(self):
        # hand-evaluated kernel: distances 1, 1, 2 -> exp(-1), exp(-1), exp(-4)
        cloud = PointCloud(np.array([[0.0], [1.0], [2.0]]))
        g = build_affinity(cloud, AffinityConfig(epsilon=1.0))
        np.testing.assert_allclose(g.weights[0, 1], np.exp(-1.0), rtol=1e-15)
        np.testing.assert_allclose(g.weights[1, 2], np.exp(-1.0), rtol=1e-15)
        np.testing.assert_allclose(g.weights[0, 2], np.exp(-4.0), rtol=1e-15)
        assert np.all(np.diag(g.weights) == 0)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    @pytest.mark.parametrize("k_nn", [None, 3])
    def test_exact_symmetry(self, seed, k_nn):
        cloud = _random_cloud(seed)
        g = build_affinity(cloud, AffinityConfig(epsilon=1.0, k_nn=k_nn))
        assert np.array_equal(g.weights, g.weights.T)

    def test_kernel_monotonicity(self):
        # farther pairs never get larger affinity
        cloud = _random_cloud(7, n=30)
        g = build_affinity(cloud, AffinityConfig(epsilon=0.5))
        diff = cloud.points[:, None, :] - cloud.points[None, :, :]
        d2 = (diff**2).sum(axis=-1)
        iu = np.triu_indices(30, k=1)
        order = np.argsort(d2[iu])
        w_sorted = g.weights[iu][order]
        assert np.all(np.diff(w_sorted) <= 1e-15)

    def test_isolated_vertex_after_truncation(self):
        # mutual kNN with k=1 on a path isolates nothing, but radius can
        cloud = PointCloud(np.array([[0.0], [1.0], [100.0]]))
        with pytest.raises(IsolatedVertexError):
            build_affinity(cloud, AffinityConfig(epsilon=1.0, radius=5.0))
        g = build_affinity(
            cloud, AffinityConfig(epsilon=1.0, radius=5.0, allow_isolated=True)
        )
        assert g.weights[2].sum() == 0

    def test_union_vs_mutual_knn(self):
        # point 2 selects 1 as nearest; 1 selects 0; union keeps edge (1,2),
        # mutual does not
        cloud = PointCloud(np.array([[0.0], [0.4], [1.0]]))
        union = build_affinity(cloud, AffinityConfig(epsilon=1.0, k_nn=1))
        assert union.weights[1, 2] > 0
        mutual = build_affinity(
            cloud,
            AffinityConfig(epsilon=1.0, k_nn=1, symmetrization="mutual", allow_isolated=True),
        )
        assert mutual.weights[1, 2] == 0

    def test_bad_config(self):
        with pytest.raises(ValidationError):
            AffinityConfig(epsilon=0.0)
        with pytest.raises(ValidationError):
            AffinityConfig(epsilon=1.0, k_nn=0)


class TestWeightedGraph:
    def test_rejects_asymmetry(self):
        w = np.array([[0.0, 1.0], [0.5, 0.0]])
        with pytest.raises(ValidationError):
            WeightedGraph(w)

    def test_rejects_nonzero_diagonal(self):
        w = np.array([[0.1, 1.0], [1.0, 0.0]])
        with pytest.raises(ValidationError):
            WeightedGraph(w)

    def test_rejects_negative(self):
        w = np.array([[0.0, -1.0], [-1.0, 0.0]])
        with pytest.raises(ValidationError):
            WeightedGraph(w)

    def test_isolated_vertex_flag(self):
        w = np.zeros((3, 3))
        w[0, 1] = w[1, 0] = 1.0
        with pytest.raises(IsolatedVertexError):
            WeightedGraph(w)
        assert WeightedGraph(w, allow_isolated=True).n == 3


class TestAddNoiseEdges:
    def test_empty_pairs_unchanged(self):
        g = build_affinity(_random_cloud(0), AffinityConfig(epsilon=1.0))
        g2 = add_noise_edges(g, set(), weight=0.5)
        assert np.array_equal(g.weights, g2.weights)

    def test_single_pair_changes_two_entries(self):
        w = np.zeros((10, 10))
        w[np.arange(9), np.arange(1, 10)] = 1.0
        w = w + w.T
        g = WeightedGraph(w)
        g2 = add_noise_edges(g, {(0, 5)}, weight=0.5)
        changed = np.argwhere(g2.weights != g.weights)
        assert len(changed) == 2
        assert g2.weights[0, 5] >= 0.5 and g2.weights[5, 0] >= 0.5

    def test_out_of_range_pair(self):
        g = build_affinity(_random_cloud(0, n=5), AffinityConfig(epsilon=1.0))
        with pytest.raises(IndexError):
            add_noise_edges(g, {(0, 99)}, weight=0.5)


class TestLaplacian:
    def test_two_vertex_unnormalized(self):
        g = WeightedGraph(np.array([[0.0, 1.0], [1.0, 0.0]]))
        L = laplacian(g, LaplacianSpec("unnormalized"))
        np.testing.assert_array_equal(L, [[1.0, -1.0], [-1.0, 1.0]])

    @pytest.mark.parametrize("seed", [0, 1, 5])
    def test_constant_vector_in_kernel(self, seed):
        g = build_affinity(_random_cloud(seed), AffinityConfig(epsilon=1.0))
        L = laplacian(g, LaplacianSpec("unnormalized"))
        resid = np.abs(L @ np.ones(g.n)).max()
        assert resid <= 1e-12 * max(1.0, np.abs(L).max())

    def test_path_graph_eigenvalues(self):
        # brute-force oracle on P3: D - W = [[1,-1,0],[-1,2,-1],[0,-1,1]]
        w = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 0.0]])
        L = laplacian(WeightedGraph(w), LaplacianSpec("unnormalized"))
        oracle = np.sort(np.linalg.eigvalsh(L))
        np.testing.assert_allclose(oracle, [0.0, 1.0, 3.0], atol=1e-12)

    @pytest.mark.parametrize("variant", ["unnormalized", "symmetric"])
    def test_positive_semidefinite(self, variant):
        g = build_affinity(_random_cloud(3), AffinityConfig(epsilon=1.0))
        L = laplacian(g, LaplacianSpec(variant))
        assert np.array_equal(L, L.T)
        assert np.linalg.eigvalsh(L).min() >= -1e-10

    def test_random_walk_rows_sum_to_zero(self):
        g = build_affinity(_random_cloud(4), AffinityConfig(epsilon=1.0))
        L = laplacian(g, LaplacianSpec("random_walk"))
        np.testing.assert_allclose(L.sum(axis=1), 0.0, atol=1e-12)

    def test_zero_degree_normalized_errors(self):
        w = np.zeros((3, 3))
        w[0, 1] = w[1, 0] = 1.0
        g = WeightedGraph(w, allow_isolated=True)
        with pytest.raises(ValidationError, match="zero degree"):
            laplacian(g, LaplacianSpec("symmetric"))

    def test_unknown_variant(self):
        with pytest.raises(ValidationError):
            LaplacianSpec("foo")


class TestFileFormats:
    def test_point_csv_roundtrip(self, tmp_path):
        cloud = PointCloud(
            np.array([[0.0, 1.5], [2.0, -3.25], [1.0, 0.125]]),
            labels=np.array([0, 1, 1]),
        )
        path = tmp_path / "points.csv"
        write_point_csv(path, cloud)
        back = read_point_csv(path)
        np.testing.assert_array_equal(back.points, cloud.points)
        np.testing.assert_array_equal(back.labels, cloud.labels)

    def test_point_csv_without_labels(self, tmp_path):
        cloud = PointCloud(np.array([[0.5], [1.5]]))
        path = tmp_path / "points.csv"
        write_point_csv(path, cloud)
        back = read_point_csv(path)
        assert back.labels is None
        np.testing.assert_array_equal(back.points, cloud.points)

    def test_point_csv_extra_columns_ignored(self, tmp_path):
        path = tmp_path / "points.csv"
        path.write_text("x0,x1,label,target\n0.0,1.0,0,-1.0\n2.0,3.0,1,0.5\n")
        cloud = read_point_csv(path)
        np.testing.assert_array_equal(cloud.points, [[0.0, 1.0], [2.0, 3.0]])
        np.testing.assert_array_equal(cloud.labels, [0, 1])

    def test_edge_list_roundtrip(self, tmp_path):
        path = tmp_path / "graph.edges"
        path.write_text("0 1\n1 2 0.5\n2 0 2.0\n")
        g = read_edge_list(path)
        assert g.weights[0, 1] == 1.0
        assert g.weights[1, 2] == 0.5
        assert g.weights[2, 0] == 2.0
        out = tmp_path / "again.edges"
        write_edge_list(out, g)
        g2 = read_edge_list(out)
        np.testing.assert_array_equal(g.weights, g2.weights)

    def test_edge_list_strips_self_loops(self, tmp_path):
        path = tmp_path / "graph.edges"
        path.write_text("0 0 3.0\n0 1\n")
        g = read_edge_list(path)
        assert g.weights[0, 0] == 0.0

    def test_edge_list_malformed(self, tmp_path):
        path = tmp_path / "graph.edges"
        path.write_text("0 1\nnot an edge line at all\n")
        with pytest.raises(ValidationError, match=":2"):
            read_edge_list(path)


class TestPointCloud:
    def test_too_few_points(self):
        with pytest.raises(ValidationError):
            PointCloud(np.array([[0.0]]))

    def test_label_length_mismatch(self):
        with pytest.raises(ValidationError):
            PointCloud(np.zeros((3, 2)), labels=np.array([0, 1]))
