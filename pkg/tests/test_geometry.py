import numpy as np
import pytest

from mailtopics.errors import EmptyInputError, InsufficientDataError, NoTopicsError
from mailtopics.geometry import (
    ClusterConfig,
    ClusterResult,
    cluster,
    fit_reducer,
    nearest_centroid,
    project,
)


def three_blobs(rng, n=200, spread=0.5):
    centers = np.array(
        [[10, 0, 0, 0, 0], [0, 10, 0, 0, 0], [0, 0, 10, 0, 0]], dtype=float
    )
    pts = np.concatenate([rng.normal(c, spread, size=(n, 5)) for c in centers])
    truth = np.repeat(np.arange(3), n)
    return pts, truth


def partition_sets(labels):
    groups = {}
    for i, l in enumerate(labels):
        groups.setdefault(int(l), set()).add(i)
    return {frozenset(v) for k, v in groups.items() if k != -1}


class TestFitReducer:
    def test_line_order_preserved(self):
        t = np.linspace(0, 1, 50)
        direction = np.ones(10)
        X = t[:, None] * direction[None, :]
        model = fit_reducer(X, out_dim=1, seed=0)
        proj = project(model, X)[:, 0]
        assert np.all(np.diff(proj) > 0) or np.all(np.diff(proj) < 0)

    def test_identical_vectors_project_equal(self):
        X = np.tile([1.0, 2.0, 3.0, 4.0], (20, 1))
        model = fit_reducer(X, out_dim=2, seed=0)
        proj = project(model, X)
        assert np.allclose(proj, proj[0], atol=1e-12)

    def test_reconstruction_matches_eigen_oracle(self):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(100, 32))
        out_dim = 5
        model = fit_reducer(X, out_dim=out_dim, seed=0)
        Xc = X - X.mean(axis=0)
        recon = project(model, X) @ model.components
        err = float(np.sum((Xc - recon) ** 2))

        # Brute-force oracle: eigendecomposition of the dense covariance.
        cov = Xc.T @ Xc
        eigvals = np.linalg.eigvalsh(cov)
        optimal = float(np.sum(eigvals[:-out_dim]))  # residual variance
        assert err <= optimal + 1e-6
        assert err == pytest.approx(optimal, abs=1e-6)

    def test_orthonormal_components(self):
        rng = np.random.default_rng(6)
        model = fit_reducer(rng.normal(size=(60, 12)), out_dim=4, seed=0)
        gram = model.components @ model.components.T
        assert np.allclose(gram, np.eye(4), atol=1e-6)

    def test_insufficient_data(self):
        with pytest.raises(InsufficientDataError):
            fit_reducer(np.ones((3, 8)), out_dim=5, seed=0)

    def test_deterministic(self):
        rng = np.random.default_rng(7)
        X = rng.normal(size=(80, 16))
        m1 = fit_reducer(X, out_dim=3, seed=1)
        m2 = fit_reducer(X, out_dim=3, seed=1)
        assert np.array_equal(m1.components, m2.components)
        assert np.array_equal(m1.mean, m2.mean)


class TestProject:
    def setup_method(self):
        rng = np.random.default_rng(8)
        self.X = rng.normal(size=(50, 10))
        self.model = fit_reducer(self.X, out_dim=3, seed=0)

    def test_mean_projects_to_zero(self):
        assert np.allclose(project(self.model, self.model.mean), 0.0, atol=1e-12)

    def test_training_consistency(self):
        manual = (self.X - self.model.mean) @ self.model.components.T
        assert np.allclose(project(self.model, self.X), manual, atol=1e-9)

    def test_linearity(self):
        a, b = self.X[0], self.X[1]
        pa = project(self.model, a)
        pb = project(self.model, b)
        combined = project(self.model, a + b - self.model.mean)
        assert np.allclose(combined, pa + pb, atol=1e-9)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            project(self.model, np.ones(7))


class TestDensityClustering:
    def test_three_blobs_recovered(self):
        rng = np.random.default_rng(42)
        pts, truth = three_blobs(rng)
        res = cluster(pts, ClusterConfig(algorithm="density", min_cluster_size=50))
        assert res.n_topics == 3
        assert res.outlier_count() <= 6  # near-zero on clean blobs
        agree = 0
        for t in range(3):
            members = truth[res.labels == t]
            agree += int((members == np.bincount(members).argmax()).sum())
        assert agree / len(pts) >= 0.99

    def test_too_few_points_all_outliers(self):
        rng = np.random.default_rng(1)
        res = cluster(
            rng.normal(size=(20, 5)),
            ClusterConfig(algorithm="density", min_cluster_size=100),
        )
        assert res.n_topics == 0
        assert res.outlier_count() == 20

    def test_deterministic(self):
        rng = np.random.default_rng(2)
        pts, _ = three_blobs(rng, n=80)
        cfg = ClusterConfig(algorithm="density", min_cluster_size=30)
        a = cluster(pts, cfg)
        b = cluster(pts, cfg)
        assert np.array_equal(a.labels, b.labels)

    def test_all_identical_points(self):
        res = cluster(
            np.ones((120, 5)), ClusterConfig(algorithm="density", min_cluster_size=100)
        )
        assert res.n_topics == 1
        assert res.sizes.tolist() == [120]

        res = cluster(
            np.ones((50, 5)), ClusterConfig(algorithm="density", min_cluster_size=100)
        )
        assert res.n_topics == 0

    def test_min_cluster_size_respected(self):
        rng = np.random.default_rng(3)
        for trial in range(5):
            pts = rng.normal(size=(rng.integers(40, 150), 4))
            mcs = int(rng.integers(5, 30))
            res = cluster(pts, ClusterConfig(algorithm="density", min_cluster_size=mcs))
            for size in res.sizes:
                assert size >= mcs

    def test_permutation_invariance_as_partition(self):
        rng = np.random.default_rng(4)
        pts, _ = three_blobs(rng, n=60)
        cfg = ClusterConfig(algorithm="density", min_cluster_size=25)
        base = cluster(pts, cfg)
        perm = rng.permutation(len(pts))
        permuted = cluster(pts[perm], cfg)
        unpermuted = np.full(len(pts), -1, dtype=np.int64)
        unpermuted[perm] = permuted.labels
        assert partition_sets(base.labels) == partition_sets(unpermuted)

    def test_empty_input(self):
        with pytest.raises(EmptyInputError):
            cluster(np.zeros((0, 5)), ClusterConfig(algorithm="density", min_cluster_size=5))


class TestKMeans:
    def test_recovers_blobs_without_outliers(self):
        rng = np.random.default_rng(9)
        pts, truth = three_blobs(rng, n=100)
        res = cluster(pts, ClusterConfig(algorithm="kmeans", min_cluster_size=2, k=3, seed=7))
        assert res.n_topics == 3
        assert res.outlier_count() == 0
        assert sorted(res.sizes.tolist()) == [100, 100, 100]

    def test_seeded_determinism(self):
        rng = np.random.default_rng(10)
        pts, _ = three_blobs(rng, n=50)
        cfg = ClusterConfig(algorithm="kmeans", min_cluster_size=2, k=3, seed=5)
        assert np.array_equal(cluster(pts, cfg).labels, cluster(pts, cfg).labels)

    def test_requires_k(self):
        with pytest.raises(ValueError):
            ClusterConfig(algorithm="kmeans", min_cluster_size=2)


class TestNearestCentroid:
    def _result(self):
        centroids = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
        return ClusterResult(
            labels=np.array([0, 1, 2]),
            n_topics=3,
            centroids=centroids,
            sizes=np.array([1, 1, 1]),
        )

    def test_exact_centroid(self):
        res = self._result()
        topic, distances = nearest_centroid(res, np.array([0.0, 1.0]))
        assert topic == 1
        assert distances[1] == pytest.approx(0.0, abs=1e-12)
        assert len(distances) == 3

    def test_tie_breaks_to_lowest_id(self):
        centroids = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        res = ClusterResult(
            labels=np.array([0, 1, 2]),
            n_topics=3,
            centroids=centroids,
            sizes=np.array([1, 1, 1]),
        )
        topic, _ = nearest_centroid(res, np.array([1.0, 0.0]))
        assert topic == 0

    def test_no_topics(self):
        res = ClusterResult(
            labels=np.array([-1, -1]),
            n_topics=0,
            centroids=np.zeros((0, 2)),
            sizes=np.zeros(0, dtype=int),
        )
        with pytest.raises(NoTopicsError):
            nearest_centroid(res, np.array([1.0, 0.0]))
