import numpy as np
import pytest

from gdba import (
    kmeans,
    knn_score,
    knn_table,
    kthnn_score,
    ldcof_score,
    lof_score,
    make_toy_fig2,
)
from gdba.baselines import SINGLETON_CLUSTER_SCORE
from gdba.errors import KTooLarge
from tests.conftest import dataset


def brute_force_neighbors(feats, k):
    """Quadratic oracle: full sort of (distance, index) pairs per sample."""
    n = len(feats)
    indices = np.empty((n, k), dtype=int)
    distances = np.empty((n, k))
    for i in range(n):
        pairs = []
        for j in range(n):
            if j == i:
                continue
            d = sum((a - b) ** 2 for a, b in zip(feats[i], feats[j])) ** 0.5
            pairs.append((d, j))
        pairs.sort()
        for c in range(k):
            distances[i, c], indices[i, c] = pairs[c]
    return indices, distances


COLLINEAR = [[0.0], [1.0], [10.0]]


class TestKnnTable:
    def test_collinear_nearest(self):
        table = knn_table(dataset(COLLINEAR), k=1)
        np.testing.assert_array_equal(table.indices[:, 0], [1, 0, 1])

    def test_k_equals_n_minus_one(self):
        table = knn_table(dataset(COLLINEAR), k=2)
        for i in range(3):
            assert set(table.indices[i]) == {0, 1, 2} - {i}

    def test_matches_brute_force(self, rng):
        feats = rng.normal(size=(30, 4))
        table = knn_table(dataset(feats), k=5)
        idx, dist = brute_force_neighbors(feats, 5)
        np.testing.assert_array_equal(table.indices, idx)
        np.testing.assert_allclose(table.distances, dist, atol=1e-10)

    def test_distances_ascending_and_self_excluded(self, rng):
        table = knn_table(dataset(rng.normal(size=(20, 2))), k=6)
        assert (np.diff(table.distances, axis=1) >= 0).all()
        for i in range(20):
            assert i not in table.indices[i]

    def test_ties_broken_by_lower_index(self):
        # three coincident points: each lists the other two in index order
        table = knn_table(dataset([[0.0], [0.0], [0.0]]), k=2)
        np.testing.assert_array_equal(table.indices[0], [1, 2])
        np.testing.assert_array_equal(table.indices[1], [0, 2])
        np.testing.assert_array_equal(table.indices[2], [0, 1])

    def test_k_too_large(self):
        with pytest.raises(KTooLarge):
            knn_table(dataset(COLLINEAR), k=3)
        with pytest.raises(KTooLarge):
            knn_table(dataset(COLLINEAR), k=0)


class TestKnnScore:
    def test_far_point_scores_highest(self):
        ds = dataset([[0.0], [0.0], [50.0]])
        scores = knn_score(ds, k=1).scores
        assert np.argmax(scores) == 2
        assert scores[2] > scores[0]

    def test_collinear_hand_values(self):
        scores = knn_score(dataset(COLLINEAR), k=2).scores
        np.testing.assert_allclose(scores, [5.5, 5.0, 9.5], rtol=1e-15)

    def test_k_max_is_mean_distance_to_all(self, rng):
        feats = rng.normal(size=(10, 2))
        scores = knn_score(dataset(feats), k=9).scores
        d2 = ((feats[:, None, :] - feats[None, :, :]) ** 2).sum(-1)
        dist = np.sqrt(d2)
        expected = dist.sum(axis=1) / 9  # self contributes zero
        np.testing.assert_allclose(scores, expected, rtol=1e-12)

    def test_order_invariance(self, rng):
        feats = rng.normal(size=(25, 3))
        perm = rng.permutation(25)
        base = knn_score(dataset(feats), k=4).scores
        permuted = knn_score(dataset(feats[perm]), k=4).scores
        np.testing.assert_allclose(permuted, base[perm], rtol=1e-12)


class TestKthnnScore:
    def test_equals_knn_at_k1(self, rng):
        ds = dataset(rng.normal(size=(15, 2)))
        np.testing.assert_array_equal(
            kthnn_score(ds, k=1).scores, knn_score(ds, k=1).scores
        )

    def test_collinear_hand_values(self):
        scores = kthnn_score(dataset(COLLINEAR), k=2).scores
        np.testing.assert_allclose(scores, [10.0, 9.0, 10.0], rtol=1e-15)

    def test_monotone_in_k(self, rng):
        ds = dataset(rng.normal(size=(20, 3)))
        previous = None
        for k in range(1, 8):
            scores = kthnn_score(ds, k=k).scores
            if previous is not None:
                assert (scores >= previous).all()
            previous = scores


class TestLofScore:
    def test_uniform_grid_interior_scores_one(self):
        # 7x7 unit grid, k=4: points two or more steps from the boundary
        # have neighbors whose own neighborhoods are identical in shape
        xs, ys = np.meshgrid(np.arange(7.0), np.arange(7.0))
        feats = np.column_stack([xs.ravel(), ys.ravel()])
        scores = lof_score(dataset(feats), k=4).scores
        interior = [i for i, (x, y) in enumerate(feats) if 2 <= x <= 4 and 2 <= y <= 4]
        assert len(interior) == 9
        np.testing.assert_allclose(scores[interior], 1.0, atol=1e-12)

    def test_planted_local_anomaly_is_maximum(self):
        toy = make_toy_fig2(seed=0)
        scores = lof_score(toy, k=3).scores
        assert np.argmax(scores) == 30
        assert scores[30] > 1.0

    def test_all_identical_points_score_one(self):
        scores = lof_score(dataset([[2.0, 2.0]] * 6), k=3).scores
        np.testing.assert_array_equal(scores, np.ones(6))

    def test_matches_direct_ratio_evaluation(self, rng):
        feats = rng.normal(size=(30, 3))
        k = 5
        idx, dist = brute_force_neighbors(feats, k)
        dtilde = np.maximum(dist.mean(axis=1), 1e-12)
        expected = np.array(
            [np.mean([dtilde[i] / dtilde[j] for j in idx[i]]) for i in range(30)]
        )
        got = lof_score(dataset(feats), k=k).scores
        np.testing.assert_allclose(got, expected, atol=1e-10)

    def test_scale_invariance(self, rng):
        feats = rng.normal(size=(25, 2))
        base = lof_score(dataset(feats), k=4).scores
        scaled = lof_score(dataset(feats * 37.5), k=4).scores
        np.testing.assert_allclose(scaled, base, atol=1e-12)


class TestKmeans:
    def test_two_blobs_recovered(self, rng):
        feats = np.vstack(
            [rng.normal(0.0, 0.1, size=(12, 2)), rng.normal(10.0, 0.1, size=(12, 2))]
        )
        clustering = kmeans(dataset(feats), k=2, seed=3)
        first, second = clustering.assignment[:12], clustering.assignment[12:]
        assert len(set(first.tolist())) == 1
        assert len(set(second.tolist())) == 1
        assert first[0] != second[0]

    def test_k_equals_n_zero_inertia(self, rng):
        ds = dataset(rng.normal(size=(8, 2)))
        clustering = kmeans(ds, k=8, seed=0)
        assert clustering.inertia == pytest.approx(0.0, abs=1e-20)

    def test_k1_centroid_is_mean(self, rng):
        feats = rng.normal(size=(20, 3))
        clustering = kmeans(dataset(feats), k=1, seed=0)
        np.testing.assert_allclose(clustering.centroids[0], feats.mean(axis=0), rtol=1e-12)

    def test_deterministic_for_seed(self, rng):
        ds = dataset(rng.normal(size=(40, 2)))
        a = kmeans(ds, k=4, seed=7)
        b = kmeans(ds, k=4, seed=7)
        np.testing.assert_array_equal(a.assignment, b.assignment)
        np.testing.assert_array_equal(a.centroids, b.centroids)

    def test_assignment_is_nearest_and_no_empty_cluster(self, rng):
        feats = rng.normal(size=(50, 2))
        clustering = kmeans(dataset(feats), k=6, seed=1)
        d2 = ((feats[:, None, :] - clustering.centroids[None, :, :]) ** 2).sum(-1)
        own = d2[np.arange(50), clustering.assignment]
        assert (own <= d2.min(axis=1) + 1e-12).all()
        assert len(np.unique(clustering.assignment)) == 6

    def test_k_too_large(self, rng):
        with pytest.raises(KTooLarge):
            kmeans(dataset(rng.normal(size=(4, 2))), k=5, seed=0)


class TestLdcofScore:
    def test_symmetric_square_scores_one(self):
        square = dataset([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
        np.testing.assert_allclose(ldcof_score(square, 1, seed=0).scores, 1.0, atol=1e-12)

    def test_blob_plus_outlier(self, rng):
        feats = np.vstack([rng.normal(size=(20, 2)), [[40.0, 40.0]]])
        scores = ldcof_score(dataset(feats), 1, seed=0).scores
        assert np.argmax(scores) == 20

    def test_local_anomaly_against_own_cluster(self, rng):
        # anomaly sits near blob 1; with 2 clusters its ratio is computed
        # against blob 1's mean distance and tops every blob-1 member
        blob1 = rng.normal(0.0, 0.05, size=(15, 2))
        blob2 = rng.normal(10.0, 0.5, size=(15, 2))
        anomaly = [[1.0, 0.0]]
        feats = np.vstack([blob1, blob2, anomaly])
        clustering = kmeans(dataset(feats), 2, seed=0)
        assert clustering.assignment[30] == clustering.assignment[0]
        scores = ldcof_score(dataset(feats), 2, seed=0).scores
        assert scores[30] > scores[:15].max()

    def test_matches_direct_ratio(self, rng):
        feats = rng.normal(size=(30, 2))
        clustering = kmeans(dataset(feats), 3, seed=5)
        dist = np.linalg.norm(feats - clustering.centroids[clustering.assignment], axis=1)
        expected = np.empty(30)
        for c in range(3):
            members = clustering.assignment == c
            expected[members] = dist[members] / dist[members].mean()
        got = ldcof_score(dataset(feats), 3, seed=5).scores
        np.testing.assert_allclose(got, expected, atol=1e-10)

    def test_singleton_cluster_flagged(self):
        # far point forms its own cluster under k=2
        feats = [[0.0], [0.1], [0.2], [100.0]]
        scores = ldcof_score(dataset(feats), 2, seed=0).scores
        assert scores[3] == SINGLETON_CLUSTER_SCORE

    def test_scale_invariance_given_same_assignment(self, rng):
        feats = rng.normal(size=(24, 2))
        base = ldcof_score(dataset(feats), 2, seed=9)
        scaled = ldcof_score(dataset(feats * 11.0), 2, seed=9)
        base_assign = kmeans(dataset(feats), 2, seed=9).assignment
        scaled_assign = kmeans(dataset(feats * 11.0), 2, seed=9).assignment
        if np.array_equal(base_assign, scaled_assign):
            np.testing.assert_allclose(scaled.scores, base.scores, atol=1e-12)


class TestOrientation:
    def test_higher_means_more_anomalous_everywhere(self, rng):
        # one extreme outlier must top every detector's score vector
        feats = np.vstack([rng.normal(size=(20, 2)), [[1000.0, 1000.0]]])
        ds = dataset(feats)
        assert np.argmax(knn_score(ds, 3).scores) == 20
        assert np.argmax(kthnn_score(ds, 3).scores) == 20
        assert np.argmax(lof_score(ds, 3).scores) == 20
        assert np.argmax(ldcof_score(ds, 1, seed=0).scores) == 20
