"""Reference detectors: k-nn mean distance, kth-nn distance, a density
ratio over k-nn, and LDCOF over k-means clusters.

All detectors emit ScoreVectors in the shared orientation (higher = more
anomalous). Neighbor search is exact; distance ties are broken by lower
sample index so results are independent of row order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import KTooLarge
from .scoring import ScoreVector, params_digest

# neighbor-distance floor used when duplicate points make a mean distance 0
_EPS_DISTANCE = 1e-12
# score assigned to members of singleton clusters in ldcof_score
SINGLETON_CLUSTER_SCORE = 1e12

_KMEANS_MAX_ITER = 300
_NEIGHBOR_BLOCK = 2048


@dataclass(frozen=True)
class NeighborTable:
    """k nearest neighbors per sample (self excluded), distances ascending."""

    indices: np.ndarray  # (n, k) int
    distances: np.ndarray  # (n, k) float

    @property
    def k(self) -> int:
        return self.indices.shape[1]


@dataclass(frozen=True)
class Clustering:
    centroids: np.ndarray  # (k, d)
    assignment: np.ndarray  # (n,)
    inertia: float


def _pairwise_sq_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d2 = a @ b.T
    d2 *= -2.0
    d2 += np.einsum("ij,ij->i", a, a)[:, None]
    d2 += np.einsum("ij,ij->i", b, b)[None, :]
    np.maximum(d2, 0.0, out=d2)
    return d2


def knn_table(data: Dataset, k: int) -> NeighborTable:
    """Exact k-nearest-neighbor table under Euclidean distance."""
    x = np.ascontiguousarray(data.features)
    n = x.shape[0]
    if not 1 <= k <= n - 1:
        raise KTooLarge(k, n - 1)
    indices = np.empty((n, k), dtype=np.int64)
    distances = np.empty((n, k))
    order_tiebreak = np.arange(n)
    for start in range(0, n, _NEIGHBOR_BLOCK):
        stop = min(start + _NEIGHBOR_BLOCK, n)
        d2 = _pairwise_sq_dists(x[start:stop], x)
        for i in range(start, stop):
            row = d2[i - start]
            row[i] = np.inf  # exclude self
            order = np.lexsort((order_tiebreak, row))[:k]
            indices[i] = order
            distances[i] = np.sqrt(row[order])
    return NeighborTable(indices=indices, distances=distances)


def knn_score(data: Dataset, k: int) -> ScoreVector:
    """Mean distance to the k nearest neighbors."""
    table = knn_table(data, k)
    return ScoreVector(
        scores=table.distances.mean(axis=1),
        detector="knn",
        params_digest=params_digest(k=k),
    )


def kthnn_score(data: Dataset, k: int) -> ScoreVector:
    """Distance to the k-th nearest neighbor."""
    table = knn_table(data, k)
    return ScoreVector(
        scores=table.distances[:, k - 1].copy(),
        detector="kthnn",
        params_digest=params_digest(k=k),
    )


def lof_score(data: Dataset, k: int) -> ScoreVector:
    """Mean ratio of a sample's k-nn distance to its neighbors' k-nn distances.

    This is the simplified density-ratio form (not the original
    reachability-distance LOF): score_i = mean_j d~_i / d~_j over the k
    neighbors j, where d~ is the mean k-nn distance. Zero distances from
    duplicate points are floored at 1e-12 on both sides of the ratio, so
    a fully duplicated neighborhood scores exactly 1.
    """
    table = knn_table(data, k)
    dtilde = np.maximum(table.distances.mean(axis=1), _EPS_DISTANCE)
    ratios = dtilde[:, None] / dtilde[table.indices]
    return ScoreVector(
        scores=ratios.mean(axis=1),
        detector="lof",
        params_digest=params_digest(k=k),
    )


def _seed_centroids(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ style seeding: squared-distance-weighted point picks."""
    n = x.shape[0]
    chosen = np.empty(k, dtype=np.int64)
    chosen[0] = rng.integers(n)
    d2min = _pairwise_sq_dists(x, x[chosen[:1]])[:, 0]
    for j in range(1, k):
        total = d2min.sum()
        if total > 0:
            idx = int(rng.choice(n, p=d2min / total))
        else:
            # all remaining points coincide with a centroid: pick any unchosen
            unchosen = np.setdiff1d(np.arange(n), chosen[:j])
            idx = int(rng.choice(unchosen))
        chosen[j] = idx
        d2_new = _pairwise_sq_dists(x, x[idx : idx + 1])[:, 0]
        np.minimum(d2min, d2_new, out=d2min)
    return x[chosen].copy()


def _fix_empty_clusters(
    x: np.ndarray, centroids: np.ndarray, assignment: np.ndarray
) -> bool:
    """Reseed empty clusters to the point farthest from its own centroid."""
    changed = False
    counts = np.bincount(assignment, minlength=len(centroids))
    for c in np.flatnonzero(counts == 0):
        dist_own = np.einsum(
            "ij,ij->i", x - centroids[assignment], x - centroids[assignment]
        )
        far = int(np.argmax(dist_own))
        centroids[c] = x[far]
        assignment[far] = c
        changed = True
    return changed


def kmeans(data: Dataset, k: int, seed: int = 0) -> Clustering:
    """Lloyd's algorithm with deterministic ++-style seeding.

    Stops when the assignment no longer changes or after 300 iterations;
    empty clusters are reseeded to the point farthest from its centroid.
    The returned assignment is consistent with the returned centroids and
    has no empty cluster.
    """
    x = np.ascontiguousarray(data.features)
    n = x.shape[0]
    if not 1 <= k <= n:
        raise KTooLarge(k, n, what="k_clusters")
    rng = np.random.default_rng(seed)
    centroids = _seed_centroids(x, k, rng)
    assignment = None
    for _ in range(_KMEANS_MAX_ITER):
        d2 = _pairwise_sq_dists(x, centroids)
        new_assignment = d2.argmin(axis=1)
        reseeded = _fix_empty_clusters(x, centroids, new_assignment)
        if (
            assignment is not None
            and not reseeded
            and np.array_equal(new_assignment, assignment)
        ):
            assignment = new_assignment
            break
        assignment = new_assignment
        for c in range(k):
            members = x[assignment == c]
            centroids[c] = members.mean(axis=0)
    else:
        # iteration cap: settle on a consistent assignment for the final
        # centroids (re-fixing empties can shift which centroid is nearest)
        for _ in range(k + 1):
            d2 = _pairwise_sq_dists(x, centroids)
            assignment = d2.argmin(axis=1)
            if not _fix_empty_clusters(x, centroids, assignment):
                break
    diff = x - centroids[assignment]
    inertia = float(np.einsum("ij,ij->", diff, diff))
    return Clustering(centroids=centroids, assignment=assignment, inertia=inertia)


def ldcof_score(data: Dataset, k_clusters: int, seed: int = 0) -> ScoreVector:
    """Distance to own centroid over the cluster's mean such distance.

    Members of singleton clusters get SINGLETON_CLUSTER_SCORE (a cluster
    of one is itself an anomaly candidate and has no meaningful mean).
    Multi-member clusters collapsed onto their centroid score 1. No
    large/small-cluster reassignment is applied.
    """
    clustering = kmeans(data, k_clusters, seed=seed)
    x = data.features
    diff = x - clustering.centroids[clustering.assignment]
    dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    scores = np.empty(len(x))
    for c in range(len(clustering.centroids)):
        members = clustering.assignment == c
        if members.sum() == 1:
            scores[members] = SINGLETON_CLUSTER_SCORE
            continue
        mean_dist = dist[members].mean()
        if mean_dist == 0.0:
            scores[members] = 1.0
        else:
            scores[members] = dist[members] / mean_dist
    return ScoreVector(
        scores=scores,
        detector="ldcof",
        params_digest=params_digest(k_clusters=k_clusters, seed=seed),
    )
